#include "relu_morse/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "relu_morse/errors.hpp"

namespace relu_morse {

namespace {

constexpr std::size_t kMaxPivots = 100000;

class Tableau {
public:
    Tableau(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), t_(Eigen::MatrixXd::Zero(rows + 1, cols + 1)), basis_(rows) {}

    double& at(std::size_t r, std::size_t c) { return t_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)); }
    double at(std::size_t r, std::size_t c) const { return t_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)); }
    double& rhs(std::size_t r) { return at(r, cols_); }
    double rhs(std::size_t r) const { return at(r, cols_); }
    double& cost(std::size_t c) { return at(rows_, c); }
    double objective() const { return at(rows_, cols_); }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::vector<std::size_t>& basis() { return basis_; }

    void pivot(std::size_t r, std::size_t c) {
        const auto R = static_cast<Eigen::Index>(r);
        const auto C = static_cast<Eigen::Index>(c);
        t_.row(R) /= t_(R, C);
        for (Eigen::Index i = 0; i < t_.rows(); ++i) {
            if (i == R) continue;
            double f = t_(i, C);
            if (f != 0.0) t_.row(i) -= f * t_.row(R);
        }
        basis_[r] = c;
    }

    void remove_row(std::size_t r) {
        const auto R = static_cast<Eigen::Index>(r);
        Eigen::MatrixXd next(t_.rows() - 1, t_.cols());
        next.topRows(R) = t_.topRows(R);
        next.bottomRows(t_.rows() - R - 1) = t_.bottomRows(t_.rows() - R - 1);
        t_ = std::move(next);
        basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(r));
        --rows_;
    }

    /// Installs objective c (maximize) as reduced costs against the current basis.
    void set_objective(const std::vector<double>& c) {
        for (std::size_t j = 0; j <= cols_; ++j) at(rows_, j) = 0.0;
        for (std::size_t j = 0; j < cols_; ++j) at(rows_, j) = -c[j];
        for (std::size_t r = 0; r < rows_; ++r) {
            double cb = c[basis_[r]];
            if (cb == 0.0) continue;
            for (std::size_t j = 0; j <= cols_; ++j) at(rows_, j) += cb * at(r, j);
        }
    }

    enum class Outcome { Optimal, Unbounded };

    /// Bland's rule: lowest-index improving column, lowest-index basic
    /// variable among ratio ties.
    Outcome run(std::size_t allowed_cols, double eps, std::size_t& budget) {
        for (;;) {
            std::size_t enter = cols_;
            for (std::size_t j = 0; j < allowed_cols; ++j) {
                if (at(rows_, j) < -eps) {
                    enter = j;
                    break;
                }
            }
            if (enter == cols_) return Outcome::Optimal;
            std::size_t leave = rows_;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t r = 0; r < rows_; ++r) {
                double a = at(r, enter);
                if (a <= eps) continue;
                double ratio = std::max(rhs(r), 0.0) / a;
                if (leave == rows_ || ratio < best - 1e-12) {
                    best = ratio;
                    leave = r;
                } else if (ratio <= best + 1e-12 && basis_[r] < basis_[leave]) {
                    best = std::min(best, ratio);
                    leave = r;
                }
            }
            if (leave == rows_) return Outcome::Unbounded;
            if (budget-- == 0) throw NumericalInstability("simplex pivot budget exhausted");
            pivot(leave, enter);
        }
    }

private:
    std::size_t rows_;
    std::size_t cols_;
    Eigen::MatrixXd t_;
    std::vector<std::size_t> basis_;
};

double constraint_scale(const LinearConstraint& c, const Eigen::VectorXd& x) {
    double xs = x.size() ? x.cwiseAbs().maxCoeff() : 0.0;
    double cs = c.coeffs.size() ? c.coeffs.cwiseAbs().sum() : 0.0;
    return std::max({1.0, std::abs(c.rhs), cs * xs});
}

}  // namespace

LpResult lp_solve(const LpProblem& p, const LpTolerances& tol) {
    const std::size_t n = p.num_vars;
    if (static_cast<std::size_t>(p.objective.size()) != n) throw ShapeError("objective length mismatch");
    for (const auto& c : p.constraints)
        if (static_cast<std::size_t>(c.coeffs.size()) != n) throw ShapeError("constraint length mismatch");

    const std::size_t m = p.constraints.size();
    std::size_t slack_count = 0;
    for (const auto& c : p.constraints) slack_count += (c.relation != Relation::Equal);

    // Columns: x+ (n) | x- (n) | slacks | artificials (m)
    const std::size_t art0 = 2 * n + slack_count;
    const std::size_t cols = art0 + m;
    Tableau tab(m, cols);
    std::size_t slack_col = 2 * n;
    for (std::size_t r = 0; r < m; ++r) {
        const auto& c = p.constraints[r];
        for (std::size_t j = 0; j < n; ++j) {
            tab.at(r, j) = c.coeffs(static_cast<Eigen::Index>(j));
            tab.at(r, n + j) = -c.coeffs(static_cast<Eigen::Index>(j));
        }
        if (c.relation == Relation::LessEqual) tab.at(r, slack_col++) = 1.0;
        else if (c.relation == Relation::GreaterEqual) tab.at(r, slack_col++) = -1.0;
        tab.rhs(r) = c.rhs;
        if (c.rhs < 0.0)
            for (std::size_t j = 0; j <= cols; ++j) tab.at(r, j) = -tab.at(r, j);
        tab.at(r, art0 + r) = 1.0;
        tab.basis()[r] = art0 + r;
    }

    std::size_t budget = kMaxPivots;
    LpResult result;

    // Phase 1: maximize minus the sum of artificials.
    std::vector<double> phase1(cols, 0.0);
    for (std::size_t j = art0; j < cols; ++j) phase1[j] = -1.0;
    tab.set_objective(phase1);
    tab.run(cols, tol.pivot, budget);
    if (tab.objective() < -tol.feasibility) {
        result.status = LpStatus::Infeasible;
        return result;
    }
    // Drive remaining artificials out of the basis; drop redundant rows.
    for (std::size_t r = 0; r < tab.rows();) {
        if (tab.basis()[r] < art0) {
            ++r;
            continue;
        }
        std::size_t col = art0;
        double best = tol.pivot;
        for (std::size_t j = 0; j < art0; ++j) {
            if (std::abs(tab.at(r, j)) > best) {
                best = std::abs(tab.at(r, j));
                col = j;
            }
        }
        if (col == art0) {
            tab.remove_row(r);
        } else {
            tab.pivot(r, col);
            ++r;
        }
    }

    // Phase 2.
    std::vector<double> phase2(cols, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        phase2[j] = p.objective(static_cast<Eigen::Index>(j));
        phase2[n + j] = -p.objective(static_cast<Eigen::Index>(j));
    }
    tab.set_objective(phase2);
    if (tab.run(art0, tol.pivot, budget) == Tableau::Outcome::Unbounded) {
        result.status = LpStatus::Unbounded;
        return result;
    }

    Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < tab.rows(); ++r) {
        std::size_t b = tab.basis()[r];
        if (b < n) x(static_cast<Eigen::Index>(b)) += tab.rhs(r);
        else if (b < 2 * n) x(static_cast<Eigen::Index>(b - n)) -= tab.rhs(r);
    }

    for (std::size_t i = 0; i < m; ++i) {
        const auto& c = p.constraints[i];
        double lhs = c.coeffs.dot(x);
        double gap = lhs - c.rhs;
        double slack = tol.feasibility * constraint_scale(c, x);
        bool ok = c.relation == Relation::Equal        ? std::abs(gap) <= slack
                  : c.relation == Relation::GreaterEqual ? gap >= -slack
                                                         : gap <= slack;
        if (!ok) throw NumericalInstability("simplex solution violates constraint " + std::to_string(i));
        if (c.relation != Relation::Equal && std::abs(gap) <= slack) result.tight.push_back(i);
    }

    result.status = LpStatus::Optimal;
    result.point = std::move(x);
    result.value = p.objective.dot(result.point) + p.offset;
    return result;
}

std::optional<InteriorWitness> interior_slack(const LpProblem& p, const LpTolerances& tol) {
    const std::size_t n = p.num_vars;
    LpProblem q;
    q.num_vars = n + 1;
    q.objective = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(n + 1));
    q.objective(static_cast<Eigen::Index>(n)) = 1.0;
    for (const auto& c : p.constraints) {
        LinearConstraint d;
        d.coeffs = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(n + 1));
        d.coeffs.head(static_cast<Eigen::Index>(n)) = c.coeffs;
        d.relation = c.relation;
        d.rhs = c.rhs;
        if (c.strict && c.relation == Relation::GreaterEqual) d.coeffs(static_cast<Eigen::Index>(n)) = -1.0;
        if (c.strict && c.relation == Relation::LessEqual) d.coeffs(static_cast<Eigen::Index>(n)) = 1.0;
        q.constraints.push_back(std::move(d));
    }
    LinearConstraint cap;
    cap.coeffs = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(n + 1));
    cap.coeffs(static_cast<Eigen::Index>(n)) = 1.0;
    cap.relation = Relation::LessEqual;
    cap.rhs = 1.0;
    q.constraints.push_back(std::move(cap));

    auto r = lp_solve(q, tol);
    if (r.status != LpStatus::Optimal) return std::nullopt;
    return InteriorWitness{r.value, r.point.head(static_cast<Eigen::Index>(n))};
}

}  // namespace relu_morse
