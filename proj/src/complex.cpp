#include "relu_morse/complex.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "relu_morse/errors.hpp"

namespace relu_morse {

using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

std::optional<std::size_t> CanonicalComplex::find(const SignSequence& s) const {
    auto it = index_.find(s);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

const Cell& CanonicalComplex::at(const SignSequence& s) const {
    auto i = find(s);
    if (!i) throw IndexError("cell " + s.str() + " is not in the complex");
    return cells_[*i];
}

std::optional<std::size_t> CanonicalComplex::find_vertex(const SignSequence& s) const {
    auto it = vertex_index_.find(s);
    if (it == vertex_index_.end()) return std::nullopt;
    return it->second;
}

std::vector<std::size_t> CanonicalComplex::cells_of_dim(int dim) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < cells_.size(); ++i)
        if (cells_[i].dim == dim) out.push_back(i);
    return out;
}

namespace {

constexpr double kConstantRow = 1e-12;

// One node-map sign condition a.x + b (sign) 0, scaled so |a|_inf = 1.
// Returns nullopt when the row is constant on the region; `satisfied` then
// reports whether the constant has the requested sign.
std::optional<LinearConstraint> node_constraint(const RowVectorXd& a, double b, std::int8_t sign, bool& satisfied) {
    double norm = a.size() ? a.cwiseAbs().maxCoeff() : 0.0;
    if (norm <= kConstantRow * std::max(1.0, std::abs(b))) {
        satisfied = sign == 0 ? std::abs(b) <= kConstantRow : sign * b > 0.0;
        return std::nullopt;
    }
    satisfied = true;
    LinearConstraint c;
    c.coeffs = a / norm;
    c.rhs = -b / norm;
    c.relation = sign == 0 ? Relation::Equal : (sign > 0 ? Relation::GreaterEqual : Relation::LessEqual);
    c.strict = sign != 0;
    return c;
}

struct Partial {
    SignSequence prefix;
    std::vector<LinearConstraint> rows;
    std::size_t constant_zeros = 0;  // zero entries whose node map is constant here
    MatrixXd layer_jac;
    VectorXd layer_off;
    VectorXd witness;
    double slack = 1.0;
};

void for_each_filling(const SignSequence& c, const std::vector<std::int8_t>& values,
                      const std::function<void(const SignSequence&)>& fn) {
    auto zeros = c.zero_positions();
    SignSequence s = c;
    std::vector<std::size_t> digit(zeros.size(), 0);
    for (;;) {
        for (std::size_t k = 0; k < zeros.size(); ++k) s.set(zeros[k], values[digit[k]]);
        fn(s);
        bool wrapped = true;
        for (std::size_t k = zeros.size(); k > 0; --k) {
            if (++digit[k - 1] < values.size()) {
                wrapped = false;
                break;
            }
            digit[k - 1] = 0;
        }
        if (wrapped) return;
    }
}

MatrixXd equality_rows(const LpProblem& p) {
    std::vector<RowVectorXd> rows;
    for (const auto& c : p.constraints)
        if (c.relation == Relation::Equal) rows.push_back(c.coeffs);
    MatrixXd e(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(p.num_vars));
    for (std::size_t i = 0; i < rows.size(); ++i) e.row(static_cast<Eigen::Index>(i)) = rows[i];
    return e;
}

Eigen::Index numeric_rank(const MatrixXd& m) {
    if (m.rows() == 0) return 0;
    Eigen::ColPivHouseholderQR<MatrixXd> qr(m);
    qr.setThreshold(1e-9);
    return qr.rank();
}

// Component of g tangent to the affine hull described by equality rows e.
RowVectorXd tangent_part(const RowVectorXd& g, const MatrixXd& e) {
    if (e.rows() == 0) return g;
    MatrixXd gram = e * e.transpose();
    VectorXd coef = gram.ldlt().solve(e * g.transpose());
    return g - (e.transpose() * coef).transpose();
}

}  // namespace

LpProblem cell_constraints(const ReluNetwork& net, const SignSequence& cell) {
    auto form = net.cell_affine_form(cell);
    const auto& arch = net.architecture();
    LpProblem p;
    p.num_vars = net.input_dim();
    p.objective = RowVectorXd::Zero(static_cast<Eigen::Index>(p.num_vars));
    for (std::size_t layer = 1; layer <= arch.hidden_layers(); ++layer) {
        const auto& jac = form.node_jacobians[layer - 1];
        const auto& off = form.node_offsets[layer - 1];
        for (Eigen::Index j = 0; j < jac.rows(); ++j) {
            auto pos = arch.layer_offset(layer) + static_cast<std::size_t>(j);
            bool satisfied = true;
            auto c = node_constraint(jac.row(j), off(j), cell[pos], satisfied);
            if (!c) continue;
            c->source = pos;
            p.constraints.push_back(std::move(*c));
        }
    }
    return p;
}

VectorXd vertex_location(const ReluNetwork& net, const SignSequence& v, const SignSequence& container) {
    const auto n0 = net.input_dim();
    auto zeros = v.zero_positions();
    if (zeros.size() != n0) throw GenericityError("vertex " + v.str() + " does not have n0 zero entries");
    if (!is_face(v, container)) throw IndexError(v.str() + " is not a face of " + container.str());
    auto form = net.cell_affine_form(container);
    const auto& arch = net.architecture();
    MatrixXd w(static_cast<Eigen::Index>(n0), static_cast<Eigen::Index>(n0));
    VectorXd rhs(static_cast<Eigen::Index>(n0));
    for (std::size_t k = 0; k < n0; ++k) {
        auto layer = arch.layer_of(zeros[k]);
        auto j = static_cast<Eigen::Index>(zeros[k] - arch.layer_offset(layer));
        RowVectorXd row = form.node_jacobians[layer - 1].row(j);
        double b = form.node_offsets[layer - 1](j);
        double norm = row.cwiseAbs().maxCoeff();
        if (norm <= kConstantRow) throw SingularSystemError("vertex " + v.str() + ": node map is constant");
        w.row(static_cast<Eigen::Index>(k)) = row / norm;
        rhs(static_cast<Eigen::Index>(k)) = -b / norm;
    }
    Eigen::FullPivLU<MatrixXd> lu(w);
    lu.setThreshold(1e-10);
    if (!lu.isInvertible()) throw SingularSystemError("vertex " + v.str() + ": singular location system");
    return lu.solve(rhs);
}

VectorXd vertex_location(const CanonicalComplex& complex, const SignSequence& v) {
    return vertex_location(complex.net(), v, container_cell(complex, v));
}

std::vector<SignSequence> cofacets(const CanonicalComplex& complex, const SignSequence& c) {
    std::vector<SignSequence> out;
    for (auto pos : c.zero_positions()) {
        for (std::int8_t s : {std::int8_t{-1}, std::int8_t{1}}) {
            SignSequence d = c;
            d.set(pos, s);
            if (complex.contains(d)) out.push_back(std::move(d));
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<SignSequence> facets(const CanonicalComplex& complex, const SignSequence& c) {
    std::vector<SignSequence> out;
    for (std::size_t pos = 0; pos < c.size(); ++pos) {
        if (c[pos] == 0) continue;
        SignSequence d = c;
        d.set(pos, 0);
        if (complex.contains(d)) out.push_back(std::move(d));
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<SignSequence> star(const CanonicalComplex& complex, const SignSequence& c) {
    std::vector<SignSequence> out;
    for_each_filling(c, {-1, 0, 1}, [&](const SignSequence& s) {
        if (complex.contains(s)) out.push_back(s);
    });
    std::sort(out.begin(), out.end());
    return out;
}

SignSequence container_cell(const CanonicalComplex& complex, const SignSequence& c) {
    std::optional<SignSequence> best;
    for_each_filling(c, {-1, 1}, [&](const SignSequence& s) {
        if (complex.contains(s) && (!best || s < *best)) best = s;
    });
    if (!best) throw GenericityError("no top-dimensional cell contains " + c.str());
    return *best;
}

namespace {

LpResult maximize_over(const ReluNetwork& net, const SignSequence& c, const RowVectorXd& objective,
                       double offset, const LpTolerances& tol) {
    LpProblem p = cell_constraints(net, c);
    p.objective = objective;
    p.offset = offset;
    return lp_solve(p, tol);
}

}  // namespace

bool bounded_above(const CanonicalComplex& complex, const SignSequence& c) {
    auto form = complex.net().cell_affine_form(c);
    auto r = maximize_over(complex.net(), c, form.total_gradient, form.total_offset, complex.tolerances().lp());
    if (r.status == LpStatus::Infeasible) throw NumericalInstability("cell " + c.str() + " has an empty closure");
    return r.status == LpStatus::Optimal;
}

bool is_bounded(const CanonicalComplex& complex, const SignSequence& c) {
    const auto n0 = static_cast<Eigen::Index>(complex.input_dim());
    for (Eigen::Index i = 0; i < n0; ++i) {
        for (double dir : {1.0, -1.0}) {
            RowVectorXd obj = RowVectorXd::Zero(n0);
            obj(i) = dir;
            auto r = maximize_over(complex.net(), c, obj, 0.0, complex.tolerances().lp());
            if (r.status != LpStatus::Optimal) return false;
        }
    }
    return true;
}

std::vector<SignSequence> lower_star(const CanonicalComplex& complex, std::size_t vertex) {
    const auto& v = complex.vertex(vertex);
    std::vector<SignSequence> out;
    for (const auto& s : star(complex, v.signs)) {
        const auto& c = complex.at(s);
        if (c.owner && *c.owner == vertex) out.push_back(s);
    }
    return out;
}

CanonicalComplex build_complex(const ReluNetwork& net, const BuildOptions& options) {
    const auto& arch = net.architecture();
    const auto& tol = options.tol;
    const std::size_t n0 = net.input_dim();
    const std::size_t total = net.total_neurons();
    const auto lp_tol = tol.lp();

    std::vector<Partial> current(1);
    current[0].witness = VectorXd::Zero(static_cast<Eigen::Index>(n0));

    for (std::size_t pos = 0; pos < total; ++pos) {
        const std::size_t layer = arch.layer_of(pos);
        const auto j = static_cast<Eigen::Index>(pos - arch.layer_offset(layer));
        std::vector<Partial> next;
        for (auto& part : current) {
            if (j == 0) std::tie(part.layer_jac, part.layer_off) = net.layer_node_forms(part.prefix, layer);
            RowVectorXd a = part.layer_jac.row(j);
            double b = part.layer_off(j);
            for (std::int8_t s : {std::int8_t{-1}, std::int8_t{0}, std::int8_t{1}}) {
                bool satisfied = true;
                auto row = node_constraint(a, b, s, satisfied);
                if (!satisfied) continue;
                Partial child;
                child.prefix = SignSequence(part.prefix.size() + 1);
                for (std::size_t k = 0; k < part.prefix.size(); ++k) child.prefix.set(k, part.prefix[k]);
                child.prefix.set(part.prefix.size(), s);
                child.rows = part.rows;
                child.constant_zeros = part.constant_zeros + (s == 0 && !row);
                child.layer_jac = part.layer_jac;
                child.layer_off = part.layer_off;
                if (row) {
                    child.rows.push_back(std::move(*row));
                    LpProblem p;
                    p.num_vars = n0;
                    p.objective = RowVectorXd::Zero(static_cast<Eigen::Index>(n0));
                    p.constraints = child.rows;
                    auto w = interior_slack(p, lp_tol);
                    if (!w || w->slack <= tol.lp_feasibility) continue;
                    child.witness = w->point;
                    child.slack = w->slack;
                } else {
                    child.witness = part.witness;
                    child.slack = part.slack;
                }
                if (child.prefix.zero_count() > n0)
                    throw GenericityError("sign pattern " + child.prefix.str() + " with more than n0 zeros is realized");
                next.push_back(std::move(child));
            }
        }
        current = std::move(next);
    }

    CanonicalComplex complex(net, tol);
    std::sort(current.begin(), current.end(), [](const Partial& x, const Partial& y) { return x.prefix < y.prefix; });
    for (auto& part : current) {
        const auto zeros = part.prefix.zero_count();
        LpProblem p;
        p.num_vars = n0;
        p.constraints = part.rows;
        if (part.constant_zeros > 0 || static_cast<std::size_t>(numeric_rank(equality_rows(p))) != zeros)
            throw GenericityError("cell " + part.prefix.str() + " has dependent node-map equations");
        Cell c;
        c.signs = part.prefix;
        c.dim = static_cast<int>(n0 - zeros);
        c.interior = part.witness;
        c.interior_slack = part.slack;
        complex.index_.emplace(c.signs, complex.cells_.size());
        complex.cells_.push_back(std::move(c));
    }

    // Vertices.
    for (std::size_t i = 0; i < complex.cells_.size(); ++i) {
        const auto& c = complex.cells_[i];
        if (c.dim != 0) continue;
        VertexRecord v;
        v.cell = i;
        v.signs = c.signs;
        v.location = vertex_location(complex, c.signs);
        v.value = net.evaluate(v.location);
        complex.vertex_index_.emplace(v.signs, complex.vertices_.size());
        complex.vertices_.push_back(std::move(v));
    }

    // Local cross-polytope structure: all 3^n0 fillings around each vertex.
    for (std::size_t vi = 0; vi < complex.vertices_.size(); ++vi) {
        const auto& v = complex.vertices_[vi];
        std::size_t found = 0;
        for_each_filling(v.signs, {-1, 0, 1}, [&](const SignSequence& s) {
            auto ci = complex.find(s);
            if (!ci) return;
            ++found;
            complex.cells_[*ci].vertices.push_back(vi);
        });
        std::size_t expected = 1;
        for (std::size_t k = 0; k < n0; ++k) expected *= 3;
        if (found != expected)
            throw GenericityError("vertex " + v.signs.str() + " has an incomplete local star (" +
                                  std::to_string(found) + " of " + std::to_string(expected) + " cells)");
    }

    // Flat cells.
    for (const auto& c : complex.cells_) {
        if (c.dim == 0) continue;
        auto form = net.cell_affine_form(c.signs);
        auto e = equality_rows(cell_constraints(net, c.signs));
        RowVectorXd along = tangent_part(form.total_gradient, e);
        if (along.norm() <= tol.flat * form.total_gradient.norm()) {
            complex.has_flat_ = true;
            if (options.reject_flat) throw FlatCellError("F is constant on the " + std::to_string(c.dim) + "-cell " + c.signs.str());
        }
    }

    // Injectivity on vertices.
    if (options.check_injectivity) {
        std::vector<std::size_t> order(complex.vertices_.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return complex.vertices_[a].value < complex.vertices_[b].value;
        });
        for (std::size_t k = 1; k < order.size(); ++k) {
            const auto& a = complex.vertices_[order[k - 1]];
            const auto& b = complex.vertices_[order[k]];
            double scale = std::max({1.0, std::abs(a.value), std::abs(b.value)});
            if (std::abs(b.value - a.value) <= tol.sign * scale)
                throw InjectivityError("vertices " + a.signs.str() + " and " + b.signs.str() + " share the value " +
                                       std::to_string(a.value));
        }
    }

    // Boundedness above and lower-star ownership.
    for (auto& c : complex.cells_) {
        auto form = net.cell_affine_form(c.signs);
        auto r = maximize_over(net, c.signs, form.total_gradient, form.total_offset, lp_tol);
        if (r.status == LpStatus::Infeasible) throw NumericalInstability("cell " + c.signs.str() + " has an empty closure");
        c.bounded_above = r.status == LpStatus::Optimal;
        if (!*c.bounded_above) {
            c.sup_value = std::numeric_limits<double>::infinity();
            continue;
        }
        c.sup_value = r.value;
        std::optional<std::size_t> best;
        double gap = std::numeric_limits<double>::infinity();
        for (auto vi : c.vertices) {
            double d = std::abs(complex.vertices_[vi].value - r.value);
            if (d < gap) {
                gap = d;
                best = vi;
            }
        }
        double scale = std::max(1.0, std::abs(r.value));
        if (best && gap <= tol.lp_feasibility * scale) {
            c.owner = best;
        } else if (options.reject_flat) {
            throw GenericityError("maximum of F over " + c.signs.str() + " is not attained at one of its vertices");
        }
    }

    return complex;
}

}  // namespace relu_morse
