#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace relu_morse {

enum class Relation { LessEqual, GreaterEqual, Equal };

/// coeffs . x  (relation)  rhs. A strict constraint is solved as its closure
/// by lp_solve; interior_slack() is the tool for strict feasibility.
struct LinearConstraint {
    Eigen::RowVectorXd coeffs;
    Relation relation = Relation::GreaterEqual;
    double rhs = 0.0;
    bool strict = false;
    /// Caller-defined row label, carried through untouched.
    std::optional<std::size_t> source;
};

/// Maximize objective . x + offset over free variables x.
struct LpProblem {
    std::size_t num_vars = 0;
    Eigen::RowVectorXd objective;
    double offset = 0.0;
    std::vector<LinearConstraint> constraints;
};

struct LpTolerances {
    double pivot = 1e-9;
    double feasibility = 1e-7;
};

enum class LpStatus { Optimal, Unbounded, Infeasible };

struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    double value = 0.0;
    Eigen::VectorXd point;
    /// Indices of inequality constraints active at `point`.
    std::vector<std::size_t> tight;
};

/// Dense two-phase tableau simplex with Bland's rule. Throws
/// NumericalInstability when the returned point misses a constraint by more
/// than the feasibility tolerance or the pivot budget is exhausted.
LpResult lp_solve(const LpProblem& problem, const LpTolerances& tol = {});

struct InteriorWitness {
    double slack = 0.0;
    Eigen::VectorXd point;
};

/// Maximizes the uniform margin t <= 1 by which every strict constraint is
/// satisfied (equalities held exactly, non-strict inequalities as given).
/// Returns nullopt when even the closure is empty.
std::optional<InteriorWitness> interior_slack(const LpProblem& problem, const LpTolerances& tol = {});

}  // namespace relu_morse
