#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "relu_morse/lp.hpp"
#include "relu_morse/network.hpp"
#include "relu_morse/sign_sequence.hpp"

namespace relu_morse {

struct Tolerances {
    double sign = 1e-9;           // zero test for normalized node values
    double lp_feasibility = 1e-7; // strict-feasibility slack and LP residuals
    double lp_pivot = 1e-9;
    double flat = 1e-9;           // relative directional-derivative floor

    LpTolerances lp() const { return LpTolerances{lp_pivot, lp_feasibility}; }
};

struct BuildOptions {
    Tolerances tol;
    /// When false, cells on which F is constant are kept; only orientation
    /// and rendering of such complexes are meaningful.
    bool reject_flat = true;
    /// Require pairwise distinct vertex values.
    bool check_injectivity = true;

    /// Only the genericity conditions (sign-pattern dimensions, local
    /// cross-polytope structure, solvable vertex systems) are enforced.
    static BuildOptions genericity_only(Tolerances tol = {}) { return BuildOptions{tol, false, false}; }
};

struct Cell {
    SignSequence signs;
    int dim = 0;
    /// A point in the relative interior and its normalized constraint margin.
    Eigen::VectorXd interior;
    double interior_slack = 0.0;
    /// Vertex-table indices of the vertices in the closure.
    std::vector<std::size_t> vertices;
    std::optional<bool> bounded_above;
    /// max of F over the closure; +inf when unbounded above.
    double sup_value = 0.0;
    /// The vertex whose lower star holds this cell (bounded-above cells only).
    std::optional<std::size_t> owner;
};

struct VertexRecord {
    std::size_t cell = 0;  // index into CanonicalComplex::cells()
    SignSequence signs;
    Eigen::VectorXd location;
    double value = 0.0;
};

/// The cell poset of C(F). Cells are stored sorted by sign sequence and the
/// vertex table is sorted the same way. Immutable after build_complex().
class CanonicalComplex {
public:
    CanonicalComplex(ReluNetwork net, Tolerances tol) : net_(std::move(net)), tol_(tol) {}

    const ReluNetwork& net() const { return net_; }
    const Tolerances& tolerances() const { return tol_; }
    std::size_t input_dim() const { return net_.input_dim(); }

    const std::vector<Cell>& cells() const { return cells_; }
    const Cell& cell(std::size_t i) const { return cells_.at(i); }
    std::optional<std::size_t> find(const SignSequence& s) const;
    bool contains(const SignSequence& s) const { return find(s).has_value(); }
    const Cell& at(const SignSequence& s) const;

    const std::vector<VertexRecord>& vertices() const { return vertices_; }
    const VertexRecord& vertex(std::size_t i) const { return vertices_.at(i); }
    std::optional<std::size_t> find_vertex(const SignSequence& s) const;

    std::vector<std::size_t> cells_of_dim(int dim) const;
    bool has_flat_cells() const { return has_flat_; }

private:
    friend CanonicalComplex build_complex(const ReluNetwork& net, const BuildOptions& options);

    ReluNetwork net_;
    Tolerances tol_;
    std::vector<Cell> cells_;
    std::map<SignSequence, std::size_t> index_;
    std::vector<VertexRecord> vertices_;
    std::map<SignSequence, std::size_t> vertex_index_;
    bool has_flat_ = false;
};

/// Layer-by-layer refinement of the input space, one neuron at a time; each
/// candidate sign pattern is kept iff it is strictly feasible. Throws
/// GenericityError, InjectivityError or FlatCellError on excluded inputs.
CanonicalComplex build_complex(const ReluNetwork& net, const BuildOptions& options = {});

/// Stored cells obtained by replacing exactly one zero entry of c with +-1,
/// in sign-sequence order.
std::vector<SignSequence> cofacets(const CanonicalComplex& complex, const SignSequence& c);
/// Stored cells obtained by zeroing exactly one nonzero entry of c.
std::vector<SignSequence> facets(const CanonicalComplex& complex, const SignSequence& c);

/// Every stored cell having c as a face (c included), in sign order.
std::vector<SignSequence> star(const CanonicalComplex& complex, const SignSequence& c);

/// Lexicographically smallest stored top cell having c as a face.
SignSequence container_cell(const CanonicalComplex& complex, const SignSequence& c);

/// Closure of the cell as an LP feasible set: zero entries are equalities,
/// the others strict inequalities in the direction of their sign. Rows are
/// scaled to unit infinity norm; rows that are constant on the region are
/// dropped.
LpProblem cell_constraints(const ReluNetwork& net, const SignSequence& cell);

/// Solves the node-map equations of the zero entries of v, using the affine
/// forms valid on `container`. Throws SingularSystemError.
Eigen::VectorXd vertex_location(const ReluNetwork& net, const SignSequence& v, const SignSequence& container);
Eigen::VectorXd vertex_location(const CanonicalComplex& complex, const SignSequence& v);

/// max of F over the closure of c is finite (LP decision).
bool bounded_above(const CanonicalComplex& complex, const SignSequence& c);

/// The cell closure is a bounded set (LP over +-coordinate directions).
bool is_bounded(const CanonicalComplex& complex, const SignSequence& c);

/// Cells of star(v) on which F attains its maximum at v, in sign order.
std::vector<SignSequence> lower_star(const CanonicalComplex& complex, std::size_t vertex);

}  // namespace relu_morse
