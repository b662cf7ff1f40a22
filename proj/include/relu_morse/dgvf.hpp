#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "relu_morse/complex.hpp"
#include "relu_morse/orientation.hpp"

namespace relu_morse {

using CellPair = std::pair<SignSequence, SignSequence>;  // (lower, upper)

/// A discrete vector field on the compactified complex. The basepoint is
/// not listed in `critical`; `includes_basepoint` records it.
struct Matching {
    std::vector<CellPair> pairs;        // sorted by lower cell
    std::vector<SignSequence> critical;  // sorted
    bool includes_basepoint = true;

    void normalize();
    std::optional<SignSequence> partner(const SignSequence& c) const;
};

/// Copy of m with pair `index` removed; both of its cells become critical.
Matching drop_pair(Matching m, std::size_t index);

/// Alternating sequence C0, D0, C1, D1, ... of a V-path.
struct VPath {
    std::vector<SignSequence> sequence;
    bool closed = false;
};

struct CompactCell {
    SignSequence signs;  // empty for the basepoint
    int dim = 0;
    double f_max = 0.0;
    /// Indices of codimension-one faces; the basepoint may occur twice.
    std::vector<std::size_t> facets;
};

/// Bounded-above cells of C(F) plus the basepoint * at index 0 with value
/// -inf. Remaining cells are sorted by sign sequence.
class CompactifiedComplex {
public:
    static constexpr std::size_t basepoint = 0;

    /// Cells must not include the basepoint; facet indices refer to the
    /// final numbering, with 0 meaning *.
    static CompactifiedComplex from_cells(std::vector<CompactCell> cells);

    const std::vector<CompactCell>& cells() const { return cells_; }
    const CompactCell& cell(std::size_t i) const { return cells_.at(i); }
    std::size_t size() const { return cells_.size(); }
    std::optional<std::size_t> find(const SignSequence& s) const;
    int max_dim() const;

private:
    std::vector<CompactCell> cells_;
    std::map<SignSequence, std::size_t> index_;
};

CompactifiedComplex compactify(const CanonicalComplex& complex);

/// Combinatorial pairing rules shared by the global and local constructions.
struct PairAssignment {
    enum class Role { Lower, Upper, Critical };
    Role role = Role::Critical;
    std::optional<SignSequence> partner;
    SignSequence owner;  // vertex whose lower star holds the cell
};

/// Regular vertex: flip the flow-axis entry between 0 and sigma.
PairAssignment assign_regular(const SignSequence& cell, std::size_t flow_axis, std::int8_t sigma);
/// Critical vertex with the given descending axes (Γ order) and selection
/// sign +1 on each. Throws IncompletePairingError when the cell is nonzero on
/// a non-descending zero entry of `vertex`.
PairAssignment assign_critical(const SignSequence& vertex, const SignSequence& cell,
                               const std::vector<std::size_t>& descending_axes);

std::vector<CellPair> pair_lower_star_regular(const CanonicalComplex& complex, const VertexClassification& cls);

struct CriticalPairing {
    std::vector<CellPair> pairs;
    SignSequence critical;
};
CriticalPairing pair_lower_star_critical(const CanonicalComplex& complex, const VertexClassification& cls);

/// Union of the lower-star pairings of every vertex, plus *.
Matching build_dgvf(const CanonicalComplex& complex);
Matching build_dgvf(const CanonicalComplex& complex, const std::vector<VertexClassification>& classes);

/// Violated matching invariants (empty when valid).
std::vector<std::string> validate_matching(const Matching& m, const CompactifiedComplex& cc);

struct AcyclicityResult {
    bool acyclic = true;
    VPath witness;  // a closed V-path when not acyclic
};
AcyclicityResult is_acyclic(const Matching& m, const CompactifiedComplex& cc);

/// Pairing of one bounded-above cell computed from the network alone: the
/// LP maximizer of F on the cell gives the owner vertex, directional
/// derivatives at it give its type. Throws UnboundedCellError.
PairAssignment local_pair(const ReluNetwork& net, const SignSequence& cell, const Tolerances& tol = {});

}  // namespace relu_morse
