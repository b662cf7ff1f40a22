#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "relu_morse/dgvf.hpp"

namespace relu_morse {

/// Dense matrix over Z/2, one bit-packed row per row.
class BitMatrix {
public:
    BitMatrix() = default;
    BitMatrix(std::size_t rows, std::size_t cols);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool get(std::size_t r, std::size_t c) const;
    void set(std::size_t r, std::size_t c, bool value);
    void flip(std::size_t r, std::size_t c);

    std::size_t rank() const;
    bool is_zero() const;
    friend BitMatrix operator*(const BitMatrix& a, const BitMatrix& b);

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::size_t words_ = 0;
    std::vector<std::uint64_t> bits_;
};

/// Cellular chain complex over Z/2. boundary[k] maps k-chains to
/// (k-1)-chains: rows index cells_by_dim[k-1], columns cells_by_dim[k].
/// boundary[0] is an empty 0 x |cells_by_dim[0]| matrix.
struct ChainComplex {
    std::vector<std::vector<std::size_t>> cells_by_dim;
    std::vector<BitMatrix> boundary;

    std::size_t top_dim() const { return cells_by_dim.empty() ? 0 : cells_by_dim.size() - 1; }
    bool boundary_squares_to_zero() const;
};

/// Ranks of homology per dimension.
using BettiVector = std::vector<std::size_t>;

/// Cells with f_max <= level (all cells when level is empty); * is always
/// present. Cell ids are indices into cc.
ChainComplex chain_complex(const CompactifiedComplex& cc, std::optional<double> level = std::nullopt);

BettiVector betti(const ChainComplex& chain);

/// Equality up to trailing zero ranks.
bool same_ranks(const BettiVector& a, const BettiVector& b);

/// Ranks of H_*(C_level, C_lower) via the quotient complex. An empty
/// `lower` means the subcomplex {*}.
BettiVector relative_ranks(const CompactifiedComplex& cc, double level, std::optional<double> lower);

struct LevelCheck {
    double level = 0.0;
    std::optional<double> previous;
    BettiVector expected;         // relative homology ranks
    BettiVector critical_counts;  // critical cells with f_max in (previous, level]
    bool pass = false;
};

struct PerfectnessReport {
    std::vector<LevelCheck> levels;
    bool pass = false;
    /// Level of the first failure, if any.
    std::optional<double> first_failure;
};

/// Compares per-level critical counts with relative homology at every
/// distinct vertex value.
PerfectnessReport verify_relative_perfectness(const CompactifiedComplex& cc, const Matching& m);

/// Chain complex on the critical cells (* first among 0-cells) whose
/// boundary counts V-paths mod 2. Throws CyclicMatchingError.
ChainComplex morse_complex(const CompactifiedComplex& cc, const Matching& m);

/// Vertex values of the compactified complex (the 0-cells other than *), ascending.
std::vector<double> vertex_levels(const CompactifiedComplex& cc);

}  // namespace relu_morse
