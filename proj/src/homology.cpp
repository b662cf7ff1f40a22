#include "relu_morse/homology.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "relu_morse/errors.hpp"

namespace relu_morse {

BitMatrix::BitMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), words_((cols + 63) / 64), bits_(rows * ((cols + 63) / 64), 0) {}

bool BitMatrix::get(std::size_t r, std::size_t c) const {
    return (bits_[r * words_ + c / 64] >> (c % 64)) & 1u;
}

void BitMatrix::set(std::size_t r, std::size_t c, bool value) {
    auto& w = bits_[r * words_ + c / 64];
    const std::uint64_t mask = std::uint64_t{1} << (c % 64);
    w = value ? (w | mask) : (w & ~mask);
}

void BitMatrix::flip(std::size_t r, std::size_t c) { bits_[r * words_ + c / 64] ^= std::uint64_t{1} << (c % 64); }

std::size_t BitMatrix::rank() const {
    auto m = bits_;
    std::size_t rank = 0;
    for (std::size_t c = 0; c < cols_ && rank < rows_; ++c) {
        const std::size_t w = c / 64;
        const std::uint64_t mask = std::uint64_t{1} << (c % 64);
        std::size_t pivot = rows_;
        for (std::size_t r = rank; r < rows_; ++r) {
            if (m[r * words_ + w] & mask) {
                pivot = r;
                break;
            }
        }
        if (pivot == rows_) continue;
        if (pivot != rank)
            for (std::size_t k = 0; k < words_; ++k) std::swap(m[pivot * words_ + k], m[rank * words_ + k]);
        for (std::size_t r = 0; r < rows_; ++r) {
            if (r == rank || !(m[r * words_ + w] & mask)) continue;
            for (std::size_t k = 0; k < words_; ++k) m[r * words_ + k] ^= m[rank * words_ + k];
        }
        ++rank;
    }
    return rank;
}

bool BitMatrix::is_zero() const {
    return std::all_of(bits_.begin(), bits_.end(), [](std::uint64_t w) { return w == 0; });
}

BitMatrix operator*(const BitMatrix& a, const BitMatrix& b) {
    if (a.cols_ != b.rows_) throw ShapeError("bit matrix dimensions do not compose");
    BitMatrix out(a.rows_, b.cols_);
    for (std::size_t r = 0; r < a.rows_; ++r)
        for (std::size_t k = 0; k < a.cols_; ++k)
            if (a.get(r, k))
                for (std::size_t w = 0; w < b.words_; ++w) out.bits_[r * out.words_ + w] ^= b.bits_[k * b.words_ + w];
    return out;
}

bool ChainComplex::boundary_squares_to_zero() const {
    for (std::size_t k = 2; k < boundary.size(); ++k)
        if (!(boundary[k - 1] * boundary[k]).is_zero()) return false;
    return true;
}

namespace {

bool at_or_below(double value, double level) {
    if (std::isinf(value)) return value < 0 || std::isinf(level);
    return value <= level + 1e-7 * std::max(1.0, std::abs(level));
}

/// Chain complex on `keep`, with incidence parities taken from facet lists.
ChainComplex assemble(const CompactifiedComplex& cc, const std::vector<std::size_t>& keep) {
    ChainComplex chain;
    int top = 0;
    for (auto i : keep) top = std::max(top, cc.cell(i).dim);
    chain.cells_by_dim.resize(static_cast<std::size_t>(top) + 1);
    std::map<std::size_t, std::size_t> pos;
    for (auto i : keep) {
        auto& bucket = chain.cells_by_dim[static_cast<std::size_t>(cc.cell(i).dim)];
        pos[i] = bucket.size();
        bucket.push_back(i);
    }
    chain.boundary.emplace_back(0, chain.cells_by_dim[0].size());
    for (std::size_t k = 1; k < chain.cells_by_dim.size(); ++k) {
        BitMatrix b(chain.cells_by_dim[k - 1].size(), chain.cells_by_dim[k].size());
        for (std::size_t col = 0; col < chain.cells_by_dim[k].size(); ++col) {
            for (auto f : cc.cell(chain.cells_by_dim[k][col]).facets) {
                auto it = pos.find(f);
                if (it != pos.end()) b.flip(it->second, col);
            }
        }
        chain.boundary.push_back(std::move(b));
    }
    return chain;
}

BettiVector ranks(const ChainComplex& chain) {
    BettiVector out(chain.cells_by_dim.size(), 0);
    for (std::size_t k = 0; k < chain.cells_by_dim.size(); ++k) {
        std::size_t rk = chain.boundary[k].rank();
        std::size_t rk_next = k + 1 < chain.boundary.size() ? chain.boundary[k + 1].rank() : 0;
        out[k] = chain.cells_by_dim[k].size() - rk - rk_next;
    }
    return out;
}

std::vector<std::size_t> sublevel(const CompactifiedComplex& cc, std::optional<double> level) {
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < cc.size(); ++i)
        if (i == CompactifiedComplex::basepoint || !level || at_or_below(cc.cell(i).f_max, *level)) keep.push_back(i);
    return keep;
}

}  // namespace

ChainComplex chain_complex(const CompactifiedComplex& cc, std::optional<double> level) {
    return assemble(cc, sublevel(cc, level));
}

BettiVector betti(const ChainComplex& chain) { return ranks(chain); }

bool same_ranks(const BettiVector& a, const BettiVector& b) {
    for (std::size_t k = 0; k < std::max(a.size(), b.size()); ++k)
        if ((k < a.size() ? a[k] : 0) != (k < b.size() ? b[k] : 0)) return false;
    return true;
}

BettiVector relative_ranks(const CompactifiedComplex& cc, double level, std::optional<double> lower) {
    auto upper_cells = sublevel(cc, level);
    std::vector<std::size_t> quotient;
    for (auto i : upper_cells) {
        bool killed = i == CompactifiedComplex::basepoint || (lower && at_or_below(cc.cell(i).f_max, *lower));
        if (!killed) quotient.push_back(i);
    }
    BettiVector out(static_cast<std::size_t>(cc.max_dim()) + 1, 0);
    if (quotient.empty()) return out;
    auto r = ranks(assemble(cc, quotient));
    for (std::size_t k = 0; k < r.size(); ++k) out[k] = r[k];
    return out;
}

std::vector<double> vertex_levels(const CompactifiedComplex& cc) {
    std::vector<double> levels;
    for (std::size_t i = 1; i < cc.size(); ++i)
        if (cc.cell(i).dim == 0) levels.push_back(cc.cell(i).f_max);
    std::sort(levels.begin(), levels.end());
    return levels;
}

PerfectnessReport verify_relative_perfectness(const CompactifiedComplex& cc, const Matching& m) {
    PerfectnessReport report;
    const std::size_t dims = static_cast<std::size_t>(cc.max_dim()) + 1;
    std::optional<double> previous;
    for (double level : vertex_levels(cc)) {
        LevelCheck check;
        check.level = level;
        check.previous = previous;
        check.expected = relative_ranks(cc, level, previous);
        check.critical_counts.assign(dims, 0);
        for (const auto& c : m.critical) {
            auto id = cc.find(c);
            if (!id) continue;
            const auto& cell = cc.cell(*id);
            bool above_previous = !previous || !at_or_below(cell.f_max, *previous);
            if (above_previous && at_or_below(cell.f_max, level)) ++check.critical_counts[static_cast<std::size_t>(cell.dim)];
        }
        check.pass = check.expected == check.critical_counts;
        if (!check.pass && !report.first_failure) report.first_failure = level;
        report.levels.push_back(std::move(check));
        previous = level;
    }
    report.pass = !report.first_failure;
    return report;
}

ChainComplex morse_complex(const CompactifiedComplex& cc, const Matching& m) {
    auto acyclic = is_acyclic(m, cc);
    if (!acyclic.acyclic) throw CyclicMatchingError("matching has a closed V-path");

    // Critical cells by dimension, * first.
    std::vector<std::size_t> critical;
    if (m.includes_basepoint) critical.push_back(CompactifiedComplex::basepoint);
    for (const auto& c : m.critical) {
        auto id = cc.find(c);
        if (!id) throw IndexError("critical cell " + c.str() + " is not in the complex");
        critical.push_back(*id);
    }
    std::map<std::size_t, std::size_t> upper_of;  // lower cell -> its upper partner
    for (const auto& [lo, up] : m.pairs) {
        auto l = cc.find(lo);
        auto u = cc.find(up);
        if (!l || !u) throw IndexError("matched cell missing from the complex");
        upper_of.emplace(*l, *u);
    }

    ChainComplex chain;
    int top = 0;
    for (auto i : critical) top = std::max(top, cc.cell(i).dim);
    chain.cells_by_dim.resize(static_cast<std::size_t>(top) + 1);
    std::map<std::size_t, std::size_t> slot;
    for (auto i : critical) {
        auto& bucket = chain.cells_by_dim[static_cast<std::size_t>(cc.cell(i).dim)];
        slot[i] = bucket.size();
        bucket.push_back(i);
    }
    chain.boundary.emplace_back(0, chain.cells_by_dim[0].size());

    for (std::size_t k = 1; k < chain.cells_by_dim.size(); ++k) {
        const std::size_t targets = chain.cells_by_dim[k - 1].size();
        // reach[c]: parity of V-paths from (k-1)-cell c to each critical (k-1)-cell.
        std::map<std::size_t, std::vector<bool>> reach;
        std::function<const std::vector<bool>&(std::size_t)> flow = [&](std::size_t c) -> const std::vector<bool>& {
            if (auto it = reach.find(c); it != reach.end()) return it->second;
            std::vector<bool> acc(targets, false);
            if (auto s = slot.find(c); s != slot.end() && cc.cell(c).dim == static_cast<int>(k - 1)) {
                acc[s->second] = true;
            } else if (auto up = upper_of.find(c); up != upper_of.end()) {
                for (auto f : cc.cell(up->second).facets) {
                    if (f == c) continue;
                    const auto& sub = flow(f);
                    for (std::size_t t = 0; t < targets; ++t) acc[t] = acc[t] != sub[t];
                }
            }
            return reach.emplace(c, std::move(acc)).first->second;
        };
        BitMatrix b(targets, chain.cells_by_dim[k].size());
        for (std::size_t col = 0; col < chain.cells_by_dim[k].size(); ++col) {
            for (auto f : cc.cell(chain.cells_by_dim[k][col]).facets) {
                const auto& sub = flow(f);
                for (std::size_t t = 0; t < targets; ++t)
                    if (sub[t]) b.flip(t, col);
            }
        }
        chain.boundary.push_back(std::move(b));
    }
    return chain;
}

}  // namespace relu_morse
