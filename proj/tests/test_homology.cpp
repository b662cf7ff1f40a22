#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "relu_morse/homology.hpp"
#include "support.hpp"

using namespace relu_morse;
using namespace testing_support;

namespace {

SignSequence S(const char* s) { return SignSequence::parse(s); }

const CanonicalComplex& net_b() {
    static const CanonicalComplex c = build_complex(fixture_net_b());
    return c;
}

std::set<std::string> names(const CompactifiedComplex& cc, const ChainComplex& ch) {
    std::set<std::string> out;
    for (const auto& dim : ch.cells_by_dim)
        for (auto id : dim) out.insert(id == CompactifiedComplex::basepoint ? "*" : cc.cell(id).signs.str());
    return out;
}

// Rank over Z/2 by elimination on rows of bools.
std::size_t naive_rank(std::vector<std::vector<bool>> a) {
    std::size_t rank = 0;
    const std::size_t cols = a.empty() ? 0 : a[0].size();
    for (std::size_t c = 0; c < cols && rank < a.size(); ++c) {
        std::size_t p = rank;
        while (p < a.size() && !a[p][c]) ++p;
        if (p == a.size()) continue;
        std::swap(a[p], a[rank]);
        for (std::size_t r = 0; r < a.size(); ++r)
            if (r != rank && a[r][c])
                for (std::size_t k = 0; k < cols; ++k) a[r][k] = a[r][k] != a[rank][k];
        ++rank;
    }
    return rank;
}

long alternating(const BettiVector& b) {
    long s = 0;
    for (std::size_t i = 0; i < b.size(); ++i) s += (i % 2 == 0 ? 1 : -1) * static_cast<long>(b[i]);
    return s;
}

}  // namespace

TEST_CASE("bit matrix rank against a naive oracle") {
    std::mt19937_64 rng(8);
    std::bernoulli_distribution coin(0.3);
    for (int t = 0; t < 60; ++t) {
        std::size_t rows = 1 + rng() % 9, cols = 1 + rng() % 140;
        BitMatrix m(rows, cols);
        std::vector<std::vector<bool>> a(rows, std::vector<bool>(cols));
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c)
                if (coin(rng)) {
                    m.set(r, c, true);
                    a[r][c] = true;
                }
        CHECK(m.rank() == naive_rank(a));
    }
    BitMatrix z(3, 70);
    CHECK(z.is_zero());
    z.flip(2, 69);
    CHECK(z.get(2, 69));
    CHECK_FALSE(z.is_zero());
}

TEST_CASE("betti numbers of small hand-built complexes") {
    ChainComplex point;
    point.cells_by_dim = {{0}};
    point.boundary = {BitMatrix(0, 1)};
    CHECK(betti(point) == BettiVector{1});

    // Hollow square: vertices 0..3, edge k joins k and k+1 mod 4.
    ChainComplex square;
    square.cells_by_dim = {{0, 1, 2, 3}, {4, 5, 6, 7}};
    BitMatrix d1(4, 4);
    for (std::size_t k = 0; k < 4; ++k) {
        d1.set(k, k, true);
        d1.set((k + 1) % 4, k, true);
    }
    square.boundary = {BitMatrix(0, 4), d1};
    CHECK(square.boundary_squares_to_zero());
    CHECK(betti(square) == BettiVector{1, 1});

    CHECK(same_ranks({1, 0, 0}, {1}));
    CHECK_FALSE(same_ranks({1, 0, 1}, {1}));
}

TEST_CASE("sublevel complexes of NET-B") {
    auto cc = compactify(net_b());
    auto full = chain_complex(cc);
    CHECK(names(cc, full).size() == 8);
    CHECK(full.boundary_squares_to_zero());
    CHECK(same_ranks(betti(full), {2, 0, 0}));
    CHECK(names(cc, chain_complex(cc, 1.0)) == std::set<std::string>{"*", "+00"});
    CHECK(names(cc, chain_complex(cc, 2.0)) == std::set<std::string>{"*", "+00", "0+0", "++0"});
    CHECK(vertex_levels(cc) == std::vector<double>{1.0, 2.0, 4.0});
}

TEST_CASE("relative ranks on NET-B") {
    auto cc = compactify(net_b());
    CHECK(same_ranks(relative_ranks(cc, 1.0, std::nullopt), {1}));
    CHECK(same_ranks(relative_ranks(cc, 2.0, 1.0), {}));
    CHECK(same_ranks(relative_ranks(cc, 4.0, 2.0), {}));
}

TEST_CASE("relative perfectness") {
    auto cc = compactify(net_b());
    auto m = build_dgvf(net_b());
    auto r = verify_relative_perfectness(cc, m);
    CHECK(r.pass);
    REQUIRE(r.levels.size() == 3);
    CHECK(same_ranks(r.levels[0].critical_counts, {1}));
    CHECK(same_ranks(r.levels[1].critical_counts, {}));
    CHECK(same_ranks(r.levels[2].critical_counts, {}));

    auto neg = build_complex(negate_output(fixture_net_b()));
    auto ncc = compactify(neg);
    auto nr = verify_relative_perfectness(ncc, build_dgvf(neg));
    CHECK(nr.pass);
    bool index_two = false;
    for (const auto& l : nr.levels) index_two = index_two || same_ranks(l.critical_counts, {0, 0, 1});
    CHECK(index_two);

    auto broken = verify_relative_perfectness(cc, drop_pair(m, 0));
    CHECK_FALSE(broken.pass);
    REQUIRE(broken.first_failure);
    // Dropping (00+, +0+) adds critical cells at the level of 00+.
    CHECK(*broken.first_failure == doctest::Approx(4.0));
}

TEST_CASE("Morse complexes") {
    auto cc = compactify(net_b());
    auto mc = morse_complex(cc, build_dgvf(net_b()));
    CHECK(mc.cells_by_dim.at(0).size() == 2);
    CHECK(mc.cells_by_dim.at(0).front() == CompactifiedComplex::basepoint);
    CHECK(same_ranks(betti(mc), {2}));

    auto neg = build_complex(negate_output(fixture_net_b()));
    auto ncc = compactify(neg);
    auto nmc = morse_complex(ncc, build_dgvf(neg));
    CHECK(same_ranks(betti(nmc), {1, 0, 1}));
    CHECK(same_ranks(betti(nmc), betti(chain_complex(ncc))));

    // A single critical 0-cell: only * when every cell is paired.
    std::vector<CompactCell> cells{{S("0"), 0, 0.0, {}}, {S("+"), 1, 1.0, {0, 1}}};
    auto line = CompactifiedComplex::from_cells(cells);
    Matching one;
    one.pairs = {{S("0"), S("+")}};
    one.normalize();
    CHECK(same_ranks(betti(morse_complex(line, one)), {1}));

    // A cyclic field has no Morse complex.
    std::vector<CompactCell> bigon{
        {S("0-"), 0, 0.0, {}}, {S("0+"), 0, 0.0, {}}, {S("+-"), 1, 0.0, {1, 2}}, {S("++"), 1, 0.0, {1, 2}}};
    Matching cyc;
    cyc.pairs = {{S("0-"), S("+-")}, {S("0+"), S("++")}};
    cyc.normalize();
    CHECK_THROWS_AS(morse_complex(CompactifiedComplex::from_cells(bigon), cyc), CyclicMatchingError);
}

TEST_CASE("homological invariants on random nets") {
    for (auto dims : std::vector<std::vector<std::size_t>>{{2, 3}, {2, 4}, {2, 5}, {2, 3, 2}, {3, 4}}) {
        for (const auto& s : sample_nets(dims, 8)) {
            INFO("dims " << dims.size() << " seed " << s.seed);
            const auto& c = s.complex;
            auto classes = classify_all(c);
            auto m = build_dgvf(c, classes);
            auto cc = compactify(c);
            auto full = chain_complex(cc);
            auto mc = morse_complex(cc, m);
            CHECK(full.boundary_squares_to_zero());
            CHECK(mc.boundary_squares_to_zero());
            auto b = betti(full);
            CHECK(same_ranks(b, betti(mc)));

            auto report = verify_relative_perfectness(cc, m);
            CHECK(report.pass);

            // Level-wise: zero at regular vertices, a unit in degree k at Critical(k).
            BettiVector totals(static_cast<std::size_t>(cc.max_dim()) + 1, 0);
            for (const auto& l : report.levels) {
                BettiVector predicted(totals.size(), 0);
                for (const auto& cls : classes)
                    if (std::abs(c.vertex(cls.vertex).value - l.level) < 1e-9 && cls.kind == VertexKind::Critical)
                        ++predicted[static_cast<std::size_t>(cls.index)];
                CHECK(same_ranks(l.expected, predicted));
                for (std::size_t i = 0; i < l.critical_counts.size(); ++i) totals[i] += l.critical_counts[i];
            }
            BettiVector critical(totals.size(), 0);
            for (const auto& k : m.critical) ++critical[static_cast<std::size_t>(cc.cell(*cc.find(k)).dim)];
            CHECK(same_ranks(totals, critical));
            CHECK(alternating(b) == alternating(critical) + 1);  // + the basepoint
        }
    }
}
