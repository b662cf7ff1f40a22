#pragma once

// Shared fixtures and independent oracles for the test binaries.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <set>
#include <vector>

#include "relu_morse/complex.hpp"
#include "relu_morse/errors.hpp"
#include "relu_morse/network.hpp"

namespace testing_support {

using namespace relu_morse;

struct SampledNet {
    std::uint64_t seed;
    ReluNetwork net;
    CanonicalComplex complex;
};

/// First `count` seeds from `first_seed` upward whose network builds with
/// `options`. Seeds raising a domain error are skipped.
inline std::vector<SampledNet> sample_nets(const std::vector<std::size_t>& dims, std::size_t count,
                                           std::uint64_t first_seed = 0, const BuildOptions& options = {},
                                           std::uint64_t max_tries = 200000, std::size_t* skipped = nullptr) {
    std::vector<SampledNet> out;
    const Architecture arch(dims);
    std::size_t skip = 0;
    for (std::uint64_t s = first_seed; out.size() < count && s < first_seed + max_tries; ++s) {
        auto net = random_network(arch, s);
        try {
            auto c = build_complex(net, options);
            out.push_back(SampledNet{s, net, std::move(c)});
        } catch (const Error&) {
            ++skip;
        }
    }
    if (skipped) *skipped = skip;
    return out;
}

inline Eigen::VectorXd finite_gradient(const ReluNetwork& net, const Eigen::VectorXd& x, double h) {
    Eigen::VectorXd g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Eigen::VectorXd a = x, b = x;
        a(i) += h;
        b(i) -= h;
        g(i) = (net.evaluate(a) - net.evaluate(b)) / (2 * h);
    }
    return g;
}

/// Vertex sign sequences found without the complex: every choice of n0
/// neurons, solved with the affine forms of every +-1 pattern, kept when the
/// solution's observed signs vanish exactly there and agree with the pattern
/// elsewhere.
inline std::set<SignSequence> brute_force_vertices(const ReluNetwork& net) {
    const std::size_t n0 = net.input_dim();
    const std::size_t n = net.total_neurons();
    const auto& arch = net.architecture();
    std::set<SignSequence> found;
    std::vector<std::size_t> pick(n0);
    std::function<void(std::size_t, std::size_t)> choose = [&](std::size_t k, std::size_t from) {
        if (k == n0) {
            for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
                SignSequence pattern(n);
                for (std::size_t p = 0; p < n; ++p) pattern.set(p, (mask >> p) & 1 ? 1 : -1);
                auto form = net.cell_affine_form(pattern);
                Eigen::MatrixXd w(n0, n0);
                Eigen::VectorXd rhs(n0);
                for (std::size_t r = 0; r < n0; ++r) {
                    auto layer = arch.layer_of(pick[r]);
                    auto j = static_cast<Eigen::Index>(pick[r] - arch.layer_offset(layer));
                    w.row(r) = form.node_jacobians[layer - 1].row(j);
                    rhs(r) = -form.node_offsets[layer - 1](j);
                }
                Eigen::FullPivLU<Eigen::MatrixXd> lu(w);
                if (!lu.isInvertible()) continue;
                Eigen::VectorXd x = lu.solve(rhs);
                auto s = net.sign_sequence_at(x, 1e-8);
                bool ok = s.zero_count() == n0;
                for (std::size_t p = 0; p < n && ok; ++p) {
                    bool picked = std::find(pick.begin(), pick.end(), p) != pick.end();
                    ok = picked ? s[p] == 0 : s[p] == pattern[p];
                }
                if (ok) found.insert(s);
            }
            return;
        }
        for (std::size_t p = from; p < n; ++p) {
            pick[k] = p;
            choose(k + 1, p + 1);
        }
    };
    choose(0, 0);
    return found;
}

inline int sign_of(double x) { return (x > 0) - (x < 0); }

}  // namespace testing_support
