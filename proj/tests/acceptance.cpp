// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "orientation_checks.hpp"
#include "relu_morse/homology.hpp"
#include "support.hpp"

using namespace relu_morse;
using namespace testing_support;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
    std::size_t checked = 0;
    std::vector<std::string> violations;

    void fail(std::string what) { violations.push_back(std::move(what)); }
    void merge(const std::vector<std::string>& v, const std::string& prefix) {
        for (const auto& s : v) fail(prefix + s);
    }
};

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail, const Verdict* v = nullptr) {
    std::cout << "criterion " << id << " " << (pass ? "PASS" : "FAIL") << "  " << name << ": " << detail << "\n";
    if (v)
        for (std::size_t i = 0; i < v->violations.size() && i < 5; ++i) std::cout << "    " << v->violations[i] << "\n";
    failures += !pass;
}

std::string tag(const std::vector<std::size_t>& dims, std::uint64_t seed) {
    std::ostringstream s;
    s << "(";
    for (auto d : dims) s << d << ",";
    s << "1) seed " << seed << ": ";
    return s.str();
}

// Criterion 1.
void closed_form_counts(std::vector<SampledNet>& planar) {
    Verdict v;
    double slowest = 0.0;
    std::size_t skipped_total = 0;
    for (std::size_t n : {3, 4, 5}) {
        std::size_t skipped = 0;
        auto nets = sample_nets({2, n}, 20, 0, {}, 200000, &skipped);
        skipped_total += skipped;
        if (nets.size() != 20) v.fail("only " + std::to_string(nets.size()) + " nets for n=" + std::to_string(n));
        for (auto& s : nets) {
            auto t0 = Clock::now();
            auto c = build_complex(s.net);
            slowest = std::max(slowest, seconds_since(t0));
            std::size_t rays = 0, open = 0;
            for (auto i : c.cells_of_dim(1)) rays += c.cell(i).vertices.size() < 2;
            for (auto i : c.cells_of_dim(2)) open += !is_bounded(c, c.cell(i).signs);
            const auto pre = tag({2, n}, s.seed);
            if (c.vertices().size() != n * (n - 1) / 2) v.fail(pre + "vertex count");
            if (rays != 2 * n) v.fail(pre + "unbounded edge count");
            if (open != 2 * n) v.fail(pre + "unbounded 2-cell count");
            ++v.checked;
            planar.push_back(std::move(s));
        }
    }
    if (slowest >= 1.0) v.fail("slowest build took " + std::to_string(slowest) + " s");
    char buf[160];
    std::snprintf(buf, sizeof buf, "%zu nets, %zu violations, slowest build %.4f s, %zu seeds skipped", v.checked,
                  v.violations.size(), slowest, skipped_total);
    report(1, "closed-form counts", v.violations.empty() && v.checked == 60, buf, &v);
}

// Criterion 2.
void shallow_classes(std::vector<SampledNet>& planar) {
    auto t0 = Clock::now();
    Verdict v;
    std::size_t skipped = 0;
    auto nets = sample_nets({2, 3}, 200, 0, {}, 200000, &skipped);
    std::map<int, int> classes;
    for (auto& s : nets) {
        const auto pre = tag({2, 3}, s.seed);
        try {
            auto r = analyze_shallow(s.complex);
            v.merge(r.violations, pre);
            if (r.orientation_class < 1 || r.orientation_class > 4) v.fail(pre + "no class");
            if (r.critical.size() > 1) v.fail(pre + "several critical vertices");
            for (const auto& c : r.critical)
                if (c.index != 0 && c.index != 2) v.fail(pre + "critical index " + std::to_string(c.index));
            if (!r.unbounded_edges_agree) v.fail(pre + "unbounded edges disagree");
            ++classes[r.orientation_class];
        } catch (const Error& e) {
            v.fail(pre + e.what());
        }
        ++v.checked;
        planar.push_back(std::move(s));
    }
    const double t = seconds_since(t0);
    if (t >= 30.0) v.fail("took " + std::to_string(t) + " s");
    char buf[200];
    std::snprintf(buf, sizeof buf, "%zu nets (classes 1:%d 2:%d 3:%d 4:%d), %zu violations, %.2f s, %zu seeds skipped",
                  v.checked, classes[1], classes[2], classes[3], classes[4], v.violations.size(), t, skipped);
    report(2, "shallow classification", v.violations.empty() && v.checked == 200, buf, &v);
}

// Criterion 3.
void net_b_regression() {
    Verdict v;
    auto c = build_complex(fixture_net_b());
    auto classes = classify_all(c);
    auto m = build_dgvf(c, classes);
    auto cc = compactify(c);

    std::vector<std::string> crit;
    for (const auto& cls : classes) {
        if (cls.kind != VertexKind::Critical) continue;
        const auto& rec = c.vertex(cls.vertex);
        crit.push_back(cls.signs.str());
        if (cls.index != 0) v.fail("index " + std::to_string(cls.index));
        if ((rec.location - Eigen::Vector2d(1, 0)).norm() > 1e-12) v.fail("critical vertex location");
        if (std::abs(rec.value - 1.0) > 1e-12) v.fail("critical value");
    }
    if (crit != std::vector<std::string>{"+00"}) v.fail("critical vertices");
    if (!m.includes_basepoint || m.critical != std::vector<SignSequence>{SignSequence::parse("+00")})
        v.fail("critical cells");

    std::set<std::pair<std::string, std::string>> pairs;
    for (const auto& [a, b] : m.pairs) pairs.emplace(a.str(), b.str());
    const std::set<std::pair<std::string, std::string>> expected{{"00+", "+0+"}, {"0++", "+++"}, {"0+0", "++0"}};
    if (pairs != expected) v.fail("pairs");

    auto r = verify_relative_perfectness(cc, m);
    if (!r.pass) v.fail("relative perfectness");
    if (r.levels.size() != 3) v.fail(std::to_string(r.levels.size()) + " levels");
    report(3, "NET-B regression", v.violations.empty(),
           "critical {*, +00 at (1,0), F=1}, 3 pairs, perfectness at " + std::to_string(r.levels.size()) + " levels",
           &v);
}

struct DgvfNet {
    std::vector<std::size_t> dims;
    SampledNet sample;
};

// Criteria 4 to 7 share the nets.
void dgvf_criteria(std::vector<DgvfNet>& nets) {
    auto t0 = Clock::now();
    std::size_t skipped_total = 0;
    Verdict sampling;
    for (auto dims : std::vector<std::vector<std::size_t>>{{2, 3}, {2, 4}, {2, 5}, {2, 3, 2}, {3, 4}}) {
        std::size_t skipped = 0;
        auto got = sample_nets(dims, 40, 0, {}, 200000, &skipped);
        skipped_total += skipped;
        if (got.size() != 40) sampling.fail(tag(dims, 0) + "only " + std::to_string(got.size()) + " nets");
        for (auto& s : got) nets.push_back({dims, std::move(s)});
    }

    Verdict validity, perfect, morse, local;
    for (const auto& [dims, s] : nets) {
        const auto pre = tag(dims, s.seed);
        const auto& c = s.complex;
        try {
            auto classes = classify_all(c);
            auto m = build_dgvf(c, classes);
            auto cc = compactify(c);
            std::map<std::size_t, const VertexClassification*> by_vertex;
            for (const auto& cls : classes) by_vertex[cls.vertex] = &cls;

            // 4: validity, acyclicity, critical cells <-> critical vertices.
            validity.merge(validate_matching(m, cc), pre);
            if (!is_acyclic(m, cc).acyclic) validity.fail(pre + "closed V-path");
            if (!m.includes_basepoint) validity.fail(pre + "basepoint missing");
            std::map<SignSequence, int> owners;
            for (const auto& k : m.critical) {
                const auto& cell = c.at(k);
                const auto owner = cell.owner.value();
                owners[c.vertex(owner).signs] += 1;
                const auto& cls = *by_vertex.at(owner);
                if (cls.kind != VertexKind::Critical || cls.index != cell.dim)
                    validity.fail(pre + "critical cell " + k.str() + " at a non-matching vertex");
            }
            std::size_t crit_vertices = 0;
            for (const auto& cls : classes)
                if (cls.kind == VertexKind::Critical) {
                    ++crit_vertices;
                    if (owners[cls.signs] != 1) validity.fail(pre + "vertex " + cls.signs.str() + " lacks one critical cell");
                }
            if (crit_vertices != m.critical.size()) validity.fail(pre + "critical count");
            ++validity.checked;

            // 5: relative perfectness.
            auto r = verify_relative_perfectness(cc, m);
            if (!r.pass) perfect.fail(pre + "fails at level " + std::to_string(r.first_failure.value_or(0.0)));
            ++perfect.checked;

            // 6: Morse homology.
            if (!same_ranks(betti(morse_complex(cc, m)), betti(chain_complex(cc)))) morse.fail(pre + "Betti mismatch");
            ++morse.checked;

            // 7: local pairing.
            for (const auto& cell : c.cells()) {
                if (!cell.bounded_above.value()) continue;
                auto a = local_pair(c.net(), cell.signs);
                if (a.partner != m.partner(cell.signs) || a.owner != c.vertex(cell.owner.value()).signs)
                    local.fail(pre + "cell " + cell.signs.str());
                ++local.checked;
            }
        } catch (const Error& e) {
            validity.fail(pre + e.kind() + ": " + e.what());
        }
    }
    const double t = seconds_since(t0);
    if (t >= 300.0) validity.fail("took " + std::to_string(t) + " s");
    validity.violations.insert(validity.violations.begin(), sampling.violations.begin(), sampling.violations.end());

    char buf[200];
    std::snprintf(buf, sizeof buf, "%zu nets, %zu violations, %.2f s including sampling, %zu seeds skipped",
                  validity.checked, validity.violations.size(), t, skipped_total);
    report(4, "DGVF validity", validity.violations.empty() && validity.checked == 200, buf, &validity);
    std::snprintf(buf, sizeof buf, "%zu nets, %zu violations", perfect.checked, perfect.violations.size());
    report(5, "relative perfectness", perfect.violations.empty() && perfect.checked == 200, buf, &perfect);
    std::snprintf(buf, sizeof buf, "%zu nets, %zu violations", morse.checked, morse.violations.size());
    report(6, "Morse homology", morse.violations.empty() && morse.checked == 200, buf, &morse);
    std::snprintf(buf, sizeof buf, "%zu cells, %zu disagreements", local.checked, local.violations.size());
    report(7, "local/global pairing", local.violations.empty() && local.checked > 0, buf, &local);
}

// Criterion 8.
void gradients(const std::vector<const SampledNet*>& nets) {
    Verdict cells, steps;
    double worst = 0.0;
    for (const auto* s : nets) {
        const auto& c = s->complex;
        const auto& net = c.net();
        const auto n0 = static_cast<int>(c.input_dim());
        for (auto i : c.cells_of_dim(n0)) {
            const auto& cell = c.cell(i);
            // Keep both probes inside the cell.
            const double h = std::min(1e-5, 0.1 * cell.interior_slack);
            auto g = net.cell_affine_form(cell.signs).total_gradient;
            auto fd = finite_gradient(net, cell.interior, h);
            const double rel = (g - fd).norm() / std::max(1.0, g.norm());
            worst = std::max(worst, rel);
            if (rel > 1e-6) cells.fail("seed " + std::to_string(s->seed) + " cell " + cell.signs.str());
            ++cells.checked;
        }
        for (std::size_t v = 0; v < c.vertices().size(); ++v) {
            const auto& rec = c.vertex(v);
            for (const auto& e : cofacets(c, rec.signs)) {
                auto d = edge_direction(c, v, e);
                if (net.sign_sequence_at(rec.location + 1e-4 * d, 1e-12) != e)
                    steps.fail("seed " + std::to_string(s->seed) + " edge " + e.str() + " from " + rec.signs.str());
                ++steps.checked;
            }
        }
    }
    Verdict all;
    all.violations = cells.violations;
    all.violations.insert(all.violations.end(), steps.violations.begin(), steps.violations.end());
    char buf[200];
    std::snprintf(buf, sizeof buf, "%zu top cells (worst relative error %.2e), %zu edge steps, %zu violations",
                  cells.checked, worst, steps.checked, all.violations.size());
    report(8, "analytic gradients", all.violations.empty(), buf, &all);
}

// Criterion 9.
void structure(const std::vector<const SampledNet*>& nets) {
    Verdict v;
    for (const auto* s : nets) {
        const auto& c = s->complex;
        if (c.input_dim() != 2) continue;
        try {
            auto field = orientation_field(c);
            v.merge(structural_violations(c, field), "seed " + std::to_string(s->seed) + ": ");
        } catch (const Error& e) {
            v.fail("seed " + std::to_string(s->seed) + ": " + e.what());
        }
        ++v.checked;
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "%zu 2-D nets, %zu violations", v.checked, v.violations.size());
    report(9, "orientation structure", v.violations.empty(), buf, &v);
}

}  // namespace

int main() {
    std::vector<SampledNet> planar;
    closed_form_counts(planar);
    shallow_classes(planar);
    net_b_regression();
    std::vector<DgvfNet> dgvf_nets;
    dgvf_criteria(dgvf_nets);

    static const SampledNet net_b{0, fixture_net_b(), build_complex(fixture_net_b())};
    std::vector<const SampledNet*> all{&net_b};
    for (const auto& s : planar) all.push_back(&s);
    for (const auto& d : dgvf_nets) all.push_back(&d.sample);
    gradients(all);
    structure(all);

    std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + " criteria fail") << "\n";
    return failures == 0 ? 0 : 1;
}
