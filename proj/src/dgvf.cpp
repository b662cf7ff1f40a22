#include "relu_morse/dgvf.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "relu_morse/errors.hpp"

namespace relu_morse {

void Matching::normalize() {
    std::sort(pairs.begin(), pairs.end());
    std::sort(critical.begin(), critical.end());
}

std::optional<SignSequence> Matching::partner(const SignSequence& c) const {
    for (const auto& [lo, up] : pairs) {
        if (lo == c) return up;
        if (up == c) return lo;
    }
    return std::nullopt;
}

Matching drop_pair(Matching m, std::size_t index) {
    if (index >= m.pairs.size()) throw IndexError("matching has no pair " + std::to_string(index));
    auto [lo, up] = m.pairs[index];
    m.pairs.erase(m.pairs.begin() + static_cast<std::ptrdiff_t>(index));
    m.critical.push_back(lo);
    m.critical.push_back(up);
    m.normalize();
    return m;
}

CompactifiedComplex CompactifiedComplex::from_cells(std::vector<CompactCell> cells) {
    CompactifiedComplex cc;
    CompactCell star;
    star.f_max = -std::numeric_limits<double>::infinity();
    cc.cells_.push_back(std::move(star));
    for (auto& c : cells) {
        if (c.signs.empty()) throw ShapeError("only the basepoint may have an empty sign sequence");
        if (!cc.index_.emplace(c.signs, cc.cells_.size()).second)
            throw ShapeError("duplicate cell " + c.signs.str());
        cc.cells_.push_back(std::move(c));
    }
    for (const auto& c : cc.cells_)
        for (auto f : c.facets)
            if (f >= cc.cells_.size()) throw IndexError("facet index out of range in " + c.signs.str());
    return cc;
}

std::optional<std::size_t> CompactifiedComplex::find(const SignSequence& s) const {
    if (s.empty()) return basepoint;
    auto it = index_.find(s);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

int CompactifiedComplex::max_dim() const {
    int d = 0;
    for (const auto& c : cells_) d = std::max(d, c.dim);
    return d;
}

CompactifiedComplex compactify(const CanonicalComplex& complex) {
    std::vector<SignSequence> kept;
    for (const auto& c : complex.cells())
        if (c.bounded_above.value_or(false)) kept.push_back(c.signs);
    std::map<SignSequence, std::size_t> id;
    for (std::size_t i = 0; i < kept.size(); ++i) id.emplace(kept[i], i + 1);

    std::vector<CompactCell> cells;
    cells.reserve(kept.size());
    for (const auto& s : kept) {
        const auto& src = complex.at(s);
        CompactCell c;
        c.signs = s;
        c.dim = src.dim;
        c.f_max = src.sup_value;
        for (const auto& f : facets(complex, s)) {
            auto it = id.find(f);
            if (it == id.end()) throw NumericalInstability("facet " + f.str() + " of " + s.str() + " is unbounded above");
            c.facets.push_back(it->second);
        }
        // Rays end at *, full lines reach it at both ends.
        if (c.dim == 1)
            for (auto k = src.vertices.size(); k < 2; ++k) c.facets.push_back(CompactifiedComplex::basepoint);
        cells.push_back(std::move(c));
    }
    return CompactifiedComplex::from_cells(std::move(cells));
}

PairAssignment assign_regular(const SignSequence& cell, std::size_t flow_axis, std::int8_t sigma) {
    PairAssignment a;
    if (cell[flow_axis] == 0) {
        SignSequence up = cell;
        up.set(flow_axis, sigma);
        a.role = PairAssignment::Role::Lower;
        a.partner = std::move(up);
    } else if (cell[flow_axis] == sigma) {
        SignSequence down = cell;
        down.set(flow_axis, 0);
        a.role = PairAssignment::Role::Upper;
        a.partner = std::move(down);
    } else {
        throw IncompletePairingError("cell " + cell.str() + " lies on the ascending side of the flow axis");
    }
    return a;
}

PairAssignment assign_critical(const SignSequence& vertex, const SignSequence& cell,
                               const std::vector<std::size_t>& descending_axes) {
    for (auto p : vertex.zero_positions()) {
        bool descending = std::find(descending_axes.begin(), descending_axes.end(), p) != descending_axes.end();
        if (!descending && cell[p] != 0)
            throw IncompletePairingError("cell " + cell.str() + " leaves " + vertex.str() + " along an ascending axis");
    }
    PairAssignment a;
    for (auto axis : descending_axes) {
        if (cell[axis] == -1) continue;
        SignSequence partner = cell;
        if (cell[axis] == 0) {
            partner.set(axis, 1);
            a.role = PairAssignment::Role::Lower;
        } else {
            partner.set(axis, 0);
            a.role = PairAssignment::Role::Upper;
        }
        a.partner = std::move(partner);
        return a;
    }
    a.role = PairAssignment::Role::Critical;
    return a;
}

namespace {

std::vector<CellPair> collect_pairs(const SignSequence& vertex, const std::vector<SignSequence>& lower,
                                    const std::vector<PairAssignment>& roles, std::vector<SignSequence>& critical) {
    std::set<SignSequence> members(lower.begin(), lower.end());
    std::vector<CellPair> pairs;
    std::size_t uppers = 0;
    for (std::size_t i = 0; i < lower.size(); ++i) {
        const auto& a = roles[i];
        if (a.role == PairAssignment::Role::Critical) {
            critical.push_back(lower[i]);
            continue;
        }
        if (!members.count(*a.partner))
            throw IncompletePairingError("partner " + a.partner->str() + " of " + lower[i].str() +
                                         " is not in the lower star of " + vertex.str());
        if (a.role == PairAssignment::Role::Lower) pairs.emplace_back(lower[i], *a.partner);
        else ++uppers;
    }
    if (uppers != pairs.size())
        throw IncompletePairingError("inconsistent pairing in the lower star of " + vertex.str());
    return pairs;
}

}  // namespace

std::vector<CellPair> pair_lower_star_regular(const CanonicalComplex& complex, const VertexClassification& cls) {
    if (cls.kind != VertexKind::Regular || !cls.flow_axis)
        throw IncompletePairingError("vertex " + cls.signs.str() + " has no flow axis");
    auto lower = lower_star(complex, cls.vertex);
    std::vector<PairAssignment> roles;
    for (const auto& c : lower) roles.push_back(assign_regular(c, *cls.flow_axis, cls.flow_sign));
    std::vector<SignSequence> critical;
    auto pairs = collect_pairs(cls.signs, lower, roles, critical);
    if (!critical.empty()) throw IncompletePairingError("regular vertex " + cls.signs.str() + " left cells unpaired");
    return pairs;
}

CriticalPairing pair_lower_star_critical(const CanonicalComplex& complex, const VertexClassification& cls) {
    if (cls.kind != VertexKind::Critical) throw IncompletePairingError("vertex " + cls.signs.str() + " is regular");
    auto lower = lower_star(complex, cls.vertex);
    std::vector<PairAssignment> roles;
    for (const auto& c : lower) roles.push_back(assign_critical(cls.signs, c, cls.descending_axes));
    std::vector<SignSequence> critical;
    CriticalPairing out;
    out.pairs = collect_pairs(cls.signs, lower, roles, critical);
    if (critical.size() != 1)
        throw IncompletePairingError("critical vertex " + cls.signs.str() + " left " + std::to_string(critical.size()) +
                                     " cells unpaired");
    out.critical = critical.front();
    if (static_cast<int>(complex.at(out.critical).dim) != cls.index)
        throw IncompletePairingError("critical cell " + out.critical.str() + " has the wrong dimension");
    return out;
}

Matching build_dgvf(const CanonicalComplex& complex) { return build_dgvf(complex, classify_all(complex)); }

Matching build_dgvf(const CanonicalComplex& complex, const std::vector<VertexClassification>& classes) {
    Matching m;
    m.includes_basepoint = true;
    for (const auto& cls : classes) {
        if (cls.kind == VertexKind::Regular) {
            auto p = pair_lower_star_regular(complex, cls);
            m.pairs.insert(m.pairs.end(), p.begin(), p.end());
        } else {
            auto p = pair_lower_star_critical(complex, cls);
            m.pairs.insert(m.pairs.end(), p.pairs.begin(), p.pairs.end());
            m.critical.push_back(p.critical);
        }
    }
    m.normalize();

    std::size_t covered = 2 * m.pairs.size() + m.critical.size();
    std::size_t expected = 0;
    for (const auto& c : complex.cells()) expected += c.bounded_above.value_or(false);
    if (covered != expected)
        throw IncompletePairingError("matching covers " + std::to_string(covered) + " of " + std::to_string(expected) +
                                     " bounded-above cells");
    return m;
}

std::vector<std::string> validate_matching(const Matching& m, const CompactifiedComplex& cc) {
    std::vector<std::string> out;
    std::map<SignSequence, int> seen;
    auto note = [&](const SignSequence& s) {
        if (!cc.find(s)) out.push_back("cell " + s.str() + " is not in the compactified complex");
        if (++seen[s] == 2) out.push_back("cell " + s.str() + " is used more than once");
    };
    for (const auto& [lo, up] : m.pairs) {
        note(lo);
        note(up);
        auto li = cc.find(lo);
        auto ui = cc.find(up);
        if (!li || !ui) continue;
        if (cc.cell(*ui).dim != cc.cell(*li).dim + 1)
            out.push_back("pair (" + lo.str() + ", " + up.str() + ") does not step dimension by one");
        const auto& f = cc.cell(*ui).facets;
        if (std::find(f.begin(), f.end(), *li) == f.end())
            out.push_back("pair (" + lo.str() + ", " + up.str() + ") is not a facet incidence");
    }
    for (const auto& c : m.critical) note(c);
    for (std::size_t i = 1; i < cc.size(); ++i)
        if (!seen.count(cc.cell(i).signs)) out.push_back("cell " + cc.cell(i).signs.str() + " is not covered");
    if (!m.includes_basepoint) out.push_back("basepoint is not critical");
    return out;
}

AcyclicityResult is_acyclic(const Matching& m, const CompactifiedComplex& cc) {
    // Graph on pairs: (C, D) -> (C', D') when C' is a facet of D other than C.
    const std::size_t n = m.pairs.size();
    std::map<std::size_t, std::size_t> by_lower;
    std::vector<std::size_t> lower_id(n), upper_id(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto lo = cc.find(m.pairs[i].first);
        auto up = cc.find(m.pairs[i].second);
        if (!lo || !up) throw IndexError("matched cell missing from the complex");
        lower_id[i] = *lo;
        upper_id[i] = *up;
        by_lower.emplace(*lo, i);
    }
    auto successors = [&](std::size_t i) {
        std::vector<std::size_t> next;
        for (auto f : cc.cell(upper_id[i]).facets) {
            if (f == lower_id[i]) continue;
            auto it = by_lower.find(f);
            if (it != by_lower.end()) next.push_back(it->second);
        }
        std::sort(next.begin(), next.end());
        next.erase(std::unique(next.begin(), next.end()), next.end());
        return next;
    };

    enum Color : std::uint8_t { White, Grey, Black };
    std::vector<Color> color(n, White);
    std::vector<std::size_t> parent(n, n);
    AcyclicityResult result;
    for (std::size_t root = 0; root < n && result.acyclic; ++root) {
        if (color[root] != White) continue;
        std::vector<std::pair<std::size_t, std::vector<std::size_t>>> stack;
        color[root] = Grey;
        stack.emplace_back(root, successors(root));
        while (!stack.empty() && result.acyclic) {
            auto& [node, next] = stack.back();
            if (next.empty()) {
                color[node] = Black;
                stack.pop_back();
                continue;
            }
            auto s = next.back();
            next.pop_back();
            if (color[s] == White) {
                color[s] = Grey;
                parent[s] = node;
                stack.emplace_back(s, successors(s));
            } else if (color[s] == Grey) {
                std::vector<std::size_t> cycle{node};
                for (auto u = node; u != s; u = parent[u]) cycle.push_back(parent[u]);
                std::reverse(cycle.begin(), cycle.end());
                result.acyclic = false;
                result.witness.closed = true;
                for (auto p : cycle) {
                    result.witness.sequence.push_back(m.pairs[p].first);
                    result.witness.sequence.push_back(m.pairs[p].second);
                }
            }
        }
    }
    return result;
}

PairAssignment local_pair(const ReluNetwork& net, const SignSequence& cell, const Tolerances& tol) {
    if (cell.size() != net.total_neurons()) throw ShapeError("sign sequence length does not match the network");
    const std::size_t n0 = net.input_dim();
    auto form = net.cell_affine_form(cell);
    LpProblem p = cell_constraints(net, cell);
    p.objective = form.total_gradient;
    p.offset = form.total_offset;
    auto r = lp_solve(p, tol.lp());
    if (r.status == LpStatus::Unbounded) throw UnboundedCellError("F is unbounded above on " + cell.str());
    if (r.status == LpStatus::Infeasible) throw GenericityError("cell " + cell.str() + " is empty");

    SignSequence v = cell;
    for (auto t : r.tight)
        if (p.constraints[t].source) v.set(*p.constraints[t].source, 0);
    if (v.zero_count() != n0)
        throw GenericityError("maximizer of F on " + cell.str() + " reads as " + v.str() + ", not a vertex");

    std::vector<AxisPair> axes;
    for (auto pos : v.zero_positions()) {
        AxisPair pair;
        pair.position = pos;
        for (std::int8_t s : {std::int8_t{-1}, std::int8_t{1}}) {
            SignSequence e = v;
            e.set(pos, s);
            SignSequence container = e;
            for (auto z : e.zero_positions()) container.set(z, -1);
            auto d = edge_derivative(net, v, e, container);
            if (std::abs(d.value) <= tol.flat * d.gradient_norm)
                throw FlatCellError("F is constant along the edge " + e.str());
            (s < 0 ? pair.minus_edge : pair.plus_edge) = d.value > 0 ? 1 : -1;
        }
        axes.push_back(pair);
    }
    auto cls = classify_from_axes(v, std::move(axes));
    PairAssignment a = cls.kind == VertexKind::Regular ? assign_regular(cell, *cls.flow_axis, cls.flow_sign)
                                                       : assign_critical(v, cell, cls.descending_axes);
    a.owner = v;
    return a;
}

}  // namespace relu_morse
