#include "relu_morse/orientation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "relu_morse/errors.hpp"

namespace relu_morse {

using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

namespace {

std::size_t changed_position(const SignSequence& v, const SignSequence& e) {
    if (v.size() != e.size()) throw ShapeError("sign sequences differ in length");
    std::optional<std::size_t> pos;
    for (std::size_t p = 0; p < v.size(); ++p) {
        if (v[p] == e[p]) continue;
        if (v[p] != 0 || pos) throw IndexError(v.str() + " is not a facet of " + e.str());
        pos = p;
    }
    if (!pos) throw IndexError(v.str() + " is not a facet of " + e.str());
    return *pos;
}

}  // namespace

EdgeDerivative edge_derivative(const ReluNetwork& net, const SignSequence& v, const SignSequence& e,
                               const SignSequence& container) {
    const auto n0 = net.input_dim();
    const auto zeros = v.zero_positions();
    if (zeros.size() != n0) throw IndexError(v.str() + " is not a vertex");
    const auto target = changed_position(v, e);
    if (!is_face(e, container)) throw IndexError(e.str() + " is not a face of " + container.str());

    const auto& arch = net.architecture();
    auto form = net.cell_affine_form(container);
    MatrixXd w(static_cast<Eigen::Index>(n0), static_cast<Eigen::Index>(n0));
    VectorXd rhs = VectorXd::Zero(static_cast<Eigen::Index>(n0));
    for (std::size_t k = 0; k < n0; ++k) {
        auto layer = arch.layer_of(zeros[k]);
        auto j = static_cast<Eigen::Index>(zeros[k] - arch.layer_offset(layer));
        RowVectorXd row = form.node_jacobians[layer - 1].row(j);
        double norm = row.cwiseAbs().maxCoeff();
        if (norm <= 1e-12) throw SingularSystemError("node map of entry " + std::to_string(zeros[k]) + " is constant near " + v.str());
        w.row(static_cast<Eigen::Index>(k)) = row / norm;
        if (zeros[k] == target) rhs(static_cast<Eigen::Index>(k)) = e[target];
    }
    Eigen::FullPivLU<MatrixXd> lu(w);
    lu.setThreshold(1e-10);
    if (!lu.isInvertible()) throw SingularSystemError("singular edge system at " + v.str());
    VectorXd d = lu.solve(rhs);
    d.normalize();

    EdgeDerivative out;
    out.direction = d;
    out.value = form.total_gradient.dot(d);
    out.gradient_norm = form.total_gradient.norm();
    return out;
}

VectorXd edge_direction(const ReluNetwork& net, const SignSequence& v, const SignSequence& e,
                        const SignSequence& container) {
    return edge_derivative(net, v, e, container).direction;
}

VectorXd edge_direction(const CanonicalComplex& complex, std::size_t vertex, const SignSequence& e) {
    const auto& v = complex.vertex(vertex);
    return edge_direction(complex.net(), v.signs, e, container_cell(complex, e));
}

EdgeOrientation orient_edge(const CanonicalComplex& complex, std::size_t vertex, const SignSequence& e,
                            double flat_tol) {
    const auto& v = complex.vertex(vertex);
    if (complex.at(e).dim != 1) throw IndexError(e.str() + " is not an edge");
    auto d = edge_derivative(complex.net(), v.signs, e, container_cell(complex, e));
    if (std::abs(d.value) <= flat_tol * d.gradient_norm)
        throw FlatCellError("F is constant along the edge " + e.str());
    EdgeOrientation o;
    o.edge = e;
    o.anchor = vertex;
    o.tangent = d.direction;
    o.derivative_sign = d.value > 0 ? 1 : -1;
    o.label = d.value > 0 ? EdgeDirection::AwayFromAnchor : EdgeDirection::TowardAnchor;
    return o;
}

VertexClassification classify_from_axes(const SignSequence& vertex_signs, std::vector<AxisPair> axes) {
    std::sort(axes.begin(), axes.end(), [](const AxisPair& a, const AxisPair& b) { return a.position < b.position; });
    VertexClassification cls;
    cls.signs = vertex_signs;
    for (const auto& a : axes) {
        if (a.descending()) cls.descending_axes.push_back(a.position);
        if (a.flow_through() && !cls.flow_axis) {
            cls.flow_axis = a.position;
            cls.flow_sign = a.minus_edge < 0 ? std::int8_t{-1} : std::int8_t{1};
        }
    }
    cls.axes = std::move(axes);
    if (cls.flow_axis) {
        cls.kind = VertexKind::Regular;
        cls.index = 0;
    } else {
        cls.kind = VertexKind::Critical;
        cls.index = static_cast<int>(cls.descending_axes.size());
    }
    return cls;
}

VertexClassification classify_vertex(const CanonicalComplex& complex, std::size_t vertex, double flat_tol) {
    const auto& v = complex.vertex(vertex);
    std::vector<AxisPair> axes;
    for (auto pos : v.signs.zero_positions()) {
        AxisPair pair;
        pair.position = pos;
        for (std::int8_t s : {std::int8_t{-1}, std::int8_t{1}}) {
            SignSequence e = v.signs;
            e.set(pos, s);
            if (!complex.contains(e)) throw MissingEdgeError("vertex " + v.signs.str() + " lacks the edge " + e.str());
            int sign = orient_edge(complex, vertex, e, flat_tol).derivative_sign;
            (s < 0 ? pair.minus_edge : pair.plus_edge) = sign;
        }
        axes.push_back(pair);
    }
    auto cls = classify_from_axes(v.signs, std::move(axes));
    cls.vertex = vertex;
    return cls;
}

std::vector<VertexClassification> classify_all(const CanonicalComplex& complex) {
    std::vector<VertexClassification> out;
    out.reserve(complex.vertices().size());
    for (std::size_t i = 0; i < complex.vertices().size(); ++i)
        out.push_back(classify_vertex(complex, i, complex.tolerances().flat));
    return out;
}

std::map<SignSequence, EdgeOrientation> orientation_field(const CanonicalComplex& complex, FlatPolicy policy) {
    const double flat_tol = complex.tolerances().flat;
    std::map<SignSequence, EdgeOrientation> field;
    for (auto idx : complex.cells_of_dim(1)) {
        const auto& cell = complex.cell(idx);
        EdgeOrientation o;
        o.edge = cell.signs;
        EdgeDerivative d;
        if (!cell.vertices.empty()) {
            auto anchor = *std::min_element(cell.vertices.begin(), cell.vertices.end());
            o.anchor = anchor;
            d = edge_derivative(complex.net(), complex.vertex(anchor).signs, cell.signs, container_cell(complex, cell.signs));
        } else {
            // A full line: tangent spans the kernel of its node-map equations.
            auto p = cell_constraints(complex.net(), cell.signs);
            std::vector<RowVectorXd> rows;
            for (const auto& c : p.constraints)
                if (c.relation == Relation::Equal) rows.push_back(c.coeffs);
            MatrixXd e(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(complex.input_dim()));
            for (std::size_t i = 0; i < rows.size(); ++i) e.row(static_cast<Eigen::Index>(i)) = rows[i];
            Eigen::FullPivLU<MatrixXd> lu(e);
            MatrixXd kernel = lu.kernel();
            VectorXd t = kernel.col(0).normalized();
            for (Eigen::Index i = 0; i < t.size(); ++i) {
                if (std::abs(t(i)) > 1e-12) {
                    if (t(i) < 0) t = -t;
                    break;
                }
            }
            auto form = complex.net().cell_affine_form(container_cell(complex, cell.signs));
            d.direction = t;
            d.value = form.total_gradient.dot(t);
            d.gradient_norm = form.total_gradient.norm();
        }
        o.tangent = d.direction;
        if (std::abs(d.value) <= flat_tol * d.gradient_norm) {
            if (policy == FlatPolicy::Throw) throw FlatCellError("F is constant along the edge " + cell.signs.str());
            o.derivative_sign = 0;
        } else {
            o.derivative_sign = d.value > 0 ? 1 : -1;
        }
        o.label = o.derivative_sign > 0 ? EdgeDirection::AwayFromAnchor : EdgeDirection::TowardAnchor;
        field.emplace(cell.signs, std::move(o));
    }
    return field;
}

namespace {

bool level_set_nonempty(const CanonicalComplex& complex, double level) {
    const auto& net = complex.net();
    for (auto idx : complex.cells_of_dim(static_cast<int>(complex.input_dim()))) {
        const auto& s = complex.cell(idx).signs;
        auto form = net.cell_affine_form(s);
        LpProblem p = cell_constraints(net, s);
        p.objective = form.total_gradient;
        p.offset = form.total_offset;
        auto hi = lp_solve(p, complex.tolerances().lp());
        p.objective = -form.total_gradient;
        p.offset = -form.total_offset;
        auto lo = lp_solve(p, complex.tolerances().lp());
        double top = hi.status == LpStatus::Optimal ? hi.value : std::numeric_limits<double>::infinity();
        double bottom = lo.status == LpStatus::Optimal ? -lo.value : -std::numeric_limits<double>::infinity();
        if (bottom <= level && level <= top) return true;
    }
    return false;
}

}  // namespace

ShallowReport analyze_shallow(const CanonicalComplex& complex) {
    const auto& arch = complex.net().architecture();
    const std::size_t n = arch.input_dim();
    if (arch.hidden_layers() != 1 || arch.width(1) != n + 1)
        throw ArchitectureError("shallow analysis needs architecture (n, n+1, 1)");

    ShallowReport report;
    report.n = n;
    const double flat_tol = complex.tolerances().flat;
    const auto classes = classify_all(complex);

    // Unbounded edges at each vertex, and their derivative sign leaving it.
    std::vector<std::optional<int>> unbounded_sign(complex.vertices().size());
    for (std::size_t vi = 0; vi < complex.vertices().size(); ++vi) {
        const auto& v = complex.vertex(vi);
        for (const auto& s : star(complex, v.signs)) {
            const auto& c = complex.at(s);
            if (c.dim != 1 || c.vertices.size() >= 2) continue;
            int sign = orient_edge(complex, vi, s, flat_tol).derivative_sign;
            if (unbounded_sign[vi] && *unbounded_sign[vi] != sign) {
                report.unbounded_edges_agree = false;
                report.violations.push_back("unbounded edges at " + v.signs.str() + " disagree");
            }
            unbounded_sign[vi] = sign;
        }
    }

    for (const auto& cls : classes) {
        if (cls.kind != VertexKind::Critical) continue;
        const auto& v = complex.vertex(cls.vertex);
        report.critical.push_back({v.signs, cls.index, v.value});
        if (cls.index != 0 && cls.index != static_cast<int>(n)) {
            report.at_most_one_extremal_critical = false;
            report.violations.push_back("critical vertex " + v.signs.str() + " has index " + std::to_string(cls.index));
        }
    }
    if (report.critical.size() > 1) {
        report.at_most_one_extremal_critical = false;
        report.violations.push_back(std::to_string(report.critical.size()) + " critical vertices");
    }

    // Decision boundary F = 0.
    const double value_tol = complex.tolerances().sign;
    if (report.critical.empty()) {
        report.boundary_type = level_set_nonempty(complex, 0.0) ? "point" : "empty";
    } else {
        const auto& c = report.critical.front();
        double scale = std::max(1.0, std::abs(c.value));
        bool minimum = c.index == 0;
        if (std::abs(c.value) <= value_tol * scale) report.boundary_type = "point";
        else if (minimum == (c.value > 0)) report.boundary_type = "empty";
        else report.boundary_type = "sphere";
    }

    if (n == 2) {
        std::optional<std::size_t> sigma;
        for (auto idx : complex.cells_of_dim(2)) {
            if (is_bounded(complex, complex.cell(idx).signs)) {
                if (sigma) report.violations.push_back("more than one bounded 2-cell");
                sigma = idx;
            }
        }
        if (!sigma) {
            report.violations.push_back("no bounded 2-cell");
        } else {
            int toward = 0;
            bool determined = true;
            for (auto vi : complex.cell(*sigma).vertices) {
                if (!unbounded_sign[vi]) {
                    determined = false;
                    continue;
                }
                toward += *unbounded_sign[vi] < 0;
            }
            const auto corners = static_cast<int>(complex.cell(*sigma).vertices.size());
            if (!determined || !report.unbounded_edges_agree || corners != 3) {
                report.orientation_class = 0;
                report.class_name = "mixed";
                report.violations.push_back("unbounded edges do not determine an orientation class");
            } else if (toward == 3) {
                report.orientation_class = 1;
                report.class_name = "all-toward";
            } else if (toward == 0) {
                report.orientation_class = 2;
                report.class_name = "all-away";
            } else if (toward == 1) {
                report.orientation_class = 3;
                report.class_name = "one-toward";
            } else {
                report.orientation_class = 4;
                report.class_name = "one-away";
            }
            // Each class fixes the critical inventory.
            bool consistent = true;
            switch (report.orientation_class) {
                case 1: consistent = report.critical.size() == 1 && report.critical[0].index == 2; break;
                case 2: consistent = report.critical.size() == 1 && report.critical[0].index == 0; break;
                case 3:
                case 4: consistent = report.critical.empty(); break;
                default: consistent = false;
            }
            report.class_consistent = consistent;
            if (!consistent) report.violations.push_back("critical inventory does not match class " + report.class_name);
        }
    } else {
        report.class_name = "unclassified";
    }
    return report;
}

ShallowReport analyze_shallow(const ReluNetwork& net, const BuildOptions& options) {
    const auto& arch = net.architecture();
    if (arch.hidden_layers() != 1 || arch.width(1) != arch.input_dim() + 1)
        throw ArchitectureError("shallow analysis needs architecture (n, n+1, 1)");
    return analyze_shallow(build_complex(net, options));
}

}  // namespace relu_morse
