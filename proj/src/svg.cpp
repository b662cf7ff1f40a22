#include "relu_morse/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "relu_morse/errors.hpp"

namespace relu_morse {

namespace {

using Point = std::array<double, 2>;

constexpr double kCanvas = 640.0;

Point point(const Eigen::VectorXd& v) { return {v(0), v(1)}; }

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    std::string s = buf;
    return s == "-0.00" ? "0.00" : s;
}

// Parameter range of p + t*d inside the box, for t in [t0, t1].
std::optional<std::pair<double, double>> liang_barsky(Point p, Point d, double t0, double t1, const RenderBox& b) {
    const double q[4][2] = {{-d[0], p[0] - b.xmin}, {d[0], b.xmax - p[0]}, {-d[1], p[1] - b.ymin}, {d[1], b.ymax - p[1]}};
    for (const auto& [pk, qk] : q) {
        if (pk == 0.0) {
            if (qk < 0.0) return std::nullopt;
            continue;
        }
        double r = qk / pk;
        if (pk < 0.0) t0 = std::max(t0, r);
        else t1 = std::min(t1, r);
        if (t0 > t1) return std::nullopt;
    }
    return std::make_pair(t0, t1);
}

// Keeps the part of `poly` where a.x >= c.
std::vector<Point> clip_halfplane(const std::vector<Point>& poly, Point a, double c) {
    std::vector<Point> out;
    auto inside = [&](Point p) { return a[0] * p[0] + a[1] * p[1] >= c; };
    for (std::size_t i = 0; i < poly.size(); ++i) {
        Point cur = poly[i];
        Point prev = poly[(i + poly.size() - 1) % poly.size()];
        bool ci = inside(cur), pi = inside(prev);
        if (ci != pi) {
            double fp = a[0] * prev[0] + a[1] * prev[1] - c;
            double fc = a[0] * cur[0] + a[1] * cur[1] - c;
            double t = fp / (fp - fc);
            out.push_back({prev[0] + t * (cur[0] - prev[0]), prev[1] + t * (cur[1] - prev[1])});
        }
        if (ci) out.push_back(cur);
    }
    return out;
}

class Canvas {
public:
    explicit Canvas(const RenderBox& box) : box_(box) {
        double w = box.xmax - box.xmin, h = box.ymax - box.ymin;
        scale_ = kCanvas / std::max(w, h);
        width_ = w * scale_;
        height_ = h * scale_;
    }
    std::string xy(Point p) const { return num((p[0] - box_.xmin) * scale_) + "," + num((box_.ymax - p[1]) * scale_); }
    double width() const { return width_; }
    double height() const { return height_; }

private:
    RenderBox box_;
    double scale_ = 1.0, width_ = 0.0, height_ = 0.0;
};

}  // namespace

RenderBox default_box(const CanonicalComplex& complex, double margin) {
    if (complex.vertices().empty()) return RenderBox{};
    RenderBox b{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
                std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const auto& v : complex.vertices()) {
        b.xmin = std::min(b.xmin, v.location(0));
        b.xmax = std::max(b.xmax, v.location(0));
        b.ymin = std::min(b.ymin, v.location(1));
        b.ymax = std::max(b.ymax, v.location(1));
    }
    b.xmin -= margin;
    b.xmax += margin;
    b.ymin -= margin;
    b.ymax += margin;
    return b;
}

std::string render_svg(const CanonicalComplex& complex, const RenderInput& input) {
    if (complex.input_dim() != 2) throw DimensionError("rendering needs a 2-dimensional input space");
    const RenderBox box = input.box.value_or(default_box(complex));
    if (!(box.xmax > box.xmin && box.ymax > box.ymin)) throw DimensionError("render box is empty");
    const Canvas canvas(box);

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(canvas.width()) << "\" height=\""
        << num(canvas.height()) << "\" viewBox=\"0 0 " << num(canvas.width()) << " " << num(canvas.height()) << "\">\n";
    svg << "<defs><marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"5\" refY=\"5\" markerWidth=\"8\" markerHeight=\"8\" "
           "orient=\"auto\"><path d=\"M0,0 L10,5 L0,10 z\" fill=\"#333\"/></marker></defs>\n";
    svg << "<style>.edge{stroke:#333;stroke-width:1.5;fill:none}.vertex{fill:#333}.critical{fill:none;stroke:#c00;"
           "stroke-width:2}.critical-cell{fill:#f4c7c3;stroke:none}.critical-edge{stroke:#c00}</style>\n";
    svg << "<rect x=\"0\" y=\"0\" width=\"" << num(canvas.width()) << "\" height=\"" << num(canvas.height())
        << "\" fill=\"white\"/>\n";

    std::vector<SignSequence> critical;
    if (input.matching) critical = input.matching->critical;
    auto is_critical = [&](const SignSequence& s) { return std::find(critical.begin(), critical.end(), s) != critical.end(); };

    for (const auto& c : critical) {
        const auto& cell = complex.at(c);
        if (cell.dim != 2) continue;
        std::vector<Point> poly{{box.xmin, box.ymin}, {box.xmax, box.ymin}, {box.xmax, box.ymax}, {box.xmin, box.ymax}};
        for (const auto& row : cell_constraints(complex.net(), c).constraints) {
            double sgn = row.relation == Relation::LessEqual ? -1.0 : 1.0;
            poly = clip_halfplane(poly, {sgn * row.coeffs(0), sgn * row.coeffs(1)}, sgn * row.rhs);
        }
        poly.erase(std::unique(poly.begin(), poly.end()), poly.end());
        while (poly.size() > 1 && poly.front() == poly.back()) poly.pop_back();
        if (poly.size() < 3) continue;
        svg << "<polygon class=\"critical-cell\" data-cell=\"" << c.str() << "\" points=\"";
        for (std::size_t i = 0; i < poly.size(); ++i) svg << (i ? " " : "") << canvas.xy(poly[i]);
        svg << "\"/>\n";
    }

    for (const auto& [signs, o] : input.field) {
        const auto& cell = complex.at(signs);
        Point a, b;
        if (cell.vertices.size() == 2) {
            a = point(complex.vertex(cell.vertices[0]).location);
            b = point(complex.vertex(cell.vertices[1]).location);
            if (*o.anchor != cell.vertices[0]) std::swap(a, b);
            auto seg = liang_barsky(a, {b[0] - a[0], b[1] - a[1]}, 0.0, 1.0, box);
            if (!seg) continue;
            Point d{b[0] - a[0], b[1] - a[1]};
            Point a2{a[0] + seg->first * d[0], a[1] + seg->first * d[1]};
            b = {a[0] + seg->second * d[0], a[1] + seg->second * d[1]};
            a = a2;
        } else {
            Point p = o.anchor ? point(complex.vertex(*o.anchor).location) : point(cell.interior);
            Point d{o.tangent(0), o.tangent(1)};
            double lo = o.anchor ? 0.0 : -std::numeric_limits<double>::infinity();
            auto seg = liang_barsky(p, d, lo, std::numeric_limits<double>::infinity(), box);
            if (!seg || seg->second - seg->first <= 0.0) continue;
            a = {p[0] + seg->first * d[0], p[1] + seg->first * d[1]};
            b = {p[0] + seg->second * d[0], p[1] + seg->second * d[1]};
        }
        // Drawn in the direction of increase.
        if (o.derivative_sign < 0) std::swap(a, b);
        Point mid{(a[0] + b[0]) / 2, (a[1] + b[1]) / 2};
        svg << "<polyline class=\"edge" << (is_critical(signs) ? " critical-edge" : "") << "\" data-cell=\"" << signs.str()
            << "\" points=\"" << canvas.xy(a) << " " << canvas.xy(mid) << " " << canvas.xy(b) << "\"";
        if (o.derivative_sign != 0) svg << " marker-mid=\"url(#arrow)\"";
        svg << "/>\n";
    }

    for (std::size_t i = 0; i < complex.vertices().size(); ++i) {
        const auto& v = complex.vertex(i);
        bool crit = false;
        if (input.classes)
            for (const auto& cls : *input.classes)
                if (cls.vertex == i && cls.kind == VertexKind::Critical) crit = true;
        auto at = canvas.xy(point(v.location));
        auto comma = at.find(',');
        std::string cx = at.substr(0, comma), cy = at.substr(comma + 1);
        svg << "<circle class=\"vertex\" data-cell=\"" << v.signs.str() << "\" cx=\"" << cx << "\" cy=\"" << cy
            << "\" r=\"3\"/>\n";
        if (crit)
            svg << "<circle class=\"critical\" data-cell=\"" << v.signs.str() << "\" cx=\"" << cx << "\" cy=\"" << cy
                << "\" r=\"8\"/>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace relu_morse
