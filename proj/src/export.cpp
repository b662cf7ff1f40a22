#include "relu_morse/export.hpp"

namespace relu_morse {

namespace {

// Adding +0.0 turns -0.0 into 0.0.
double clean(double x) { return x + 0.0; }

Json vec(const Eigen::VectorXd& v) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(clean(v(i)));
    return out;
}

template <class T>
Json list(const std::vector<T>& xs) {
    Json out = Json::array();
    for (const auto& x : xs) out.push_back(x);
    return out;
}

const char* kind_name(VertexKind k) { return k == VertexKind::Critical ? "critical" : "regular"; }

}  // namespace

Json complex_to_json(const CanonicalComplex& complex) {
    Json j;
    j["dims"] = list(complex.net().architecture().external());
    Json count = Json::array();
    for (int d = 0; d <= static_cast<int>(complex.input_dim()); ++d) count.push_back(complex.cells_of_dim(d).size());
    j["cell_counts"] = std::move(count);
    Json cells = Json::array();
    for (const auto& c : complex.cells()) {
        Json e;
        e["signs"] = c.signs.str();
        e["dim"] = c.dim;
        e["bounded_above"] = c.bounded_above.value_or(false);
        if (c.dim == 0) {
            const auto& v = complex.vertex(*complex.find_vertex(c.signs));
            e["location"] = vec(v.location);
            e["value"] = clean(v.value);
        }
        cells.push_back(std::move(e));
    }
    j["cells"] = std::move(cells);
    return j;
}

Json classification_to_json(const CanonicalComplex& complex, const std::vector<VertexClassification>& classes) {
    Json out = Json::array();
    for (const auto& cls : classes) {
        const auto& v = complex.vertex(cls.vertex);
        Json e;
        e["vertex"] = cls.signs.str();
        e["location"] = vec(v.location);
        e["value"] = clean(v.value);
        e["kind"] = kind_name(cls.kind);
        if (cls.kind == VertexKind::Critical) e["index"] = cls.index;
        e["descending_axes"] = list(cls.descending_axes);
        if (cls.flow_axis) e["flow_axis"] = *cls.flow_axis;
        out.push_back(std::move(e));
    }
    return out;
}

Json shallow_to_json(const ShallowReport& report) {
    Json j;
    j["class"] = report.class_name;
    j["class_id"] = report.orientation_class;
    Json crit = Json::array();
    for (const auto& c : report.critical) {
        Json e;
        e["vertex"] = c.vertex.str();
        e["index"] = c.index;
        e["value"] = clean(c.value);
        crit.push_back(std::move(e));
    }
    j["critical"] = std::move(crit);
    j["boundary_type"] = report.boundary_type;
    j["unbounded_edges_agree"] = report.unbounded_edges_agree;
    j["violations"] = list(report.violations);
    return j;
}

Json matching_to_json(const Matching& m) {
    Matching sorted = m;
    sorted.normalize();
    Json pairs = Json::array();
    for (const auto& [lo, up] : sorted.pairs) pairs.push_back(Json::array({lo.str(), up.str()}));
    Json crit = Json::array();
    for (const auto& c : sorted.critical) crit.push_back(c.str());
    Json j;
    j["pairs"] = std::move(pairs);
    j["critical"] = std::move(crit);
    j["basepoint"] = m.includes_basepoint;
    return j;
}

Json perfectness_to_json(const PerfectnessReport& report) {
    Json levels = Json::array();
    for (const auto& l : report.levels) {
        Json e;
        e["level"] = clean(l.level);
        e["expected"] = list(l.expected);
        e["critical_counts"] = list(l.critical_counts);
        e["pass"] = l.pass;
        levels.push_back(std::move(e));
    }
    Json j;
    j["levels"] = std::move(levels);
    j["pass"] = report.pass;
    if (report.first_failure) j["first_failure"] = *report.first_failure;
    return j;
}

}  // namespace relu_morse
