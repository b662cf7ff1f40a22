#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "relu_morse/complex.hpp"
#include "relu_morse/dgvf.hpp"
#include "relu_morse/orientation.hpp"

namespace relu_morse {

struct RenderBox {
    double xmin = -1.0;
    double xmax = 1.0;
    double ymin = -1.0;
    double ymax = 1.0;
};

/// Bounding box of the vertices grown by `margin`; [-1,1]^2 without vertices.
RenderBox default_box(const CanonicalComplex& complex, double margin = 1.0);

struct RenderInput {
    std::map<SignSequence, EdgeOrientation> field;
    std::optional<std::vector<VertexClassification>> classes;
    std::optional<Matching> matching;
    std::optional<RenderBox> box;
};

/// Planar rendering of a 2-D complex: oriented edges, circled critical
/// vertices, shaded critical 2-cells. Throws DimensionError unless n0 = 2.
std::string render_svg(const CanonicalComplex& complex, const RenderInput& input);

}  // namespace relu_morse
