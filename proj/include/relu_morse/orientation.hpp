#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "relu_morse/complex.hpp"

namespace relu_morse {

enum class EdgeDirection { TowardAnchor, AwayFromAnchor };

/// The direction of increase of F along one edge, stated relative to an
/// anchor vertex. derivative_sign = +1 iff F increases leaving the anchor.
struct EdgeOrientation {
    SignSequence edge;
    std::optional<std::size_t> anchor;  // vertex index; empty for vertex-free lines
    Eigen::VectorXd tangent;            // unit vector from the anchor into the edge
    EdgeDirection label = EdgeDirection::AwayFromAnchor;
    int derivative_sign = 1;            // 0 only for flat edges under FlatPolicy::Mark
};

/// Unit direction from vertex v into its incident edge e, from the node-map
/// rows valid on `container` (any top cell having e as a face).
Eigen::VectorXd edge_direction(const ReluNetwork& net, const SignSequence& v, const SignSequence& e,
                               const SignSequence& container);
Eigen::VectorXd edge_direction(const CanonicalComplex& complex, std::size_t vertex, const SignSequence& e);

/// Derivative of F leaving v along e (unit speed), together with the norm of
/// the gradient of F on the container used.
struct EdgeDerivative {
    double value = 0.0;
    double gradient_norm = 0.0;
    Eigen::VectorXd direction;
};
EdgeDerivative edge_derivative(const ReluNetwork& net, const SignSequence& v, const SignSequence& e,
                               const SignSequence& container);

/// Throws FlatCellError when F is constant along e.
EdgeOrientation orient_edge(const CanonicalComplex& complex, std::size_t vertex, const SignSequence& e,
                            double flat_tol = 1e-9);

enum class VertexKind { Regular, Critical };

/// Derivative signs of the two edges of one axis (a zero entry of the
/// vertex), measured leaving the vertex. Negative means the edge descends
/// from v, i.e. it is oriented toward v.
struct AxisPair {
    std::size_t position = 0;
    int minus_edge = 0;  // edge whose entry at `position` is -1
    int plus_edge = 0;   // edge whose entry at `position` is +1
    bool descending() const { return minus_edge < 0 && plus_edge < 0; }
    bool ascending() const { return minus_edge > 0 && plus_edge > 0; }
    bool flow_through() const { return !descending() && !ascending(); }
};

struct VertexClassification {
    std::size_t vertex = 0;
    SignSequence signs;
    VertexKind kind = VertexKind::Regular;
    int index = 0;  // PL index when critical
    std::vector<AxisPair> axes;
    std::vector<std::size_t> descending_axes;
    std::optional<std::size_t> flow_axis;
    std::int8_t flow_sign = 0;  // sign entry of the descending edge on flow_axis
};

/// Cross-polytope criterion applied to the axis pairs of a vertex.
VertexClassification classify_from_axes(const SignSequence& vertex_signs, std::vector<AxisPair> axes);

/// Throws MissingEdgeError when an incident edge is absent and FlatCellError
/// when one is flat.
VertexClassification classify_vertex(const CanonicalComplex& complex, std::size_t vertex, double flat_tol = 1e-9);
std::vector<VertexClassification> classify_all(const CanonicalComplex& complex);

enum class FlatPolicy { Throw, Mark };

/// Every edge of the complex, anchored at its lexicographically smallest
/// vertex. Vertex-free lines get a canonical tangent (first nonzero
/// component positive) and the gradient sign along it.
std::map<SignSequence, EdgeOrientation> orientation_field(const CanonicalComplex& complex,
                                                          FlatPolicy policy = FlatPolicy::Throw);

/// Report for networks of shape (n, n+1, 1).
struct ShallowCritical {
    SignSequence vertex;
    int index = 0;
    double value = 0.0;
};

struct ShallowReport {
    std::size_t n = 0;
    /// 1: all unbounded edges toward the bounded cell, 2: all away,
    /// 3: those of exactly one vertex toward, 4: those of exactly one vertex
    /// away. 0 when not determined (n != 2 or a mixed vertex).
    int orientation_class = 0;
    std::string class_name;
    std::vector<ShallowCritical> critical;
    std::string boundary_type;  // "empty" | "point" | "sphere"
    bool unbounded_edges_agree = true;
    bool at_most_one_extremal_critical = true;
    bool class_consistent = true;
    std::vector<std::string> violations;

    bool ok() const { return violations.empty(); }
};

ShallowReport analyze_shallow(const CanonicalComplex& complex);
ShallowReport analyze_shallow(const ReluNetwork& net, const BuildOptions& options = {});

}  // namespace relu_morse
