#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "relu_morse/sign_sequence.hpp"

namespace relu_morse {

/// Hidden-layer shape (n0, n1, ..., nm). The scalar output is implicit.
class Architecture {
public:
    Architecture() = default;
    /// dims = (n0, n1, ..., nm); requires m >= 1 and every entry >= 1.
    explicit Architecture(std::vector<std::size_t> dims);
    /// Parses the external form (n0, ..., nm, 1) used by weight files and --arch.
    static Architecture from_external(const std::vector<std::size_t>& dims_with_output);

    std::size_t input_dim() const { return dims_.front(); }
    std::size_t hidden_layers() const { return dims_.size() - 1; }
    /// Width of hidden layer `layer`, 1-based.
    std::size_t width(std::size_t layer) const { return dims_.at(layer); }
    std::size_t total_neurons() const { return total_; }
    /// Flat position of neuron (layer, neuron), both 1-based.
    std::size_t flat_index(std::size_t layer, std::size_t neuron) const;
    /// First flat position of a layer (1-based layer).
    std::size_t layer_offset(std::size_t layer) const { return offsets_.at(layer - 1); }
    /// 1-based layer owning a flat position.
    std::size_t layer_of(std::size_t flat) const;

    const std::vector<std::size_t>& dims() const { return dims_; }
    std::vector<std::size_t> external() const;

    friend bool operator==(const Architecture&, const Architecture&) = default;

private:
    std::vector<std::size_t> dims_;
    std::vector<std::size_t> offsets_;
    std::size_t total_ = 0;
};

struct AffineLayer {
    Eigen::MatrixXd weights;  // rows = outputs, cols = inputs
    Eigen::VectorXd bias;
};

/// Affine restriction of F and of each layer composite to one cell. Node-map
/// forms are the pre-activations: node_jacobians[i] * x + node_offsets[i].
struct CellAffineForm {
    SignSequence cell;
    std::vector<Eigen::MatrixXd> per_layer_jacobians;  // post-activation, n_i x n0
    std::vector<Eigen::VectorXd> per_layer_biases;
    std::vector<Eigen::MatrixXd> node_jacobians;  // pre-activation, n_i x n0
    std::vector<Eigen::VectorXd> node_offsets;
    Eigen::RowVectorXd total_gradient;
    double total_offset = 0.0;
};

/// Fully-connected feed-forward ReLU network with scalar output. Immutable
/// once constructed.
class ReluNetwork {
public:
    ReluNetwork(std::vector<AffineLayer> layers, AffineLayer final);

    const Architecture& architecture() const { return arch_; }
    std::size_t input_dim() const { return arch_.input_dim(); }
    std::size_t total_neurons() const { return arch_.total_neurons(); }
    const std::vector<AffineLayer>& layers() const { return layers_; }
    const AffineLayer& final_layer() const { return final_; }

    double evaluate(const Eigen::VectorXd& x) const;
    /// Pre-activation of neuron (layer, neuron), both 1-based.
    double node_map(std::size_t layer, std::size_t neuron, const Eigen::VectorXd& x) const;
    /// All N pre-activations in flat order.
    Eigen::VectorXd node_values(const Eigen::VectorXd& x) const;

    /// Sign of every node map at x. A value counts as zero when its magnitude
    /// is below tol times the infinity norm of the neuron's affine row scaled
    /// by the magnitude of its input.
    SignSequence sign_sequence_at(const Eigen::VectorXd& x, double tol = 1e-9) const;

    CellAffineForm cell_affine_form(const SignSequence& cell) const;

    /// Pre-activation affine forms of hidden layer `layer` (1-based) on the
    /// region described by `prefix`, which must cover at least the layers
    /// before it. Returns (jacobian n_layer x n0, offsets n_layer).
    std::pair<Eigen::MatrixXd, Eigen::VectorXd> layer_node_forms(const SignSequence& prefix,
                                                                 std::size_t layer) const;

private:
    void check_input(const Eigen::VectorXd& x) const;

    std::vector<AffineLayer> layers_;
    AffineLayer final_;
    Architecture arch_;
};

/// Weights and biases i.i.d. normal(0, scale^2), deterministic per seed.
ReluNetwork random_network(const Architecture& arch, std::uint64_t seed, double scale = 1.0);

/// The three-line fixture: hidden weights [[1,0],[0,1],[-1,-1]], bias
/// (0,0,1), output weights (1,2,4), output bias 0.
ReluNetwork fixture_net_b();

/// Same network with every output weight negated.
ReluNetwork negate_output(const ReluNetwork& net);

std::string network_to_json(const ReluNetwork& net);
/// Throws ShapeError on schema violations.
ReluNetwork network_from_json(const std::string& text);

}  // namespace relu_morse
