#include "relu_morse/network.hpp"

#include <algorithm>
#include <random>

#include <json.hpp>

#include "relu_morse/errors.hpp"

namespace relu_morse {

using Eigen::MatrixXd;
using Eigen::VectorXd;

Architecture::Architecture(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
    if (dims_.size() < 2) throw ArchitectureError("architecture needs an input and at least one hidden layer");
    for (auto d : dims_)
        if (d == 0) throw ArchitectureError("architecture dimensions must be positive");
    offsets_.reserve(dims_.size() - 1);
    for (std::size_t i = 1; i < dims_.size(); ++i) {
        offsets_.push_back(total_);
        total_ += dims_[i];
    }
}

Architecture Architecture::from_external(const std::vector<std::size_t>& dims_with_output) {
    if (dims_with_output.size() < 3 || dims_with_output.back() != 1)
        throw ArchitectureError("architecture must have the form n0,...,nm,1 with m >= 1");
    return Architecture(std::vector<std::size_t>(dims_with_output.begin(), dims_with_output.end() - 1));
}

std::size_t Architecture::flat_index(std::size_t layer, std::size_t neuron) const {
    if (layer < 1 || layer > hidden_layers() || neuron < 1 || neuron > dims_[layer])
        throw IndexError("neuron (" + std::to_string(layer) + "," + std::to_string(neuron) + ") out of range");
    return offsets_[layer - 1] + neuron - 1;
}

std::size_t Architecture::layer_of(std::size_t flat) const {
    if (flat >= total_) throw IndexError("flat neuron index out of range");
    auto it = std::upper_bound(offsets_.begin(), offsets_.end(), flat);
    return static_cast<std::size_t>(it - offsets_.begin());
}

std::vector<std::size_t> Architecture::external() const {
    auto out = dims_;
    out.push_back(1);
    return out;
}

namespace {

Architecture infer_architecture(const std::vector<AffineLayer>& layers, const AffineLayer& final) {
    if (layers.empty()) throw ShapeError("network needs at least one hidden layer");
    std::vector<std::size_t> dims;
    dims.push_back(static_cast<std::size_t>(layers.front().weights.cols()));
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const auto& l = layers[i];
        if (static_cast<std::size_t>(l.weights.cols()) != dims.back())
            throw ShapeError("layer " + std::to_string(i + 1) + " input width does not match previous layer");
        if (l.bias.size() != l.weights.rows())
            throw ShapeError("layer " + std::to_string(i + 1) + " bias length does not match its weights");
        dims.push_back(static_cast<std::size_t>(l.weights.rows()));
    }
    if (final.weights.rows() != 1 || static_cast<std::size_t>(final.weights.cols()) != dims.back() ||
        final.bias.size() != 1)
        throw ShapeError("final layer must map the last hidden layer to a scalar");
    for (auto d : dims)
        if (d == 0) throw ShapeError("zero-width layer");
    return Architecture(std::move(dims));
}

}  // namespace

ReluNetwork::ReluNetwork(std::vector<AffineLayer> layers, AffineLayer final)
    : layers_(std::move(layers)), final_(std::move(final)), arch_(infer_architecture(layers_, final_)) {}

void ReluNetwork::check_input(const VectorXd& x) const {
    if (static_cast<std::size_t>(x.size()) != input_dim())
        throw ShapeError("input has length " + std::to_string(x.size()) + ", expected " +
                         std::to_string(input_dim()));
}

double ReluNetwork::evaluate(const VectorXd& x) const {
    check_input(x);
    VectorXd y = x;
    for (const auto& l : layers_) y = (l.weights * y + l.bias).cwiseMax(0.0);
    return (final_.weights * y)(0) + final_.bias(0);
}

VectorXd ReluNetwork::node_values(const VectorXd& x) const {
    check_input(x);
    VectorXd out(static_cast<Eigen::Index>(total_neurons()));
    VectorXd y = x;
    Eigen::Index pos = 0;
    for (const auto& l : layers_) {
        VectorXd pre = l.weights * y + l.bias;
        out.segment(pos, pre.size()) = pre;
        pos += pre.size();
        y = pre.cwiseMax(0.0);
    }
    return out;
}

double ReluNetwork::node_map(std::size_t layer, std::size_t neuron, const VectorXd& x) const {
    auto flat = arch_.flat_index(layer, neuron);
    return node_values(x)(static_cast<Eigen::Index>(flat));
}

SignSequence ReluNetwork::sign_sequence_at(const VectorXd& x, double tol) const {
    check_input(x);
    std::vector<std::int8_t> signs;
    signs.reserve(total_neurons());
    VectorXd y = x;
    for (const auto& l : layers_) {
        VectorXd pre = l.weights * y + l.bias;
        double input_scale = std::max(1.0, y.size() ? y.cwiseAbs().maxCoeff() : 0.0);
        for (Eigen::Index j = 0; j < pre.size(); ++j) {
            double row_norm = std::max(l.weights.row(j).cwiseAbs().maxCoeff(), std::abs(l.bias(j)));
            double scale = std::max(row_norm * input_scale, 1e-300);
            double v = pre(j);
            signs.push_back(std::abs(v) < tol * scale ? 0 : (v > 0 ? 1 : -1));
        }
        y = pre.cwiseMax(0.0);
    }
    return SignSequence(std::move(signs));
}

namespace {

// Keeps row j of `m` iff the sign entry is +1 (ReLU of the diagonal sign matrix).
void mask_rows(MatrixXd& jac, VectorXd& off, const SignSequence& signs, std::size_t offset) {
    for (Eigen::Index j = 0; j < jac.rows(); ++j) {
        if (signs[offset + static_cast<std::size_t>(j)] != 1) {
            jac.row(j).setZero();
            off(j) = 0.0;
        }
    }
}

}  // namespace

CellAffineForm ReluNetwork::cell_affine_form(const SignSequence& cell) const {
    if (cell.size() != total_neurons())
        throw ShapeError("sign sequence has length " + std::to_string(cell.size()) + ", expected " +
                         std::to_string(total_neurons()));
    const auto n0 = static_cast<Eigen::Index>(input_dim());
    CellAffineForm form;
    form.cell = cell;
    MatrixXd jac = MatrixXd::Identity(n0, n0);
    VectorXd off = VectorXd::Zero(n0);
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const auto& l = layers_[i];
        MatrixXd pre_j = l.weights * jac;
        VectorXd pre_c = l.weights * off + l.bias;
        form.node_jacobians.push_back(pre_j);
        form.node_offsets.push_back(pre_c);
        mask_rows(pre_j, pre_c, cell, arch_.layer_offset(i + 1));
        jac = std::move(pre_j);
        off = std::move(pre_c);
        form.per_layer_jacobians.push_back(jac);
        form.per_layer_biases.push_back(off);
    }
    form.total_gradient = final_.weights * jac;
    form.total_offset = (final_.weights * off)(0) + final_.bias(0);
    return form;
}

std::pair<MatrixXd, VectorXd> ReluNetwork::layer_node_forms(const SignSequence& prefix, std::size_t layer) const {
    if (layer < 1 || layer > layers_.size()) throw IndexError("layer out of range");
    if (prefix.size() < arch_.layer_offset(layer)) throw ShapeError("sign prefix too short for layer");
    const auto n0 = static_cast<Eigen::Index>(input_dim());
    MatrixXd jac = MatrixXd::Identity(n0, n0);
    VectorXd off = VectorXd::Zero(n0);
    for (std::size_t i = 0; i + 1 < layer; ++i) {
        const auto& l = layers_[i];
        MatrixXd pre_j = l.weights * jac;
        VectorXd pre_c = l.weights * off + l.bias;
        mask_rows(pre_j, pre_c, prefix, arch_.layer_offset(i + 1));
        jac = std::move(pre_j);
        off = std::move(pre_c);
    }
    const auto& l = layers_[layer - 1];
    return {l.weights * jac, l.weights * off + l.bias};
}

ReluNetwork random_network(const Architecture& arch, std::uint64_t seed, double scale) {
    if (!(scale > 0.0)) throw ShapeError("scale must be positive");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, scale);
    auto draw = [&](Eigen::Index rows, Eigen::Index cols) {
        MatrixXd m(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = normal(rng);
        return m;
    };
    std::vector<AffineLayer> layers;
    const auto& d = arch.dims();
    for (std::size_t i = 1; i < d.size(); ++i) {
        AffineLayer l;
        l.weights = draw(static_cast<Eigen::Index>(d[i]), static_cast<Eigen::Index>(d[i - 1]));
        l.bias = draw(static_cast<Eigen::Index>(d[i]), 1).col(0);
        layers.push_back(std::move(l));
    }
    AffineLayer final;
    final.weights = draw(1, static_cast<Eigen::Index>(d.back()));
    final.bias = draw(1, 1).col(0);
    return ReluNetwork(std::move(layers), std::move(final));
}

ReluNetwork fixture_net_b() {
    AffineLayer hidden;
    hidden.weights = MatrixXd(3, 2);
    hidden.weights << 1, 0, 0, 1, -1, -1;
    hidden.bias = VectorXd(3);
    hidden.bias << 0, 0, 1;
    AffineLayer final;
    final.weights = MatrixXd(1, 3);
    final.weights << 1, 2, 4;
    final.bias = VectorXd::Zero(1);
    return ReluNetwork({hidden}, final);
}

ReluNetwork negate_output(const ReluNetwork& net) {
    AffineLayer final = net.final_layer();
    final.weights = -final.weights;
    return ReluNetwork(net.layers(), final);
}

namespace {

using nlohmann::ordered_json;

ordered_json matrix_json(const MatrixXd& m) {
    ordered_json rows = ordered_json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        ordered_json row = ordered_json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

ordered_json vector_json(const VectorXd& v) {
    ordered_json out = ordered_json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

MatrixXd matrix_from(const ordered_json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) throw ShapeError(where + ": weights must be a non-empty array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    if (!j[0].is_array() || j[0].empty()) throw ShapeError(where + ": weight rows must be non-empty arrays");
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
            throw ShapeError(where + ": ragged weight matrix");
        for (Eigen::Index c = 0; c < cols; ++c) {
            const auto& v = row[static_cast<std::size_t>(c)];
            if (!v.is_number()) throw ShapeError(where + ": weights must be numbers");
            m(r, c) = v.get<double>();
        }
    }
    return m;
}

VectorXd vector_from(const ordered_json& j, const std::string& where) {
    if (!j.is_array()) throw ShapeError(where + ": bias must be an array");
    VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ShapeError(where + ": bias entries must be numbers");
        v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    }
    return v;
}

AffineLayer layer_from(const ordered_json& j, const std::string& where) {
    if (!j.is_object() || !j.contains("weights") || !j.contains("bias"))
        throw ShapeError(where + ": expected an object with \"weights\" and \"bias\"");
    return AffineLayer{matrix_from(j["weights"], where), vector_from(j["bias"], where)};
}

}  // namespace

std::string network_to_json(const ReluNetwork& net) {
    ordered_json doc;
    doc["dims"] = net.architecture().external();
    ordered_json layers = ordered_json::array();
    for (const auto& l : net.layers()) {
        ordered_json lj;
        lj["weights"] = matrix_json(l.weights);
        lj["bias"] = vector_json(l.bias);
        layers.push_back(std::move(lj));
    }
    doc["layers"] = std::move(layers);
    ordered_json fj;
    fj["weights"] = matrix_json(net.final_layer().weights);
    fj["bias"] = vector_json(net.final_layer().bias);
    doc["final"] = std::move(fj);
    return doc.dump(2) + "\n";
}

ReluNetwork network_from_json(const std::string& text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ShapeError(std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("dims") || !doc.contains("layers") || !doc.contains("final"))
        throw ShapeError("weight file needs \"dims\", \"layers\" and \"final\"");
    if (!doc["layers"].is_array()) throw ShapeError("\"layers\" must be an array");
    std::vector<AffineLayer> layers;
    for (std::size_t i = 0; i < doc["layers"].size(); ++i)
        layers.push_back(layer_from(doc["layers"][i], "layer " + std::to_string(i + 1)));
    AffineLayer final = layer_from(doc["final"], "final");
    ReluNetwork net(std::move(layers), std::move(final));

    std::vector<std::size_t> dims;
    if (!doc["dims"].is_array()) throw ShapeError("\"dims\" must be an array");
    for (const auto& d : doc["dims"]) {
        if (!d.is_number_integer() || d.get<long long>() < 1) throw ShapeError("\"dims\" entries must be positive integers");
        dims.push_back(d.get<std::size_t>());
    }
    if (dims != net.architecture().external()) throw ShapeError("\"dims\" does not match the layer shapes");
    return net;
}

}  // namespace relu_morse
