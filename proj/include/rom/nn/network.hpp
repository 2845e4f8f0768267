#pragma once

// Fixed layer sequence with cached forward activations for backpropagation,
// and the "ROMW" parameter checkpoint format.

#include "rom/nn/activation.hpp"
#include "rom/nn/conv.hpp"
#include "rom/nn/dense.hpp"
#include "rom/nn/tensor.hpp"

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace rom::nn {

struct ActivationLayer {
    Activation kind = Activation::linear;
};

/// Reshape to [N, sample_shape...]. Flatten is sample_shape = {F}.
struct ReshapeLayer {
    Shape sample_shape;
};

using Layer = std::variant<ConvLayer, DenseLayer, ActivationLayer, ReshapeLayer>;

class Network {
public:
    void add(Layer layer) { layers_.push_back(std::move(layer)); }

    const std::vector<Layer>& layers() const { return layers_; }
    std::vector<Layer>& layers() { return layers_; }

    Tensor forward(const Tensor& x) const;

    /// Forward pass that keeps every intermediate: trace[0] = x, trace[i + 1]
    /// is the output of layer i.
    Tensor forward(const Tensor& x, std::vector<Tensor>& trace) const;

    /// Backpropagates grad_out through the traced pass. Parameter gradients are
    /// added to `param_grads`, ordered as parameters(); it is sized on first use.
    Tensor backward(const std::vector<Tensor>& trace, const Tensor& grad_out,
                    std::vector<Tensor>& param_grads) const;

    /// Weights then bias of each parameterised layer, in layer order.
    std::vector<Tensor*> parameters();
    std::vector<const Tensor*> parameters() const;
    std::size_t parameter_count() const;

private:
    std::vector<Layer> layers_;
};

/// Writes magic "ROMW", u32 version, length-prefixed manifest text, the layer
/// manifest, then all parameter blobs as little-endian f64.
void save_checkpoint(std::ostream& os, const std::vector<const Network*>& networks, const std::string& manifest);

struct Checkpoint {
    std::vector<Network> networks;
    std::string manifest;
};

Checkpoint load_checkpoint(std::istream& is, const std::string& source);

} // namespace rom::nn
