#ifndef VAEBGM_NUMERICS_LAYERS_HPP
#define VAEBGM_NUMERICS_LAYERS_HPP

#include "vaebgm/core/error.hpp"
#include "vaebgm/core/linalg.hpp"
#include "vaebgm/core/random.hpp"

#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace vaebgm::numerics {

enum class Activation { identity, relu, tanh, sigmoid, softmax_blocks };

inline std::string to_string(Activation a) {
    switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::sigmoid: return "sigmoid";
    case Activation::softmax_blocks: return "softmax_blocks";
    }
    return "?";
}

inline Activation parse_activation(const std::string &s) {
    for (const auto a : {Activation::identity, Activation::relu, Activation::tanh, Activation::sigmoid, Activation::softmax_blocks}) {
        if (to_string(a) == s) return a;
    }
    throw InputError("unknown activation '" + s + "'");
}

enum class Mode { train, infer };

/// Contiguous slice of a layer's output that a block softmax normalizes.
struct Block {
    Index offset = 0;
    Index width = 0;
};

/// Affine map followed by an activation: y = act(W x + b), W is out x in.
struct Layer {
    std::string name;
    Dense2D weight;
    Vector bias;
    Activation activation = Activation::identity;
    std::vector<Block> softmax_blocks;
    /// Inverted dropout applied to this layer's output in train mode; 0 disables.
    double dropout_rate = 0.0;

    [[nodiscard]] Index in_dim() const { return weight.cols(); }
    [[nodiscard]] Index out_dim() const { return weight.rows(); }

    static Layer zeros(std::string name, Index in, Index out, Activation act) {
        return Layer{std::move(name), Dense2D::Zero(out, in), Vector::Zero(out), act, {}, 0.0};
    }

    /// Weights and biases uniform in +-1/sqrt(in).
    static Layer uniform_init(std::string name, Index in, Index out, Activation act, Rng &rng) {
        auto layer = zeros(std::move(name), in, out, act);
        const double bound = 1.0 / std::sqrt(static_cast<double>(in));
        for (Index r = 0; r < out; ++r) {
            for (Index c = 0; c < in; ++c) layer.weight(r, c) = (2.0 * uniform01(rng) - 1.0) * bound;
        }
        for (Index r = 0; r < out; ++r) layer.bias(r) = (2.0 * uniform01(rng) - 1.0) * bound;
        return layer;
    }
};

struct LayerGrad {
    Dense2D weight;
    Vector bias;

    static LayerGrad zeros_like(const Layer &l) { return {Dense2D::Zero(l.weight.rows(), l.weight.cols()), Vector::Zero(l.bias.size())}; }

    LayerGrad &operator+=(const LayerGrad &o) {
        weight += o.weight;
        bias += o.bias;
        return *this;
    }
};

/// Forward activations retained for the backward pass of one layer.
struct LayerCache {
    Dense2D input;
    Dense2D activated;  // after activation, before dropout
    Dense2D mask;       // dropout multipliers; empty when dropout inactive
};

struct GradientTape {
    std::vector<LayerCache> caches;
};

namespace detail {

inline void softmax_rows_in_blocks(Dense2D &a, const std::vector<Block> &blocks) {
    for (Index i = 0; i < a.rows(); ++i) {
        for (const auto &b : blocks) {
            auto seg = a.row(i).segment(b.offset, b.width);
            const double mx = seg.maxCoeff();
            seg = (seg.array() - mx).exp().matrix();
            seg /= seg.sum();
        }
    }
}

inline void apply_activation(const Layer &layer, Dense2D &a) {
    switch (layer.activation) {
    case Activation::identity: break;
    case Activation::relu: a = a.cwiseMax(0.0); break;
    case Activation::tanh: a = a.array().tanh().matrix(); break;
    case Activation::sigmoid: a = (1.0 / (1.0 + (-a.array()).exp())).matrix(); break;
    case Activation::softmax_blocks: softmax_rows_in_blocks(a, layer.softmax_blocks); break;
    }
}

// Gradient w.r.t. pre-activation given gradient w.r.t. activated output y.
inline Dense2D activation_backward(const Layer &layer, const Dense2D &y, const Dense2D &dy) {
    switch (layer.activation) {
    case Activation::identity: return dy;
    case Activation::relu: return (y.array() > 0.0).select(dy, 0.0);
    case Activation::tanh: return (dy.array() * (1.0 - y.array().square())).matrix();
    case Activation::sigmoid: return (dy.array() * y.array() * (1.0 - y.array())).matrix();
    case Activation::softmax_blocks: {
        Dense2D out = dy;
        for (Index i = 0; i < y.rows(); ++i) {
            for (const auto &b : layer.softmax_blocks) {
                const auto ys = y.row(i).segment(b.offset, b.width);
                const auto gs = dy.row(i).segment(b.offset, b.width);
                const double dot = ys.dot(gs);
                out.row(i).segment(b.offset, b.width) = (ys.array() * (gs.array() - dot)).matrix();
            }
        }
        return out;
    }
    }
    return dy;
}

}  // namespace detail

/// Runs one layer. In train mode with a positive dropout rate, `rng` draws the
/// inverted-dropout mask.
inline Dense2D forward_layer(const Layer &layer, const Dense2D &input, Mode mode, Rng *rng, LayerCache *cache) {
    if (input.cols() != layer.in_dim()) {
        throw ShapeError("layer '" + layer.name + "': input width " + std::to_string(input.cols()) + ", expected " +
                         std::to_string(layer.in_dim()));
    }
    Dense2D a = input * layer.weight.transpose();
    a.rowwise() += layer.bias.transpose();
    detail::apply_activation(layer, a);
    if (!a.allFinite()) {
        throw TrainingError("layer '" + layer.name + "': non-finite activation output");
    }
    Dense2D mask;
    Dense2D out;
    if (mode == Mode::train && layer.dropout_rate > 0.0) {
        if (rng == nullptr) throw ShapeError("layer '" + layer.name + "': dropout in train mode needs a generator");
        const double keep = 1.0 - layer.dropout_rate;
        mask.resize(a.rows(), a.cols());
        for (Index i = 0; i < mask.rows(); ++i) {
            for (Index j = 0; j < mask.cols(); ++j) mask(i, j) = uniform01(*rng) < keep ? 1.0 / keep : 0.0;
        }
        out = a.cwiseProduct(mask);
    } else {
        out = a;
    }
    if (cache != nullptr) {
        cache->input = input;
        cache->activated = std::move(a);
        cache->mask = std::move(mask);
    }
    return out;
}

/// Gradients of one layer. Returns the gradient w.r.t. the layer input.
inline Dense2D backward_layer(const Layer &layer, const LayerCache &cache, const Dense2D &output_grad, LayerGrad &grad) {
    if (output_grad.rows() != cache.activated.rows() || output_grad.cols() != cache.activated.cols()) {
        throw ShapeError("layer '" + layer.name + "': output gradient shape does not match the tape");
    }
    const Dense2D dy = cache.mask.size() > 0 ? Dense2D(output_grad.cwiseProduct(cache.mask)) : output_grad;
    const Dense2D da = detail::activation_backward(layer, cache.activated, dy);
    grad.weight.noalias() = da.transpose() * cache.input;
    grad.bias = da.colwise().sum().transpose();
    return da * layer.weight;
}

/// Sequential stack of layers.
inline std::pair<Dense2D, GradientTape> forward(const std::vector<Layer> &layers, const Dense2D &input, Mode mode, Rng *rng) {
    GradientTape tape;
    tape.caches.resize(layers.size());
    Dense2D x = input;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        x = forward_layer(layers[l], x, mode, rng, &tape.caches[l]);
    }
    return {std::move(x), std::move(tape)};
}

/// Backward through a stack recorded by `forward`. Returns per-layer parameter
/// gradients and the gradient w.r.t. the stack input.
inline std::pair<std::vector<LayerGrad>, Dense2D> backward(const std::vector<Layer> &layers, const GradientTape &tape,
                                                           const Dense2D &output_grad) {
    if (tape.caches.size() != layers.size()) throw ShapeError("tape does not match the layer stack");
    std::vector<LayerGrad> grads(layers.size());
    Dense2D g = output_grad;
    for (std::size_t l = layers.size(); l-- > 0;) {
        grads[l] = LayerGrad::zeros_like(layers[l]);
        g = backward_layer(layers[l], tape.caches[l], g, grads[l]);
    }
    return {std::move(grads), std::move(g)};
}

}  // namespace vaebgm::numerics

#endif
