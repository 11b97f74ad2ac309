#ifndef VAEBGM_NUMERICS_ADAM_HPP
#define VAEBGM_NUMERICS_ADAM_HPP

#include "vaebgm/core/error.hpp"
#include "vaebgm/numerics/layers.hpp"

#include <cmath>
#include <vector>

namespace vaebgm::numerics {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// First/second moment accumulators, one pair per layer.
struct AdamState {
    std::vector<LayerGrad> first;
    std::vector<LayerGrad> second;
    long long step = 0;
};

/// One bias-corrected adaptive-moment update of every layer in `params`.
/// Rejects non-finite gradients before touching any parameter.
inline void adam_step(const std::vector<Layer *> &params, const std::vector<LayerGrad> &grads, AdamState &state,
                      const AdamConfig &cfg) {
    if (grads.size() != params.size()) throw ShapeError("adam: gradient count does not match parameter count");
    for (std::size_t l = 0; l < params.size(); ++l) {
        if (grads[l].weight.rows() != params[l]->weight.rows() || grads[l].weight.cols() != params[l]->weight.cols() ||
            grads[l].bias.size() != params[l]->bias.size()) {
            throw ShapeError("adam: gradient shape mismatch for layer '" + params[l]->name + "'");
        }
        if (!grads[l].weight.allFinite() || !grads[l].bias.allFinite()) {
            throw TrainingError("adam: non-finite gradient in layer '" + params[l]->name + "'");
        }
    }
    if (state.first.empty()) {
        for (const auto *p : params) {
            state.first.push_back(LayerGrad::zeros_like(*p));
            state.second.push_back(LayerGrad::zeros_like(*p));
        }
    }
    ++state.step;
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    auto update = [&](auto &param, const auto &g, auto &m, auto &v) {
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
        param.array() -= cfg.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + cfg.epsilon);
    };
    for (std::size_t l = 0; l < params.size(); ++l) {
        update(params[l]->weight, grads[l].weight, state.first[l].weight, state.second[l].weight);
        update(params[l]->bias, grads[l].bias, state.first[l].bias, state.second[l].bias);
    }
}

}  // namespace vaebgm::numerics

#endif
