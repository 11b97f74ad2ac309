#ifndef VAEBGM_NUMERICS_GRAD_CHECK_HPP
#define VAEBGM_NUMERICS_GRAD_CHECK_HPP

#include "vaebgm/numerics/layers.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace vaebgm::numerics {

/// A parameter block viewed as flat storage plus its analytic gradient.
struct ParamBlockRef {
    std::string name;
    std::span<double> values;
    std::span<const double> analytic;
};

struct BlockReport {
    std::string name;
    double max_relative_error = 0.0;
    bool pass = true;
};

struct GradCheckReport {
    std::vector<BlockReport> blocks;

    [[nodiscard]] bool pass() const {
        return std::all_of(blocks.begin(), blocks.end(), [](const auto &b) { return b.pass; });
    }
    [[nodiscard]] double max_relative_error() const {
        double m = 0.0;
        for (const auto &b : blocks) m = std::max(m, b.max_relative_error);
        return m;
    }
};

struct GradCheckOptions {
    double tolerance = 1e-4;
    double step = 1e-5;
    /// Denominator floor: entries whose gradients are both below it are compared
    /// in absolute terms against tolerance * floor.
    double scale_floor = 1e-4;
};

/// Central finite differences against analytic gradients, one report per block.
/// `loss` must be deterministic; values are restored after each probe.
inline GradCheckReport grad_check(std::span<const ParamBlockRef> blocks, const std::function<double()> &loss,
                                  const GradCheckOptions &opts = {}) {
    GradCheckReport report;
    for (const auto &block : blocks) {
        BlockReport br{block.name, 0.0, true};
        for (std::size_t i = 0; i < block.values.size(); ++i) {
            const double saved = block.values[i];
            block.values[i] = saved + opts.step;
            const double up = loss();
            block.values[i] = saved - opts.step;
            const double down = loss();
            block.values[i] = saved;
            const double numeric = (up - down) / (2.0 * opts.step);
            const double analytic = block.analytic[i];
            const double denom = std::max({std::abs(numeric), std::abs(analytic), opts.scale_floor});
            br.max_relative_error = std::max(br.max_relative_error, std::abs(numeric - analytic) / denom);
        }
        br.pass = br.max_relative_error < opts.tolerance;
        report.blocks.push_back(std::move(br));
    }
    return report;
}

/// Weight and bias blocks of each layer paired with their gradients.
inline std::vector<ParamBlockRef> layer_blocks(const std::vector<Layer *> &layers, const std::vector<LayerGrad> &grads) {
    std::vector<ParamBlockRef> out;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        auto &w = layers[l]->weight;
        auto &b = layers[l]->bias;
        out.push_back({layers[l]->name + ".weight", {w.data(), static_cast<std::size_t>(w.size())},
                       {grads[l].weight.data(), static_cast<std::size_t>(grads[l].weight.size())}});
        out.push_back({layers[l]->name + ".bias", {b.data(), static_cast<std::size_t>(b.size())},
                       {grads[l].bias.data(), static_cast<std::size_t>(grads[l].bias.size())}});
    }
    return out;
}

}  // namespace vaebgm::numerics

#endif
