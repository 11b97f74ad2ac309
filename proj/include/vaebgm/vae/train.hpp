#ifndef VAEBGM_VAE_TRAIN_HPP
#define VAEBGM_VAE_TRAIN_HPP

#include "vaebgm/core/error.hpp"
#include "vaebgm/core/random.hpp"
#include "vaebgm/numerics/adam.hpp"
#include "vaebgm/vae/model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace vaebgm::vae {

/// Best-so-far tracker: stop once `patience` consecutive epochs fail to
/// improve on the best validation loss.
class EarlyStopping {
  public:
    explicit EarlyStopping(int patience) : patience_(patience) {}

    /// Records one epoch's validation loss; returns true when it is a new best.
    bool update(double loss) {
        ++epoch_;
        if (loss < best_) {
            best_ = loss;
            best_epoch_ = epoch_;
            stale_ = 0;
            return true;
        }
        ++stale_;
        return false;
    }

    [[nodiscard]] bool should_stop() const { return stale_ >= patience_; }
    [[nodiscard]] double best() const { return best_; }
    /// 1-based epoch of the best loss; 0 before any update.
    [[nodiscard]] int best_epoch() const { return best_epoch_; }

  private:
    int patience_;
    int epoch_ = 0;
    int best_epoch_ = 0;
    int stale_ = 0;
    double best_ = std::numeric_limits<double>::infinity();
};

struct TrainResult {
    VaeModel model;  // best-validation snapshot
    std::vector<double> train_loss;
    std::vector<double> val_loss;
    int stopped_epoch = 0;  // number of epochs run
    int best_epoch = 0;     // 1-based, 0 if no epoch ran
    double best_val_loss = std::numeric_limits<double>::infinity();
    std::uint64_t seed = 0;
};

/// Validation loss in infer mode with a fixed noise draw, so successive epochs
/// are compared on the same epsilon.
inline double validation_loss(const VaeModel &model, const Dense2D &val, const Dense2D &val_eps) {
    return elbo_loss_with_noise(model, val, val_eps, Mode::infer, nullptr).first.loss;
}

inline Dense2D standard_normal_matrix(Index rows, Index cols, Rng &rng) {
    Dense2D eps(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        for (Index j = 0; j < cols; ++j) eps(i, j) = standard_normal(rng);
    }
    return eps;
}

/// Mini-batch training with early stopping on the validation loss.
inline TrainResult train(VaeModel model, const Dense2D &train_x, const Dense2D &val_x, std::uint64_t seed) {
    const auto &cfg = model.config();
    model.check_input(train_x);
    model.check_input(val_x);
    if (train_x.rows() == 0 || val_x.rows() == 0) throw InputError("train: empty training or validation matrix");

    TrainResult res;
    res.seed = seed;
    res.model = model;
    auto noise_rng = make_rng({seed, 0x7a11ULL});
    auto val_rng = make_rng({seed, 0x7a1dULL});
    const Dense2D val_eps = standard_normal_matrix(val_x.rows(), model.latent_dim(), val_rng);
    numerics::AdamState adam;
    const numerics::AdamConfig adam_cfg{cfg.learning_rate};
    EarlyStopping stopper(cfg.early_stop_patience);

    const auto n = static_cast<std::size_t>(train_x.rows());
    const auto batch = static_cast<std::size_t>(cfg.batch_size);
    std::vector<std::size_t> order(n);
    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        auto shuffle_rng = make_rng({seed, static_cast<std::uint64_t>(epoch), 0x5bu});
        shuffle_in_place(order, shuffle_rng);
        double epoch_loss = 0.0;
        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < n; start += batch, ++batch_index) {
            const std::size_t stop = std::min(n, start + batch);
            const std::vector<std::size_t> rows(order.begin() + static_cast<std::ptrdiff_t>(start),
                                                order.begin() + static_cast<std::ptrdiff_t>(stop));
            const Dense2D xb = select_rows(train_x, rows);
            try {
                auto [value, tape] = elbo_loss(model, xb, noise_rng, Mode::train);
                epoch_loss += value.loss * static_cast<double>(rows.size());
                const auto grads = elbo_backward(model, tape);
                numerics::adam_step(model.parameters(), grads, adam, adam_cfg);
            } catch (const TrainingError &e) {
                throw TrainingError("seed " + std::to_string(seed) + ", epoch " + std::to_string(epoch) + ", batch " +
                                    std::to_string(batch_index) + ": " + e.what());
            }
        }
        res.train_loss.push_back(epoch_loss / static_cast<double>(n));
        const double vl = validation_loss(model, val_x, val_eps);
        if (!std::isfinite(vl)) {
            throw TrainingError("seed " + std::to_string(seed) + ", epoch " + std::to_string(epoch) + ": non-finite validation loss");
        }
        res.val_loss.push_back(vl);
        if (stopper.update(vl)) {
            res.model = model;
        }
        res.stopped_epoch = epoch;
        if (stopper.should_stop()) break;
    }
    res.best_epoch = stopper.best_epoch();
    res.best_val_loss = res.best_epoch > 0 ? stopper.best() : validation_loss(res.model, val_x, val_eps);
    return res;
}

struct SeedRun {
    std::uint64_t seed = 0;
    std::optional<TrainResult> result;  // empty when the run failed
    std::string error;
    bool flagged = false;  // among the best `keep_best`
};

/// Successful runs ranked by best validation loss (ties by seed), followed by failures.
struct MultiSeedResult {
    std::vector<SeedRun> runs;

    [[nodiscard]] std::vector<const SeedRun *> flagged() const {
        std::vector<const SeedRun *> out;
        for (const auto &r : runs) {
            if (r.flagged) out.push_back(&r);
        }
        return out;
    }
};

using TrainFn = std::function<TrainResult(std::uint64_t seed)>;

/// Ranks runs for seeds 0..n-1 and flags the best `keep_best`. A failed seed
/// is recorded and excluded; fewer than `keep_best` successes is an error.
inline MultiSeedResult rank_seed_runs(int seeds, int keep_best, const TrainFn &run_one) {
    MultiSeedResult out;
    std::vector<SeedRun> failed;
    for (int s = 0; s < seeds; ++s) {
        SeedRun run;
        run.seed = static_cast<std::uint64_t>(s);
        try {
            run.result = run_one(run.seed);
            out.runs.push_back(std::move(run));
        } catch (const std::exception &e) {
            run.error = e.what();
            failed.push_back(std::move(run));
        }
    }
    std::stable_sort(out.runs.begin(), out.runs.end(), [](const SeedRun &a, const SeedRun &b) {
        if (a.result->best_val_loss != b.result->best_val_loss) return a.result->best_val_loss < b.result->best_val_loss;
        return a.seed < b.seed;
    });
    if (static_cast<int>(out.runs.size()) < keep_best) {
        std::string msg = "only " + std::to_string(out.runs.size()) + " of " + std::to_string(seeds) +
                          " seeds trained successfully, need " + std::to_string(keep_best);
        for (const auto &f : failed) msg += "; seed " + std::to_string(f.seed) + ": " + f.error;
        throw TrainingError(msg);
    }
    for (int k = 0; k < keep_best; ++k) out.runs[static_cast<std::size_t>(k)].flagged = true;
    for (auto &f : failed) out.runs.push_back(std::move(f));
    return out;
}

inline MultiSeedResult multi_seed_train(const std::shared_ptr<const data::TableSchema> &schema, const Dense2D &train_x,
                                        const Dense2D &val_x, const VaeConfig &config) {
    config.validate();
    return rank_seed_runs(config.seeds, config.keep_best, [&](std::uint64_t seed) {
        return train(VaeModel(schema, config, seed), train_x, val_x, seed);
    });
}

}  // namespace vaebgm::vae

#endif
