#ifndef VAEBGM_EVAL_DISCRIMINATOR_HPP
#define VAEBGM_EVAL_DISCRIMINATOR_HPP

#include "vaebgm/core/random.hpp"
#include "vaebgm/data/encode.hpp"
#include "vaebgm/eval/forest.hpp"
#include "vaebgm/eval/similarity.hpp"
#include "vaebgm/eval/stats.hpp"

#include <cmath>
#include <utility>
#include <vector>

namespace vaebgm::eval {

struct EvalConfig {
    int n_eval_seeds = 10;
    double ci_level = 0.99;
    double train_fraction = 0.8;
    std::uint64_t seed = 0;
    ForestConfig forest;

    void validate() const {
        if (n_eval_seeds < 1) throw InputError("evaluation: n_eval_seeds must be >= 1");
        if (!(ci_level > 0.0 && ci_level < 1.0)) throw InputError("evaluation: ci_level must lie in (0, 1)");
        if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw InputError("evaluation: train_fraction must lie in (0, 1)");
        forest.validate();
    }
};

/// Per-class shuffled split; each class contributes round(fraction * size) rows
/// to the training side.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_split(const std::vector<int> &labels, double fraction,
                                                                                      Rng &rng) {
    int n_classes = 0;
    for (int l : labels) n_classes = std::max(n_classes, l + 1);
    std::vector<std::size_t> train, test;
    for (int c = 0; c < n_classes; ++c) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == c) members.push_back(i);
        }
        shuffle_in_place(members, rng);
        const auto n_train = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(members.size())));
        train.insert(train.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_train));
        test.insert(test.end(), members.begin() + static_cast<std::ptrdiff_t>(n_train), members.end());
    }
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {train, test};
}

struct DiscriminatorResult {
    Estimate accuracy;     // Student-t interval across evaluation seeds
    Interval wilson;       // binomial interval on the mean accuracy over one test split
    std::size_t test_rows = 0;
};

/// Real rows are labelled 0, synthetic rows 1. Each evaluation seed draws a
/// fresh stratified split and forest.
inline DiscriminatorResult discriminator_score(const data::DataMatrix &real, const data::DataMatrix &syn, const EvalConfig &cfg) {
    cfg.validate();
    require_same_schema(real, syn);
    if (real.row_count() == 0 || syn.row_count() == 0) throw InputError("discriminator: empty table");
    const Dense2D x = vstack(real.values, syn.values);
    std::vector<int> y(real.row_count(), 0);
    y.resize(real.row_count() + syn.row_count(), 1);
    std::vector<double> acc;
    DiscriminatorResult r;
    for (int s = 0; s < cfg.n_eval_seeds; ++s) {
        auto rng = make_rng({cfg.seed, static_cast<std::uint64_t>(s), 0xd15cULL});
        const auto [train, test] = stratified_split(y, cfg.train_fraction, rng);
        std::vector<int> y_train, y_test;
        for (auto i : train) y_train.push_back(y[i]);
        for (auto i : test) y_test.push_back(y[i]);
        ForestConfig fc = cfg.forest;
        fc.seed = derive_seed({cfg.seed, static_cast<std::uint64_t>(s), 0xf00dULL});
        RandomForest forest;
        forest.fit(select_rows(x, train), y_train, fc);
        acc.push_back(accuracy(forest.predict(select_rows(x, test)), y_test));
        r.test_rows = test.size();
    }
    r.accuracy = t_estimate(std::move(acc), cfg.ci_level);
    const double n = static_cast<double>(r.test_rows);
    r.wilson = wilson_interval(r.accuracy.mean * n, n, cfg.ci_level);
    return r;
}

}  // namespace vaebgm::eval

#endif
