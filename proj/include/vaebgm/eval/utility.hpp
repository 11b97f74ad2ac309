#ifndef VAEBGM_EVAL_UTILITY_HPP
#define VAEBGM_EVAL_UTILITY_HPP

#include "vaebgm/core/random.hpp"
#include "vaebgm/data/encode.hpp"
#include "vaebgm/eval/cox.hpp"
#include "vaebgm/eval/discriminator.hpp"
#include "vaebgm/eval/forest.hpp"
#include "vaebgm/eval/similarity.hpp"
#include "vaebgm/eval/stats.hpp"

#include <string>
#include <vector>

namespace vaebgm::eval {

enum class UtilityTask { classification, survival };

inline std::string to_string(UtilityTask t) { return t == UtilityTask::classification ? "classification" : "survival"; }

struct UtilityResult {
    UtilityTask task = UtilityTask::classification;
    std::string metric;  // accuracy or c_index
    Estimate real_trained;
    Estimate synthetic_trained;
    std::vector<std::string> notes;
};

/// Encoded feature columns with the column blocks in `excluded` removed.
inline Dense2D feature_block(const data::DataMatrix &m, const std::vector<std::string> &excluded) {
    const auto &schema = *m.schema;
    const auto offsets = schema.encoded_offsets();
    std::vector<Index> keep;
    for (std::size_t k = 0; k < schema.columns.size(); ++k) {
        const auto &c = schema.columns[k];
        if (std::find(excluded.begin(), excluded.end(), c.name) != excluded.end()) continue;
        for (std::size_t w = 0; w < c.encoded_width(); ++w) keep.push_back(static_cast<Index>(offsets[k] + w));
    }
    Dense2D out(m.values.rows(), static_cast<Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j) out.col(static_cast<Index>(j)) = m.values.col(keep[j]);
    return out;
}

/// Level codes of a discrete column.
inline std::vector<int> column_codes(const data::DataMatrix &m, const std::string &name) {
    const auto k = m.schema->column_index(name);
    if (k < 0) throw InputError("unknown column '" + name + "'");
    return column_view(m, static_cast<std::size_t>(k)).codes;
}

/// Raw values of a numeric column.
inline std::vector<double> column_values(const data::DataMatrix &m, const std::string &name) {
    const auto k = m.schema->column_index(name);
    if (k < 0) throw InputError("unknown column '" + name + "'");
    const auto &c = m.schema->columns[static_cast<std::size_t>(k)];
    auto v = column_view(m, static_cast<std::size_t>(k)).values;
    for (double &x : v) x = x * c.std + c.mean;
    return v;
}

/// Forest accuracy on the test rows. A training set holding one class yields
/// the constant classifier for that class.
inline double classification_accuracy(const Dense2D &x_train, const std::vector<int> &y_train, const Dense2D &x_test,
                                      const std::vector<int> &y_test, const ForestConfig &fc) {
    const bool single = std::all_of(y_train.begin(), y_train.end(), [&](int v) { return v == y_train.front(); });
    if (single) return accuracy(std::vector<int>(y_test.size(), y_train.front()), y_test);
    RandomForest forest;
    forest.fit(x_train, y_train, fc);
    return accuracy(forest.predict(x_test), y_test);
}

/// Survival covariates: one-hot blocks lose their first level, every column is
/// standardized with training moments, and columns constant in training are dropped.
class CoxDesign {
  public:
    CoxDesign(const data::DataMatrix &train, const std::vector<std::string> &excluded) {
        const auto &schema = *train.schema;
        const auto offsets = schema.encoded_offsets();
        std::vector<Index> candidate;
        for (std::size_t k = 0; k < schema.columns.size(); ++k) {
            const auto &c = schema.columns[k];
            if (std::find(excluded.begin(), excluded.end(), c.name) != excluded.end()) continue;
            const std::size_t first = c.kind == data::ColumnKind::categorical ? 1 : 0;
            for (std::size_t w = first; w < c.encoded_width(); ++w) candidate.push_back(static_cast<Index>(offsets[k] + w));
        }
        const double n = static_cast<double>(train.values.rows());
        for (Index j : candidate) {
            const double mean = train.values.col(j).mean();
            const double var = (train.values.col(j).array() - mean).square().sum() / n;
            if (var > 1e-12) {
                cols_.push_back(j);
                mean_.push_back(mean);
                sd_.push_back(std::sqrt(var));
            }
        }
    }

    [[nodiscard]] Dense2D apply(const data::DataMatrix &m) const {
        Dense2D out(m.values.rows(), static_cast<Index>(cols_.size()));
        for (std::size_t j = 0; j < cols_.size(); ++j) {
            out.col(static_cast<Index>(j)) = (m.values.col(cols_[j]).array() - mean_[j]) / sd_[j];
        }
        return out;
    }

    [[nodiscard]] std::size_t width() const { return cols_.size(); }

  private:
    std::vector<Index> cols_;
    std::vector<double> mean_;
    std::vector<double> sd_;
};

struct SurvivalData {
    std::vector<double> time;
    std::vector<int> event;
};

/// The event column's second level marks an observed event.
inline SurvivalData survival_outcome(const data::DataMatrix &m) {
    const auto &s = *m.schema->survival;
    return {column_values(m, s.time_column), column_codes(m, s.event_column)};
}

/// Cox model fitted on `train`; risk scores for `test`. Training sets without
/// events give a zero model.
inline Vector cox_risk(const data::DataMatrix &train, const data::DataMatrix &test, std::vector<std::string> &notes,
                       const std::string &tag) {
    const auto &s = *train.schema->survival;
    const CoxDesign design(train, {s.time_column, s.event_column});
    const auto outcome = survival_outcome(train);
    if (design.width() == 0 || std::none_of(outcome.event.begin(), outcome.event.end(), [](int e) { return e != 0; })) {
        notes.push_back(tag + ": no events or no usable covariates; risk set to zero");
        return Vector::Zero(test.values.rows());
    }
    const auto model = fit_coxph(design.apply(train), outcome.time, outcome.event);
    if (!model.converged()) {
        notes.push_back(tag + ": cox fit " + to_string(model.status) + " after " + std::to_string(model.iterations) +
                        " iterations (gradient norm " + format_double(model.gradient_norm) + ")");
    }
    return model.risk(design.apply(test));
}

/// Train-on-real and train-on-synthetic scores against the same real test rows.
/// Classification varies the forest seed across evaluation seeds; survival
/// bootstraps the test rows.
inline UtilityResult utility_eval(const data::DataMatrix &real_train, const data::DataMatrix &real_test, const data::DataMatrix &syn_train,
                                  const EvalConfig &cfg) {
    cfg.validate();
    require_same_schema(real_train, real_test);
    require_same_schema(real_train, syn_train);
    const auto &schema = *real_train.schema;
    UtilityResult r;
    std::vector<double> real_scores, syn_scores;
    if (schema.label) {
        r.task = UtilityTask::classification;
        r.metric = "accuracy";
        const std::vector<std::string> excluded{*schema.label};
        const Dense2D xr = feature_block(real_train, excluded);
        const Dense2D xs = feature_block(syn_train, excluded);
        const Dense2D xt = feature_block(real_test, excluded);
        const auto yr = column_codes(real_train, *schema.label);
        const auto ys = column_codes(syn_train, *schema.label);
        const auto yt = column_codes(real_test, *schema.label);
        for (int s = 0; s < cfg.n_eval_seeds; ++s) {
            ForestConfig fc = cfg.forest;
            fc.seed = derive_seed({cfg.seed, static_cast<std::uint64_t>(s), 0x5eedULL});
            real_scores.push_back(classification_accuracy(xr, yr, xt, yt, fc));
            syn_scores.push_back(classification_accuracy(xs, ys, xt, yt, fc));
        }
    } else if (schema.survival) {
        r.task = UtilityTask::survival;
        r.metric = "c_index";
        const Vector risk_real = cox_risk(real_train, real_test, r.notes, "real-trained");
        const Vector risk_syn = cox_risk(syn_train, real_test, r.notes, "synthetic-trained");
        const auto outcome = survival_outcome(real_test);
        const std::size_t n = outcome.time.size();
        for (int s = 0; s < cfg.n_eval_seeds; ++s) {
            auto rng = make_rng({cfg.seed, static_cast<std::uint64_t>(s), 0xb007ULL});
            std::vector<double> t(n), a(n), b(n);
            std::vector<int> e(n);
            for (std::size_t i = 0; i < n; ++i) {
                const auto k = uniform_index(rng, n);
                t[i] = outcome.time[k];
                e[i] = outcome.event[k];
                a[i] = risk_real(static_cast<Index>(k));
                b[i] = risk_syn(static_cast<Index>(k));
            }
            real_scores.push_back(c_index(a, t, e));
            syn_scores.push_back(c_index(b, t, e));
        }
    } else {
        throw InputError("utility evaluation needs a label or survival columns in the schema");
    }
    r.real_trained = t_estimate(std::move(real_scores), cfg.ci_level);
    r.synthetic_trained = t_estimate(std::move(syn_scores), cfg.ci_level);
    return r;
}

}  // namespace vaebgm::eval

#endif
