#ifndef VAEBGM_EVAL_REPORT_HPP
#define VAEBGM_EVAL_REPORT_HPP

#include "vaebgm/core/kvfile.hpp"
#include "vaebgm/core/text.hpp"
#include "vaebgm/eval/discriminator.hpp"
#include "vaebgm/eval/similarity.hpp"
#include "vaebgm/eval/stats.hpp"
#include "vaebgm/eval/utility.hpp"

#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace vaebgm::eval {

inline constexpr const char *kConcordanceNote =
    "c_index is Harrell's pairwise concordance of Cox linear predictors; the time-dependent (Antolini) variant is not computed";

/// Everything measured for one synthetic table against its real reference.
struct EvalReport {
    std::string mode;  // bgm, prior or any caller-chosen tag
    KeyValueFile meta;  // config hash, seeds, input hashes
    DiscriminatorResult discriminator;
    SimilarityResult similarity;
    std::optional<UtilityResult> utility;
};

/// Runs the discriminator, similarity and (when the schema designates a task)
/// utility evaluations.
inline EvalReport evaluate(const data::DataMatrix &real_train, const data::DataMatrix &real_test, const data::DataMatrix &syn,
                           const EvalConfig &cfg, std::string mode) {
    EvalReport r;
    r.mode = std::move(mode);
    r.meta.set("eval_seed", std::to_string(cfg.seed));
    r.meta.set("n_eval_seeds", std::to_string(cfg.n_eval_seeds));
    r.meta.set("ci_level", format_double(cfg.ci_level));
    r.discriminator = discriminator_score(real_train, syn, cfg);
    r.similarity = similarity(real_train, syn);
    const auto &schema = *real_train.schema;
    if (schema.label || schema.survival) r.utility = utility_eval(real_train, real_test, syn, cfg);
    return r;
}

namespace detail {

inline std::string fmt(double v) { return format_fixed(v, 4); }

inline std::string interval_text(const Interval &ci) { return "(" + fmt(ci.lower) + ", " + fmt(ci.upper) + ")"; }

inline void put_estimate(KeyValueFile &kv, const std::string &prefix, const Estimate &e) {
    kv.set(prefix + ".mean", format_double(e.mean));
    kv.set(prefix + ".ci_lower", format_double(e.ci.lower));
    kv.set(prefix + ".ci_upper", format_double(e.ci.upper));
    std::string seeds;
    for (std::size_t i = 0; i < e.per_seed.size(); ++i) seeds += (i ? "," : "") + format_double(e.per_seed[i]);
    kv.set(prefix + ".per_seed", seeds);
}

inline std::string per_seed_text(const Estimate &e) {
    std::string s;
    for (std::size_t i = 0; i < e.per_seed.size(); ++i) s += (i ? " " : "") + fmt(e.per_seed[i]);
    return s;
}

}  // namespace detail

/// Flat machine-readable form. Keys:
///   meta.*                          run metadata
///   discriminator.accuracy.{mean,ci_lower,ci_upper,per_seed}
///   discriminator.wilson.{lower,upper}, discriminator.test_rows
///   similarity.{column_shape,pair_trend,overall}
///   similarity.column.<name>, similarity.pair.<a>.<b>
///   utility.{task,metric}, utility.real_trained.*, utility.synthetic_trained.*
inline KeyValueFile to_kv(const EvalReport &r) {
    KeyValueFile kv;
    kv.set("mode", r.mode);
    for (const auto &[k, v] : r.meta.entries()) kv.set("meta." + k, v);
    detail::put_estimate(kv, "discriminator.accuracy", r.discriminator.accuracy);
    kv.set("discriminator.wilson.lower", format_double(r.discriminator.wilson.lower));
    kv.set("discriminator.wilson.upper", format_double(r.discriminator.wilson.upper));
    kv.set("discriminator.test_rows", std::to_string(r.discriminator.test_rows));
    kv.set("similarity.column_shape", format_double(r.similarity.column_shape));
    kv.set("similarity.pair_trend", format_double(r.similarity.pair_trend));
    kv.set("similarity.overall", format_double(r.similarity.overall));
    for (std::size_t k = 0; k < r.similarity.columns.size(); ++k) {
        kv.set("similarity.column." + r.similarity.columns[k], format_double(r.similarity.column_shapes[k]));
    }
    for (const auto &p : r.similarity.pairs) kv.set("similarity.pair." + p.first + "." + p.second, format_double(p.score));
    if (r.utility) {
        kv.set("utility.task", to_string(r.utility->task));
        kv.set("utility.metric", r.utility->metric);
        detail::put_estimate(kv, "utility.real_trained", r.utility->real_trained);
        detail::put_estimate(kv, "utility.synthetic_trained", r.utility->synthetic_trained);
        if (r.utility->task == UtilityTask::survival) kv.set("utility.note", kConcordanceNote);
    }
    return kv;
}

inline void write_text(std::ostream &out, const EvalReport &r) {
    const double level = r.meta.get("ci_level") ? std::stod(*r.meta.get("ci_level")) : 0.99;
    const std::string pct = format_double(100.0 * level) + "%";
    out << "# evaluation report (mode: " << r.mode << ")\n";
    if (r.utility && r.utility->task == UtilityTask::survival) out << "# note: " << kConcordanceNote << "\n";
    for (const auto &[k, v] : r.meta.entries()) out << "# " << k << ": " << v << "\n";
    const auto &d = r.discriminator;
    out << "\n[resemblance: random forest discriminator]\n";
    out << "accuracy             " << detail::fmt(d.accuracy.mean) << "  " << pct << " t-CI " << detail::interval_text(d.accuracy.ci)
        << "  " << pct << " Wilson " << detail::interval_text(d.wilson) << "\n";
    out << "per seed             " << detail::per_seed_text(d.accuracy) << "\n";
    out << "test rows per seed   " << d.test_rows << "\n";
    const auto &s = r.similarity;
    out << "\n[similarity]\n";
    out << "column shape         " << detail::fmt(s.column_shape) << "\n";
    out << "pair trend           " << detail::fmt(s.pair_trend) << "\n";
    out << "overall              " << detail::fmt(s.overall) << "\n";
    for (std::size_t k = 0; k < s.columns.size(); ++k) out << "  column " << s.columns[k] << "  " << detail::fmt(s.column_shapes[k]) << "\n";
    if (r.utility) {
        const auto &u = *r.utility;
        out << "\n[utility: " << to_string(u.task) << ", metric " << u.metric << "]\n";
        out << "real-trained         " << detail::fmt(u.real_trained.mean) << "  " << pct << " t-CI " << detail::interval_text(u.real_trained.ci)
            << "\n";
        out << "synthetic-trained    " << detail::fmt(u.synthetic_trained.mean) << "  " << pct << " t-CI "
            << detail::interval_text(u.synthetic_trained.ci) << "\n";
        for (const auto &n : u.notes) out << "note: " << n << "\n";
    }
}

inline std::string text_of(const EvalReport &r) {
    std::ostringstream os;
    write_text(os, r);
    return os.str();
}

/// Headline numbers of one report, in a fixed order.
inline std::vector<std::pair<std::string, double>> headline_metrics(const EvalReport &r) {
    std::vector<std::pair<std::string, double>> m{
        {"discriminator_accuracy", r.discriminator.accuracy.mean},
        {"column_shape", r.similarity.column_shape},
        {"pair_trend", r.similarity.pair_trend},
        {"overall_similarity", r.similarity.overall},
    };
    if (r.utility) {
        m.emplace_back("utility_real_trained", r.utility->real_trained.mean);
        m.emplace_back("utility_synthetic_trained", r.utility->synthetic_trained.mean);
    }
    return m;
}

/// Reports of several generator seeds for one mode, summarized by a t interval per metric.
struct ModeAggregate {
    std::string mode;
    std::vector<std::uint64_t> generator_seeds;
    std::vector<EvalReport> runs;
    std::vector<std::pair<std::string, Estimate>> metrics;
};

inline ModeAggregate aggregate(std::string mode, std::vector<std::uint64_t> seeds, std::vector<EvalReport> runs, double level) {
    if (runs.empty()) throw InputError("aggregate: no runs");
    ModeAggregate a{std::move(mode), std::move(seeds), std::move(runs), {}};
    const auto names = headline_metrics(a.runs.front());
    for (std::size_t m = 0; m < names.size(); ++m) {
        std::vector<double> values;
        for (const auto &r : a.runs) values.push_back(headline_metrics(r).at(m).second);
        a.metrics.emplace_back(names[m].first, t_estimate(std::move(values), level));
    }
    return a;
}

inline const Estimate &metric(const ModeAggregate &a, const std::string &name) {
    for (const auto &[n, e] : a.metrics) {
        if (n == name) return e;
    }
    throw InputError("aggregate has no metric '" + name + "'");
}

/// Side-by-side bgm vs prior comparison.
struct BenchmarkReport {
    KeyValueFile meta;
    std::vector<ModeAggregate> modes;
    std::optional<MannWhitneyResult> latent_test;  // nearest-real-neighbour distances, bgm vs prior
    double latent_nn_bgm = 0.0;
    double latent_nn_prior = 0.0;
};

inline KeyValueFile to_kv(const BenchmarkReport &b) {
    KeyValueFile kv;
    for (const auto &[k, v] : b.meta.entries()) kv.set("meta." + k, v);
    for (const auto &a : b.modes) {
        std::string seeds;
        for (std::size_t i = 0; i < a.generator_seeds.size(); ++i) seeds += (i ? "," : "") + std::to_string(a.generator_seeds[i]);
        kv.set(a.mode + ".generator_seeds", seeds);
        for (const auto &[n, e] : a.metrics) detail::put_estimate(kv, a.mode + "." + n, e);
    }
    if (b.latent_test) {
        kv.set("latent.nn_sq_mean.bgm", format_double(b.latent_nn_bgm));
        kv.set("latent.nn_sq_mean.prior", format_double(b.latent_nn_prior));
        kv.set("latent.mann_whitney.u", format_double(b.latent_test->u));
        kv.set("latent.mann_whitney.z", format_double(b.latent_test->z));
        kv.set("latent.mann_whitney.p_value", format_double(b.latent_test->p_value));
    }
    return kv;
}

inline void write_text(std::ostream &out, const BenchmarkReport &b) {
    out << "# benchmark report: bgm vs prior sampling\n";
    out << "# note: " << kConcordanceNote << "\n";
    for (const auto &[k, v] : b.meta.entries()) out << "# " << k << ": " << v << "\n";
    if (b.modes.empty()) return;
    out << "\n" << std::string(28, ' ');
    for (const auto &a : b.modes) out << a.mode << std::string(a.mode.size() < 30 ? 30 - a.mode.size() : 1, ' ');
    out << "\n";
    for (std::size_t m = 0; m < b.modes.front().metrics.size(); ++m) {
        const auto &name = b.modes.front().metrics[m].first;
        out << name << std::string(name.size() < 28 ? 28 - name.size() : 1, ' ');
        for (const auto &a : b.modes) {
            const auto &e = metric(a, name);
            const std::string cell = detail::fmt(e.mean) + " " + detail::interval_text(e.ci);
            out << cell << std::string(cell.size() < 30 ? 30 - cell.size() : 1, ' ');
        }
        out << "\n";
    }
    for (const auto &a : b.modes) {
        out << "\n[" << a.mode << " per generator seed]\n";
        for (std::size_t i = 0; i < a.runs.size(); ++i) {
            out << "seed " << a.generator_seeds[i] << ":";
            for (const auto &[n, v] : headline_metrics(a.runs[i])) out << " " << n << "=" << detail::fmt(v);
            out << "\n";
        }
    }
    if (b.latent_test) {
        out << "\n[latent nearest-real-neighbour squared distance]\n";
        out << "bgm mean " << detail::fmt(b.latent_nn_bgm) << ", prior mean " << detail::fmt(b.latent_nn_prior)
            << ", one-sided Mann-Whitney z " << detail::fmt(b.latent_test->z) << ", p " << format_double(b.latent_test->p_value) << "\n";
    }
}

inline std::string text_of(const BenchmarkReport &b) {
    std::ostringstream os;
    write_text(os, b);
    return os.str();
}

}  // namespace vaebgm::eval

#endif
