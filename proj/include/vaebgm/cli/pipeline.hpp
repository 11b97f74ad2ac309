#ifndef VAEBGM_CLI_PIPELINE_HPP
#define VAEBGM_CLI_PIPELINE_HPP

#include "vaebgm/cli/config.hpp"
#include "vaebgm/core/container.hpp"
#include "vaebgm/core/hash.hpp"
#include "vaebgm/data/encode.hpp"
#include "vaebgm/data/schema.hpp"
#include "vaebgm/data/table.hpp"
#include "vaebgm/data/toy.hpp"
#include "vaebgm/eval/report.hpp"
#include "vaebgm/generation/generator.hpp"
#include "vaebgm/vae/checkpoint.hpp"
#include "vaebgm/vae/train.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace vaebgm::cli {

inline std::string hash_file(const fs::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path.string() + "'");
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return hash_hex(bytes);
}

inline void write_text_file(const fs::path &path, const std::string &text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    out << text;
}

inline void write_kv_file(const fs::path &path, const KeyValueFile &kv) { write_text_file(path, kv.str()); }

inline fs::path provenance_path(const fs::path &file) { return fs::path(file.string() + ".provenance"); }

/// Key/value metadata shared by every output of a run.
inline KeyValueFile run_meta(const RunConfig &cfg) {
    KeyValueFile kv;
    kv.set("config_hash", cfg.hash());
    kv.set("master_seed", std::to_string(cfg.seed));
    return kv;
}

inline std::string seed_tag(std::uint64_t seed) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "seed_%02llu", static_cast<unsigned long long>(seed));
    return buf;
}

/// The real table, its fitted schema and the deterministic row partitions:
/// a held-out test share for utility scoring, and a train/validation split of
/// the remainder for the VAE.
struct PreparedData {
    data::RawTable raw;
    std::shared_ptr<const data::TableSchema> schema;
    data::DataMatrix real_train;
    data::DataMatrix real_test;
    data::DataMatrix vae_train;
    data::DataMatrix vae_val;
    std::string data_hash;
};

inline data::SchemaHints load_hints(const RunConfig &cfg) {
    const auto p = cfg.schema_path();
    return p ? data::SchemaHints::load(*p) : data::SchemaHints{};
}

inline PreparedData prepare_data(const RunConfig &cfg) {
    cfg.validate();
    PreparedData d;
    d.raw = data::read_table(cfg.data_path());
    d.data_hash = hash_file(cfg.data_path());
    const auto all = data::fit_encode(d.raw, data::infer_schema(d.raw, load_hints(cfg)));
    d.schema = all.schema;
    const auto [train_rows, test_rows] = data::split_indices(all.row_count(), 1.0 - cfg.test_fraction, derive_seed({cfg.seed, 0x401dULL}));
    d.real_train = data::select_rows(all, train_rows);
    d.real_test = data::select_rows(all, test_rows);
    const auto [fit_rows, val_rows] = data::split_indices(d.real_train.row_count(), 1.0 - cfg.val_fraction, derive_seed({cfg.seed, 0x7a1ULL}));
    d.vae_train = data::select_rows(d.real_train, fit_rows);
    d.vae_val = data::select_rows(d.real_train, val_rows);
    return d;
}

/// Identifies everything a trained checkpoint depends on.
inline std::string training_hash(const RunConfig &cfg, const PreparedData &d) {
    KeyValueFile kv;
    cfg.vae.write_to(kv);
    kv.set("schema_hash", d.schema->hash());
    kv.set("data_hash", d.data_hash);
    kv.set("seed", std::to_string(cfg.seed));
    kv.set("eval.test_fraction", format_double(cfg.test_fraction));
    kv.set("train.val_fraction", format_double(cfg.val_fraction));
    return hash_hex(kv.str());
}

// ------------------------------------------------------------------ train

struct TrainedSeed {
    std::uint64_t seed = 0;
    vae::VaeModel model;
    double best_val_loss = 0.0;
};

struct TrainOutcome {
    std::vector<TrainedSeed> flagged;  // best first
    fs::path report_path;
};

inline fs::path checkpoint_dir(const RunConfig &cfg) { return cfg.out_dir() / "checkpoints"; }

inline void write_loss_history(const fs::path &path, const vae::TrainResult &r) {
    std::ostringstream os;
    os << "epoch,train_loss,val_loss\n";
    for (std::size_t e = 0; e < r.train_loss.size(); ++e) {
        os << e + 1 << ',' << format_double(r.train_loss[e]) << ',' << format_double(r.val_loss[e]) << '\n';
    }
    write_text_file(path, os.str());
}

inline std::uint64_t bgm_seed(const RunConfig &cfg, std::uint64_t vae_seed) { return derive_seed({cfg.seed, vae_seed, 0xb6ULL}); }

inline std::uint64_t generation_seed(const RunConfig &cfg, std::uint64_t vae_seed) { return derive_seed({cfg.seed, vae_seed, 0x6e17ULL}); }

inline gen::GeneratorBundle make_bundle(const RunConfig &cfg, const vae::VaeModel &model, std::uint64_t vae_seed, const PreparedData &d) {
    auto b = gen::build_generator(model, d.vae_train.values, cfg.bgm, bgm_seed(cfg, vae_seed), cfg.latent_source);
    b.provenance.set("vae_seed", std::to_string(vae_seed));
    return b;
}

/// Re-ranks successful seeds by the discriminator accuracy of bgm-mode samples
/// against the validation rows (lower is better) and re-flags the best.
inline void rank_by_discriminator(vae::MultiSeedResult &result, const RunConfig &cfg, const PreparedData &d) {
    std::vector<std::pair<double, std::size_t>> scored;
    for (std::size_t i = 0; i < result.runs.size(); ++i) {
        auto &run = result.runs[i];
        run.flagged = false;
        if (!run.result) continue;
        const auto bundle = make_bundle(cfg, run.result->model, run.seed, d);
        const auto syn = gen::generate(bundle, d.vae_val.row_count(), gen::GenerationMode::bgm, generation_seed(cfg, run.seed));
        auto ecfg = cfg.eval_config();
        ecfg.seed = derive_seed({cfg.seed, run.seed, 0x5e1ULL});
        const double acc = eval::discriminator_score(d.vae_val, data::encode(syn.table, d.schema), ecfg).accuracy.mean;
        log_info("selection: seed " + std::to_string(run.seed) + " discriminator accuracy " + format_fixed(acc, 4));
        scored.emplace_back(acc, i);
    }
    std::stable_sort(scored.begin(), scored.end(), [&](const auto &a, const auto &b) {
        return a.first != b.first ? a.first < b.first : result.runs[a.second].seed < result.runs[b.second].seed;
    });
    std::vector<vae::SeedRun> ranked;
    for (std::size_t k = 0; k < scored.size(); ++k) {
        ranked.push_back(std::move(result.runs[scored[k].second]));
        ranked.back().flagged = static_cast<int>(k) < cfg.vae.keep_best;
    }
    for (auto &run : result.runs) {
        if (!run.result) ranked.push_back(std::move(run));
    }
    result.runs = std::move(ranked);
}

/// Multi-seed training; every checkpoint and loss history is kept and the
/// best `keep_best` seeds are flagged in the summary.
inline TrainOutcome cmd_train(const RunConfig &cfg, const PreparedData &d) {
    const auto dir = checkpoint_dir(cfg);
    fs::create_directories(dir);
    const std::string thash = training_hash(cfg, d);
    write_kv_file(cfg.out_dir() / "schema.kv", d.schema->to_kv());
    log_info("training " + std::to_string(cfg.vae.seeds) + " seeds on " + std::to_string(d.vae_train.row_count()) + " rows");
    auto result = vae::multi_seed_train(d.schema, d.vae_train.values, d.vae_val.values, cfg.vae);
    if (cfg.vae.selection == vae::SeedSelection::discriminator) rank_by_discriminator(result, cfg, d);

    KeyValueFile summary = run_meta(cfg);
    summary.set("train_hash", thash);
    summary.set("selection", vae::to_string(cfg.vae.selection));
    std::ostringstream report;
    report << "# training report\n";
    for (const auto &[k, v] : summary.entries()) report << "# " << k << ": " << v << "\n";
    report << "\nrank  seed  status   best_val_loss      best_epoch  epochs_run  flagged\n";
    TrainOutcome out;
    std::string flagged_list;
    for (std::size_t rank = 0; rank < result.runs.size(); ++rank) {
        const auto &run = result.runs[rank];
        const auto tag = seed_tag(run.seed);
        char line[160];
        if (run.result) {
            const auto &r = *run.result;
            Container c;
            vae::write_vae(c, r.model);
            auto &p = c.add_section("provenance");
            p.fields = run_meta(cfg);
            p.fields.set("train_hash", thash);
            p.fields.set("seed", std::to_string(run.seed));
            p.fields.set("rank", std::to_string(rank));
            p.fields.set("flagged", run.flagged ? "1" : "0");
            p.fields.set("best_val_loss", format_double(r.best_val_loss));
            p.fields.set("best_epoch", std::to_string(r.best_epoch));
            p.fields.set("epochs_run", std::to_string(r.stopped_epoch));
            c.save(dir / (tag + ".ckpt"));
            write_loss_history(dir / (tag + ".loss.csv"), r);
            summary.set(tag + ".status", "ok");
            summary.set(tag + ".best_val_loss", format_double(r.best_val_loss));
            std::snprintf(line, sizeof line, "%4zu  %4llu  ok       %-17s  %10d  %10d  %s\n", rank, static_cast<unsigned long long>(run.seed),
                          format_fixed(r.best_val_loss, 6).c_str(), r.best_epoch, r.stopped_epoch, run.flagged ? "yes" : "no");
            if (run.flagged) {
                out.flagged.push_back({run.seed, r.model, r.best_val_loss});
                flagged_list += (flagged_list.empty() ? "" : ",") + std::to_string(run.seed);
            }
        } else {
            summary.set(tag + ".status", "failed");
            summary.set(tag + ".error", run.error);
            std::snprintf(line, sizeof line, "   -  %4llu  failed   %s\n", static_cast<unsigned long long>(run.seed), run.error.c_str());
        }
        report << line;
    }
    summary.set("flagged", flagged_list);
    write_kv_file(cfg.out_dir() / "train_summary.kv", summary);
    out.report_path = cfg.out_dir() / "train_report.txt";
    write_text_file(out.report_path, report.str());
    return out;
}

/// Reloads the flagged checkpoints of an earlier run after checking that they
/// were produced from the same data, schema and training settings.
inline TrainOutcome load_trained(const RunConfig &cfg, const PreparedData &d) {
    const auto summary_path = cfg.out_dir() / "train_summary.kv";
    if (!fs::exists(summary_path)) throw InputError("no earlier training run: '" + summary_path.string() + "' is missing");
    const auto summary = KeyValueFile::load(summary_path);
    const std::string thash = training_hash(cfg, d);
    if (summary.require("train_hash") != thash) {
        throw ArtifactMismatch("existing checkpoints in '" + checkpoint_dir(cfg).string() +
                               "' were trained with different data or settings (train hash " + summary.require("train_hash") +
                               ", expected " + thash + ")");
    }
    TrainOutcome out;
    for (const auto &s : split_string(summary.require("flagged"), ',')) {
        const auto seed = static_cast<std::uint64_t>(std::stoull(s));
        const auto path = checkpoint_dir(cfg) / (seed_tag(seed) + ".ckpt");
        if (!fs::exists(path)) throw InputError("checkpoint '" + path.string() + "' is missing");
        const auto c = Container::load(path);
        const auto &p = c.section("provenance").fields;
        if (p.require("train_hash") != thash) throw ArtifactMismatch("checkpoint '" + path.string() + "' has a different train hash");
        out.flagged.push_back({seed, vae::read_vae(c), p.require_double("best_val_loss")});
    }
    out.report_path = cfg.out_dir() / "train_report.txt";
    return out;
}

// ------------------------------------------------------------------ generate

struct LoadedGenerator {
    gen::GeneratorBundle bundle;
    std::uint64_t vae_seed = 0;
    std::optional<PreparedData> data;  // present when the mixture had to be fitted
};

/// Loads a bundle, or a bare VAE checkpoint whose mixture is then fitted on
/// the configured training rows (the schema must match).
inline LoadedGenerator load_generator(const RunConfig &cfg, const fs::path &checkpoint) {
    if (!fs::exists(checkpoint)) throw InputError("checkpoint '" + checkpoint.string() + "' does not exist");
    const auto c = Container::load(checkpoint);
    LoadedGenerator g;
    const auto *prov = c.find("provenance");
    if (prov && prov->fields.contains("vae_seed")) g.vae_seed = static_cast<std::uint64_t>(prov->fields.require_int("vae_seed"));
    if (prov && prov->fields.contains("seed")) g.vae_seed = static_cast<std::uint64_t>(prov->fields.require_int("seed"));
    if (c.find("bgm") != nullptr) {
        g.bundle = gen::read_bundle(c);
        return g;
    }
    auto model = vae::read_vae(c);
    g.data = prepare_data(cfg);
    if (model.schema().hash() != g.data->schema->hash()) {
        throw ArtifactMismatch("checkpoint '" + checkpoint.string() + "' was trained under schema " + model.schema().hash() +
                               " but the configured data gives schema " + g.data->schema->hash());
    }
    g.bundle = make_bundle(cfg, model, g.vae_seed, *g.data);
    return g;
}

inline KeyValueFile generation_provenance(const RunConfig &cfg, const gen::GeneratorBundle &b, const gen::SyntheticTable &t) {
    KeyValueFile kv = run_meta(cfg);
    kv.set("mode", gen::to_string(t.mode));
    kv.set("rows", std::to_string(t.table.row_count()));
    kv.set("generation_seed", std::to_string(t.seed));
    kv.set("schema_hash", t.schema_hash);
    for (const auto &[k, v] : b.provenance.entries()) {
        if (k != "schema_hash") kv.set("generator." + k, v);
    }
    return kv;
}

inline void write_synthetic(const fs::path &path, const RunConfig &cfg, const gen::GeneratorBundle &b, const gen::SyntheticTable &t) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    data::write_table(path, t.table);
    write_kv_file(provenance_path(path), generation_provenance(cfg, b, t));
}

struct GenerateOutcome {
    fs::path table_path;
    fs::path bundle_path;
    gen::SyntheticTable table;
};

inline GenerateOutcome cmd_generate(const RunConfig &cfg, const fs::path &checkpoint, gen::GenerationMode mode, std::size_t n,
                                    std::optional<fs::path> output = std::nullopt) {
    auto g = load_generator(cfg, checkpoint);
    GenerateOutcome out;
    if (g.data) {
        out.bundle_path = cfg.out_dir() / "bundles" / (checkpoint.stem().string() + ".bundle");
        fs::create_directories(out.bundle_path.parent_path());
        gen::save_bundle(out.bundle_path, g.bundle);
    }
    if (n == 0) {
        if (!g.data) g.data = prepare_data(cfg);
        n = g.data->real_train.row_count();
    }
    out.table = gen::generate(g.bundle, n, mode, generation_seed(cfg, g.vae_seed));
    out.table_path = output ? *output : cfg.out_dir() / ("synthetic_" + gen::to_string(mode) + ".csv");
    write_synthetic(out.table_path, cfg, g.bundle, out.table);
    return out;
}

// ------------------------------------------------------------------ latent dump

inline fs::path cmd_latent_dump(const RunConfig &cfg, const fs::path &checkpoint, std::size_t n_per_source,
                                std::optional<fs::path> output = std::nullopt) {
    auto g = load_generator(cfg, checkpoint);
    if (!g.data) g.data = prepare_data(cfg);
    const auto dump = gen::dump_latents(g.bundle, g.data->vae_train.values, n_per_source, derive_seed({cfg.seed, g.vae_seed, 0xd0ULL}));
    const auto path = output ? *output : cfg.out_dir() / "latent_dump.csv";
    std::ostringstream os;
    gen::write_latent_dump(os, dump);
    write_text_file(path, os.str());
    KeyValueFile kv = run_meta(cfg);
    kv.set("points_per_source", std::to_string(dump.points.rows() / 3));
    kv.set("vae_seed", std::to_string(g.vae_seed));
    write_kv_file(provenance_path(path), kv);
    return path;
}

// ------------------------------------------------------------------ evaluate

struct EvaluateOutcome {
    eval::EvalReport report;
    fs::path text_path;
    fs::path kv_path;
};

/// Schema for evaluation: the run's saved schema when present, otherwise one
/// fitted on the real table.
inline std::shared_ptr<const data::TableSchema> evaluation_schema(const RunConfig &cfg, const data::RawTable &real,
                                                                  const std::optional<fs::path> &schema_file) {
    const auto saved = schema_file ? *schema_file : cfg.out_dir() / "schema.kv";
    if (fs::exists(saved)) return std::make_shared<const data::TableSchema>(data::TableSchema::from_kv(KeyValueFile::load(saved)));
    if (schema_file) throw InputError("schema file '" + schema_file->string() + "' does not exist");
    return data::fit_encode(real, data::infer_schema(real, load_hints(cfg))).schema;
}

inline EvaluateOutcome cmd_evaluate(const RunConfig &cfg, const fs::path &real_path, const fs::path &syn_path,
                                    const std::optional<fs::path> &real_test_path = std::nullopt,
                                    const std::optional<fs::path> &schema_file = std::nullopt, const std::string &mode = "synthetic") {
    cfg.validate(false);
    const auto real_raw = data::read_table(real_path);
    const auto syn_raw = data::read_table(syn_path);
    const auto schema = evaluation_schema(cfg, real_raw, schema_file);
    if (syn_raw.header != real_raw.header) throw ArtifactMismatch("synthetic table columns do not match the real table");
    auto real = data::encode(real_raw, schema);
    const auto syn = data::encode(syn_raw, schema);
    data::DataMatrix real_test{Dense2D(0, real.values.cols()), schema};
    if (real_test_path) {
        real_test = data::encode(data::read_table(*real_test_path), schema);
    } else if (schema->label || schema->survival) {
        const auto [tr, te] = data::split_indices(real.row_count(), 1.0 - cfg.test_fraction, derive_seed({cfg.seed, 0x401dULL}));
        real_test = data::select_rows(real, te);
        real = data::select_rows(real, tr);
    }
    EvaluateOutcome out;
    out.report = eval::evaluate(real, real_test, syn, cfg.eval_config(), mode);
    KeyValueFile meta = run_meta(cfg);
    meta.set("real_hash", hash_file(real_path));
    meta.set("synthetic_hash", hash_file(syn_path));
    meta.set("schema_hash", schema->hash());
    for (const auto &[k, v] : out.report.meta.entries()) meta.set(k, v);
    out.report.meta = meta;
    out.text_path = cfg.out_dir() / "eval_report.txt";
    out.kv_path = cfg.out_dir() / "eval_report.kv";
    write_text_file(out.text_path, eval::text_of(out.report));
    write_kv_file(out.kv_path, eval::to_kv(out.report));
    return out;
}

// ------------------------------------------------------------------ benchmark

struct BenchmarkOutcome {
    eval::BenchmarkReport report;
    fs::path text_path;
    fs::path kv_path;
    fs::path latent_dump_path;
};

/// Train (or reuse) the seeds, generate in both modes from each flagged seed,
/// evaluate everything against the same real rows and aggregate per mode.
inline BenchmarkOutcome cmd_benchmark(const RunConfig &cfg, bool skip_train) {
    const auto d = prepare_data(cfg);
    const auto trained = skip_train ? load_trained(cfg, d) : cmd_train(cfg, d);
    const auto dir = cfg.out_dir() / "benchmark";
    fs::create_directories(dir);
    const auto ecfg = cfg.eval_config();
    const std::size_t n = cfg.n_rows > 0 ? cfg.n_rows : d.real_train.row_count();

    std::vector<std::uint64_t> seeds;
    std::vector<eval::EvalReport> by_mode[2];
    std::optional<gen::GeneratorBundle> best_bundle;
    for (const auto &t : trained.flagged) {
        seeds.push_back(t.seed);
        const auto bundle = make_bundle(cfg, t.model, t.seed, d);
        gen::save_bundle(dir / (seed_tag(t.seed) + ".bundle"), bundle);
        if (!best_bundle) best_bundle = bundle;
        int m = 0;
        for (const auto mode : {gen::GenerationMode::bgm, gen::GenerationMode::prior}) {
            log_info("benchmark: seed " + std::to_string(t.seed) + ", mode " + gen::to_string(mode));
            const auto syn = gen::generate(bundle, n, mode, generation_seed(cfg, t.seed));
            const auto stem = seed_tag(t.seed) + "_" + gen::to_string(mode);
            write_synthetic(dir / (stem + ".csv"), cfg, bundle, syn);
            auto report = eval::evaluate(d.real_train, d.real_test, data::encode(syn.table, d.schema), ecfg, gen::to_string(mode));
            KeyValueFile meta = run_meta(cfg);
            meta.set("data_hash", d.data_hash);
            meta.set("vae_seed", std::to_string(t.seed));
            meta.set("generation_seed", std::to_string(syn.seed));
            for (const auto &[k, v] : report.meta.entries()) meta.set(k, v);
            report.meta = meta;
            write_text_file(dir / (stem + ".report.txt"), eval::text_of(report));
            write_kv_file(dir / (stem + ".report.kv"), eval::to_kv(report));
            by_mode[m++].push_back(std::move(report));
        }
    }

    BenchmarkOutcome out;
    auto &br = out.report;
    br.meta = run_meta(cfg);
    br.meta.set("data_hash", d.data_hash);
    br.meta.set("schema_hash", d.schema->hash());
    br.meta.set("real_train_rows", std::to_string(d.real_train.row_count()));
    br.meta.set("real_test_rows", std::to_string(d.real_test.row_count()));
    br.meta.set("synthetic_rows", std::to_string(n));
    br.meta.set("eval_seed", std::to_string(ecfg.seed));
    br.meta.set("n_eval_seeds", std::to_string(ecfg.n_eval_seeds));
    br.modes.push_back(eval::aggregate("bgm", seeds, std::move(by_mode[0]), cfg.ci_level));
    br.modes.push_back(eval::aggregate("prior", seeds, std::move(by_mode[1]), cfg.ci_level));

    const auto dump = gen::dump_latents(*best_bundle, d.vae_train.values, cfg.latent_dump_n,
                                        derive_seed({cfg.seed, trained.flagged.front().seed, 0xd0ULL}));
    const auto real_z = dump.rows_of("real");
    const auto nn_bgm = gen::nearest_neighbor_sq_distances(real_z, dump.rows_of("bgm"));
    const auto nn_prior = gen::nearest_neighbor_sq_distances(real_z, dump.rows_of("prior"));
    br.latent_test = eval::mann_whitney_less(nn_bgm, nn_prior);
    br.latent_nn_bgm = eval::mean_of(nn_bgm);
    br.latent_nn_prior = eval::mean_of(nn_prior);
    out.latent_dump_path = dir / "latent_dump.csv";
    std::ostringstream os;
    gen::write_latent_dump(os, dump);
    write_text_file(out.latent_dump_path, os.str());

    out.text_path = cfg.out_dir() / "benchmark_report.txt";
    out.kv_path = cfg.out_dir() / "benchmark_report.kv";
    write_text_file(out.text_path, eval::text_of(br));
    write_kv_file(out.kv_path, eval::to_kv(br));
    return out;
}

// ------------------------------------------------------------------ toy data

/// Writes a bundled toy dataset plus its schema sidecar (`<path>.schema`).
inline fs::path cmd_toy(const std::string &kind, std::size_t n, std::uint64_t seed, const fs::path &path) {
    data::RawTable t;
    KeyValueFile hints;
    if (kind == "bimodal") {
        t = data::toy_bimodal(n, seed);
        hints.set("label", "member");
    } else if (kind == "survival") {
        t = data::toy_survival(n, seed);
        hints.set("survival.time", "time");
        hints.set("survival.event", "event");
    } else {
        throw InputError("unknown toy dataset '" + kind + "' (expected bimodal or survival)");
    }
    std::string cols;
    for (std::size_t j = 0; j < t.header.size(); ++j) cols += (j ? "," : "") + t.header[j];
    hints.set("expect.columns", cols);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    data::write_table(path, t);
    write_kv_file(fs::path(path.string() + ".schema"), hints);
    return path;
}

}  // namespace vaebgm::cli

#endif
