// Command-line front end. Exit codes: 0 success, 2 configuration or input
// error, 3 training failure, 4 artifact mismatch.

#include "vaebgm/cli/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

using namespace vaebgm;
using namespace vaebgm::cli;

namespace {

struct GlobalOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
};

RunConfig load_config(const GlobalOptions &g, bool required = true) {
    RunConfig cfg;
    if (!g.config.empty()) {
        cfg = RunConfig::load(g.config);
    } else if (required) {
        throw InputError("--config is required for this command");
    }
    apply_environment(cfg);
    if (!g.out.empty()) cfg.out = fs::absolute(g.out).string();
    if (g.seed) cfg.seed = *g.seed;
    return cfg;
}

std::optional<fs::path> opt_path(const std::string &s) {
    if (s.empty()) return std::nullopt;
    return fs::path(s);
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"VAE with a Bayesian Gaussian mixture latent prior for synthetic tabular data"};
    app.require_subcommand(1);
    app.fallthrough();
    GlobalOptions g;
    app.add_option("--config", g.config, "run configuration file");
    app.add_option("--seed", g.seed, "master seed (overrides the config)");
    app.add_option("--out", g.out, "output directory (overrides the config and VAEBGM_OUT)");

    auto *train = app.add_subcommand("train", "train the VAE over several seeds and flag the best");
    std::optional<int> seeds;
    train->add_option("--seeds", seeds, "number of training seeds")->check(CLI::PositiveNumber);

    auto *generate = app.add_subcommand("generate", "sample a synthetic table from a checkpoint");
    std::string checkpoint, mode_name, output;
    std::optional<std::size_t> n_rows;
    generate->add_option("--checkpoint", checkpoint, "VAE checkpoint or generator bundle")->required();
    generate->add_option("--mode", mode_name, "bgm or prior (default from config)");
    generate->add_option("--n", n_rows, "number of rows");
    generate->add_option("--output", output, "output table path");

    auto *evaluate = app.add_subcommand("evaluate", "score a synthetic table against a real one");
    std::string real_path, syn_path, real_test_path, schema_path, tag = "synthetic";
    evaluate->add_option("--real", real_path, "real table")->required();
    evaluate->add_option("--synthetic", syn_path, "synthetic table")->required();
    evaluate->add_option("--real-test", real_test_path, "held-out real rows for utility scoring");
    evaluate->add_option("--schema", schema_path, "fitted schema (default: <out>/schema.kv if present)");
    evaluate->add_option("--tag", tag, "label written into the report");

    auto *benchmark = app.add_subcommand("benchmark", "train, generate in both modes, evaluate and compare");
    bool skip_train = false;
    benchmark->add_flag("--skip-train", skip_train, "reuse the checkpoints of an earlier run");
    benchmark->add_option("--seeds", seeds, "number of training seeds")->check(CLI::PositiveNumber);

    auto *latent = app.add_subcommand("latent-dump", "write encoded, mixture and prior latent points");
    std::size_t n_per_source = 0;
    latent->add_option("--checkpoint", checkpoint, "VAE checkpoint or generator bundle")->required();
    latent->add_option("--n", n_per_source, "points per source (default from config)");
    latent->add_option("--output", output, "output path");

    auto *toy = app.add_subcommand("toy", "write a bundled toy dataset and its schema sidecar");
    std::string toy_kind = "bimodal";
    std::size_t toy_n = 5000;
    std::uint64_t toy_seed = 2024;
    toy->add_option("--kind", toy_kind, "bimodal or survival");
    toy->add_option("--n", toy_n, "rows");
    toy->add_option("--data-seed", toy_seed, "generator seed");
    toy->add_option("--output", output, "output table path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        auto with_seeds = [&](RunConfig &cfg) {
            if (seeds) {
                cfg.vae.seeds = *seeds;
                cfg.vae.keep_best = std::min(cfg.vae.keep_best, *seeds);
            }
        };
        if (*train) {
            auto cfg = load_config(g);
            with_seeds(cfg);
            const auto d = prepare_data(cfg);
            const auto out = cmd_train(cfg, d);
            std::cout << "wrote " << out.report_path.string() << "\n";
        } else if (*generate) {
            auto cfg = load_config(g);
            const auto mode = mode_name.empty() ? cfg.mode : gen::parse_mode(mode_name);
            const auto out = cmd_generate(cfg, checkpoint, mode, n_rows.value_or(cfg.n_rows), opt_path(output));
            std::cout << "wrote " << out.table_path.string() << " (" << out.table.table.row_count() << " rows)\n";
        } else if (*evaluate) {
            auto cfg = load_config(g, false);
            const auto out = cmd_evaluate(cfg, real_path, syn_path, opt_path(real_test_path), opt_path(schema_path), tag);
            std::cout << eval::text_of(out.report);
        } else if (*benchmark) {
            auto cfg = load_config(g);
            with_seeds(cfg);
            const auto out = cmd_benchmark(cfg, skip_train);
            std::cout << eval::text_of(out.report);
        } else if (*latent) {
            auto cfg = load_config(g);
            const auto path = cmd_latent_dump(cfg, checkpoint, n_per_source > 0 ? n_per_source : cfg.latent_dump_n, opt_path(output));
            std::cout << "wrote " << path.string() << "\n";
        } else if (*toy) {
            const auto path = cmd_toy(toy_kind, toy_n, toy_seed, output);
            std::cout << "wrote " << path.string() << " and " << path.string() << ".schema\n";
        }
    } catch (const InputError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ShapeError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const TrainingError &e) {
        std::cerr << "training failed: " << e.what() << "\n";
        return 3;
    } catch (const ArtifactMismatch &e) {
        std::cerr << "artifact mismatch: " << e.what() << "\n";
        return 4;
    } catch (const std::exception &e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
