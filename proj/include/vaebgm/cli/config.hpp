#ifndef VAEBGM_CLI_CONFIG_HPP
#define VAEBGM_CLI_CONFIG_HPP

#include "vaebgm/bgm/bgm.hpp"
#include "vaebgm/core/error.hpp"
#include "vaebgm/core/hash.hpp"
#include "vaebgm/core/kvfile.hpp"
#include "vaebgm/core/text.hpp"
#include "vaebgm/eval/discriminator.hpp"
#include "vaebgm/generation/generator.hpp"
#include "vaebgm/vae/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <set>
#include <string>

namespace vaebgm::cli {

namespace fs = std::filesystem;

/// Batch run configuration. File format: one `key = value` per line, `#`
/// comments. Relative paths resolve against the config file's directory.
///
///     data                 input table (required)
///     schema               schema sidecar (optional)
///     out                  output directory (default: out)
///     seed                 master seed (default: 0)
///     vae.*                network and training settings
///     bgm.max_components, bgm.weight_concentration, bgm.mean_precision,
///     bgm.degrees_of_freedom, bgm.max_iterations, bgm.convergence_tol
///     bgm.latent_source    posterior_mean | posterior_sample
///     generate.n_rows      rows per synthetic table, 0 = size of the real training split
///     generate.mode        bgm | prior
///     eval.seeds           evaluation seeds (default 10)
///     eval.ci_level        confidence level (default 0.99)
///     eval.trees           forest size (default 100)
///     eval.test_fraction   real rows held out for utility testing (default 0.2)
///     train.val_fraction   validation share of the training rows (default 0.2)
///     latent_dump.n        points per source in latent dumps (default 300)
struct RunConfig {
    fs::path base_dir = ".";
    std::string data;
    std::string schema;
    std::string out = "out";
    std::uint64_t seed = 0;
    vae::VaeConfig vae;
    bgm::BgmPriorConfig bgm;
    gen::LatentSource latent_source = gen::LatentSource::posterior_mean;
    std::size_t n_rows = 0;
    gen::GenerationMode mode = gen::GenerationMode::bgm;
    int eval_seeds = 10;
    double ci_level = 0.99;
    int eval_trees = 100;
    double test_fraction = 0.2;
    double val_fraction = 0.2;
    std::size_t latent_dump_n = 300;

    [[nodiscard]] fs::path resolve(const std::string &p) const {
        const fs::path path(p);
        return path.is_absolute() ? path : base_dir / path;
    }

    [[nodiscard]] fs::path data_path() const { return resolve(data); }
    [[nodiscard]] std::optional<fs::path> schema_path() const {
        if (schema.empty()) return std::nullopt;
        return resolve(schema);
    }
    [[nodiscard]] fs::path out_dir() const { return resolve(out); }

    [[nodiscard]] eval::EvalConfig eval_config() const {
        eval::EvalConfig e;
        e.n_eval_seeds = eval_seeds;
        e.ci_level = ci_level;
        e.forest.n_trees = eval_trees;
        e.seed = derive_seed({seed, 0xe7a1ULL});
        return e;
    }

    static RunConfig from_kv(const KeyValueFile &kv, const fs::path &base_dir) {
        static const std::set<std::string> known{
            "data", "schema", "out", "seed", "bgm.max_components", "bgm.weight_concentration", "bgm.mean_precision",
            "bgm.degrees_of_freedom", "bgm.max_iterations", "bgm.convergence_tol", "bgm.latent_source", "generate.n_rows",
            "generate.mode", "eval.seeds", "eval.ci_level", "eval.trees", "eval.test_fraction", "train.val_fraction", "latent_dump.n"};
        KeyValueFile vae_keys;
        vae::VaeConfig{}.write_to(vae_keys);
        for (const auto &[key, value] : kv.entries()) {
            if (known.count(key) == 0 && !vae_keys.contains(key)) throw InputError("config: unknown key '" + key + "'");
        }
        RunConfig c;
        c.base_dir = base_dir;
        if (auto v = kv.get("data")) c.data = *v;
        if (auto v = kv.get("schema")) c.schema = *v;
        if (auto v = kv.get("out")) c.out = *v;
        auto unsigned_key = [&](const char *k, auto &dst) {
            if (!kv.contains(k)) return;
            const auto v = kv.require_int(k);
            if (v < 0) throw InputError(std::string("config: ") + k + " must be >= 0");
            dst = static_cast<std::remove_reference_t<decltype(dst)>>(v);
        };
        auto int_key = [&](const char *k, int &dst) {
            if (kv.contains(k)) dst = static_cast<int>(kv.require_int(k));
        };
        auto real_key = [&](const char *k, double &dst) {
            if (kv.contains(k)) dst = kv.require_double(k);
        };
        unsigned_key("seed", c.seed);
        c.vae.read_from(kv);
        int_key("bgm.max_components", c.bgm.max_components);
        real_key("bgm.weight_concentration", c.bgm.weight_concentration);
        real_key("bgm.mean_precision", c.bgm.mean_precision);
        real_key("bgm.degrees_of_freedom", c.bgm.degrees_of_freedom);
        int_key("bgm.max_iterations", c.bgm.max_iterations);
        real_key("bgm.convergence_tol", c.bgm.convergence_tol);
        if (auto v = kv.get("bgm.latent_source")) c.latent_source = gen::parse_latent_source(*v);
        unsigned_key("generate.n_rows", c.n_rows);
        if (auto v = kv.get("generate.mode")) c.mode = gen::parse_mode(*v);
        int_key("eval.seeds", c.eval_seeds);
        real_key("eval.ci_level", c.ci_level);
        int_key("eval.trees", c.eval_trees);
        real_key("eval.test_fraction", c.test_fraction);
        real_key("train.val_fraction", c.val_fraction);
        unsigned_key("latent_dump.n", c.latent_dump_n);
        return c;
    }

    static RunConfig load(const fs::path &path) {
        if (!fs::exists(path)) throw InputError("config file '" + path.string() + "' does not exist");
        return from_kv(KeyValueFile::load(path), path.parent_path().empty() ? fs::path(".") : path.parent_path());
    }

    /// Range checks; `need_data` also requires the data file to exist.
    void validate(bool need_data = true) const {
        vae.validate();
        if (bgm.max_components < 0) throw InputError("config: bgm.max_components must be >= 0");
        if (bgm.weight_concentration < 0.0) throw InputError("config: bgm.weight_concentration must be >= 0");
        if (!(bgm.mean_precision > 0.0)) throw InputError("config: bgm.mean_precision must be > 0");
        if (bgm.degrees_of_freedom < 0.0) throw InputError("config: bgm.degrees_of_freedom must be >= 0");
        if (bgm.max_iterations < 1) throw InputError("config: bgm.max_iterations must be >= 1");
        if (!(bgm.convergence_tol > 0.0)) throw InputError("config: bgm.convergence_tol must be > 0");
        if (eval_seeds < 1) throw InputError("config: eval.seeds must be >= 1");
        if (!(ci_level > 0.0 && ci_level < 1.0)) throw InputError("config: eval.ci_level must lie in (0, 1)");
        if (eval_trees < 1) throw InputError("config: eval.trees must be >= 1");
        if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw InputError("config: eval.test_fraction must lie in (0, 1)");
        if (!(val_fraction > 0.0 && val_fraction < 1.0)) throw InputError("config: train.val_fraction must lie in (0, 1)");
        if (latent_dump_n < 1) throw InputError("config: latent_dump.n must be >= 1");
        if (need_data) {
            if (data.empty()) throw InputError("config: data path is not set");
            if (!fs::exists(data_path())) throw InputError("config: data file '" + data_path().string() + "' does not exist");
            if (const auto s = schema_path(); s && !fs::exists(*s)) {
                throw InputError("config: schema file '" + s->string() + "' does not exist");
            }
        }
    }

    /// Canonical form used for hashing. The output directory is left out, so
    /// the same run written to two places carries the same hash.
    [[nodiscard]] KeyValueFile canonical() const {
        KeyValueFile kv;
        kv.set("data", data);
        kv.set("schema", schema);
        kv.set("seed", std::to_string(seed));
        vae.write_to(kv);
        kv.set("bgm.max_components", std::to_string(bgm.max_components));
        kv.set("bgm.weight_concentration", format_double(bgm.weight_concentration));
        kv.set("bgm.mean_precision", format_double(bgm.mean_precision));
        kv.set("bgm.degrees_of_freedom", format_double(bgm.degrees_of_freedom));
        kv.set("bgm.max_iterations", std::to_string(bgm.max_iterations));
        kv.set("bgm.convergence_tol", format_double(bgm.convergence_tol));
        kv.set("bgm.latent_source", gen::to_string(latent_source));
        kv.set("generate.n_rows", std::to_string(n_rows));
        kv.set("generate.mode", gen::to_string(mode));
        kv.set("eval.seeds", std::to_string(eval_seeds));
        kv.set("eval.ci_level", format_double(ci_level));
        kv.set("eval.trees", std::to_string(eval_trees));
        kv.set("eval.test_fraction", format_double(test_fraction));
        kv.set("train.val_fraction", format_double(val_fraction));
        kv.set("latent_dump.n", std::to_string(latent_dump_n));
        return kv;
    }

    [[nodiscard]] std::string hash() const { return hash_hex(canonical().str()); }
};

/// Applies the output-directory override from VAEBGM_OUT, if set.
inline void apply_environment(RunConfig &c) {
    if (const char *env = std::getenv("VAEBGM_OUT"); env != nullptr && *env != '\0') c.out = env;
}

}  // namespace vaebgm::cli

#endif
