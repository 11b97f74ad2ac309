#ifndef VAEBGM_VAE_CONFIG_HPP
#define VAEBGM_VAE_CONFIG_HPP

#include "vaebgm/core/error.hpp"
#include "vaebgm/core/kvfile.hpp"
#include "vaebgm/core/text.hpp"

#include <string>

namespace vaebgm::vae {

/// How the best seeds are chosen among the multi-seed runs.
enum class SeedSelection { validation_elbo, discriminator };

inline std::string to_string(SeedSelection s) {
    return s == SeedSelection::validation_elbo ? "validation_elbo" : "discriminator";
}

inline SeedSelection parse_seed_selection(const std::string &s) {
    if (s == "validation_elbo") return SeedSelection::validation_elbo;
    if (s == "discriminator") return SeedSelection::discriminator;
    throw InputError("unknown seed selection '" + s + "' (expected validation_elbo or discriminator)");
}

struct VaeConfig {
    int latent_dim = 5;
    int hidden_units = 50;
    int max_epochs = 1000;
    int batch_size = 500;
    double dropout_rate = 0.2;
    int early_stop_patience = 50;
    int seeds = 15;
    int keep_best = 3;
    double learning_rate = 1e-3;
    SeedSelection selection = SeedSelection::validation_elbo;

    void validate() const {
        if (latent_dim < 1) throw InputError("vae.latent_dim must be >= 1");
        if (hidden_units < 1) throw InputError("vae.hidden_units must be >= 1");
        if (max_epochs < 0) throw InputError("vae.max_epochs must be >= 0");
        if (batch_size < 1) throw InputError("vae.batch_size must be >= 1");
        if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw InputError("vae.dropout_rate must lie in [0, 1)");
        if (early_stop_patience < 1) throw InputError("vae.early_stop_patience must be >= 1");
        if (seeds < 1) throw InputError("vae.seeds must be >= 1");
        if (keep_best < 1 || keep_best > seeds) throw InputError("vae.keep_best must lie in [1, vae.seeds]");
        if (!(learning_rate > 0.0)) throw InputError("vae.learning_rate must be > 0");
    }

    /// Keys are written with a `vae.` prefix so the block can live inside a run config.
    void write_to(KeyValueFile &kv) const {
        kv.set("vae.latent_dim", std::to_string(latent_dim));
        kv.set("vae.hidden_units", std::to_string(hidden_units));
        kv.set("vae.max_epochs", std::to_string(max_epochs));
        kv.set("vae.batch_size", std::to_string(batch_size));
        kv.set("vae.dropout_rate", format_double(dropout_rate));
        kv.set("vae.early_stop_patience", std::to_string(early_stop_patience));
        kv.set("vae.seeds", std::to_string(seeds));
        kv.set("vae.keep_best", std::to_string(keep_best));
        kv.set("vae.learning_rate", format_double(learning_rate));
        kv.set("vae.selection", to_string(selection));
    }

    /// Reads any `vae.` keys present; absent keys keep their current value.
    void read_from(const KeyValueFile &kv) {
        auto int_key = [&](const char *k, int &dst) {
            if (kv.contains(k)) dst = static_cast<int>(kv.require_int(k));
        };
        auto real_key = [&](const char *k, double &dst) {
            if (kv.contains(k)) dst = kv.require_double(k);
        };
        int_key("vae.latent_dim", latent_dim);
        int_key("vae.hidden_units", hidden_units);
        int_key("vae.max_epochs", max_epochs);
        int_key("vae.batch_size", batch_size);
        real_key("vae.dropout_rate", dropout_rate);
        int_key("vae.early_stop_patience", early_stop_patience);
        int_key("vae.seeds", seeds);
        int_key("vae.keep_best", keep_best);
        real_key("vae.learning_rate", learning_rate);
        if (kv.contains("vae.selection")) selection = parse_seed_selection(kv.require("vae.selection"));
    }
};

}  // namespace vaebgm::vae

#endif
