#ifndef VAEBGM_GENERATION_GENERATOR_HPP
#define VAEBGM_GENERATION_GENERATOR_HPP

#include "vaebgm/bgm/bgm.hpp"
#include "vaebgm/core/container.hpp"
#include "vaebgm/core/error.hpp"
#include "vaebgm/core/random.hpp"
#include "vaebgm/data/encode.hpp"
#include "vaebgm/vae/checkpoint.hpp"
#include "vaebgm/vae/model.hpp"
#include "vaebgm/vae/train.hpp"

#include <algorithm>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

namespace vaebgm::gen {

enum class GenerationMode { bgm, prior };

inline std::string to_string(GenerationMode m) { return m == GenerationMode::bgm ? "bgm" : "prior"; }

inline GenerationMode parse_mode(const std::string &s) {
    if (s == "bgm") return GenerationMode::bgm;
    if (s == "prior") return GenerationMode::prior;
    throw InputError("unknown generation mode '" + s + "' (expected bgm or prior)");
}

/// Which latent representation of the training rows the mixture is fitted to.
enum class LatentSource { posterior_mean, posterior_sample };

inline std::string to_string(LatentSource s) { return s == LatentSource::posterior_mean ? "posterior_mean" : "posterior_sample"; }

inline LatentSource parse_latent_source(const std::string &s) {
    if (s == "posterior_mean") return LatentSource::posterior_mean;
    if (s == "posterior_sample") return LatentSource::posterior_sample;
    throw InputError("unknown latent source '" + s + "' (expected posterior_mean or posterior_sample)");
}

/// A trained VAE plus the mixture fitted to its latent space.
struct GeneratorBundle {
    vae::VaeModel model;
    bgm::BgmModel bgm;
    KeyValueFile provenance;

    [[nodiscard]] const data::TableSchema &schema() const { return model.schema(); }
};

/// Latent representation of encoded rows.
inline Dense2D latent_corpus(const vae::VaeModel &model, const Dense2D &x, LatentSource source, std::uint64_t seed) {
    auto q = model.encode(x);
    if (source == LatentSource::posterior_mean) return std::move(q.mu);
    auto rng = make_rng({seed, 0x1a7eULL});
    return vae::reparameterize(q, vae::standard_normal_matrix(x.rows(), model.latent_dim(), rng));
}

/// Encodes the training rows and fits the truncated DP mixture to their latents.
inline GeneratorBundle build_generator(const vae::VaeModel &model, const Dense2D &train_x, const bgm::BgmPriorConfig &prior,
                                       std::uint64_t seed, LatentSource source = LatentSource::posterior_mean) {
    const Dense2D z = latent_corpus(model, train_x, source, seed);
    auto fit = bgm::fit(z, prior, seed);
    GeneratorBundle b{model, std::move(fit.model), {}};
    b.provenance.set("schema_hash", model.schema().hash());
    b.provenance.set("bgm_seed", std::to_string(seed));
    b.provenance.set("latent_source", to_string(source));
    b.provenance.set("bgm_iterations", std::to_string(b.bgm.iterations));
    b.provenance.set("bgm_effective_components", std::to_string(b.bgm.effective_components()));
    return b;
}

/// Rows of a generated table together with how they were produced.
struct SyntheticTable {
    data::RawTable table;
    std::string schema_hash;
    GenerationMode mode = GenerationMode::bgm;
    std::uint64_t seed = 0;
};

inline constexpr Index kGenerationChunk = 1024;

inline Dense2D sample_latents(const GeneratorBundle &b, Index n, GenerationMode mode, Rng &rng) {
    if (mode == GenerationMode::bgm) return b.bgm.sample(n, rng);
    return vae::standard_normal_matrix(n, b.model.latent_dim(), rng);
}

/// Decodes latent rows (dropout off) and samples table rows from the heads.
inline data::RawTable decode_latents(const GeneratorBundle &b, const Dense2D &z, Rng &rng) {
    const Dense2D params = b.model.decode(z, numerics::Mode::infer);
    return data::inverse_transform(params, b.schema(), rng);
}

/// Exactly `n` rows. Chunk c of 1024 rows draws from its own generator seeded
/// by (seed, c), so the output does not depend on how chunks are scheduled.
inline SyntheticTable generate(const GeneratorBundle &b, std::size_t n, GenerationMode mode, std::uint64_t seed) {
    if (n == 0) throw InputError("generate: n must be >= 1");
    if (b.bgm.dim() != b.model.latent_dim()) throw ArtifactMismatch("generator bundle: mixture and VAE latent dimensions differ");
    SyntheticTable out;
    out.schema_hash = b.schema().hash();
    out.mode = mode;
    out.seed = seed;
    out.table.header = b.schema().column_names();
    out.table.rows.reserve(n);
    const auto total = static_cast<Index>(n);
    for (Index start = 0, chunk = 0; start < total; start += kGenerationChunk, ++chunk) {
        const Index rows = std::min(kGenerationChunk, total - start);
        auto rng = make_rng({seed, static_cast<std::uint64_t>(chunk)});
        const Dense2D z = sample_latents(b, rows, mode, rng);
        auto part = decode_latents(b, z, rng);
        for (auto &r : part.rows) out.table.rows.push_back(std::move(r));
    }
    return out;
}

/// Labeled latent point sets for scatter plots of the three sources.
struct LatentDump {
    Dense2D points;
    std::vector<std::string> source;  // real, bgm or prior

    [[nodiscard]] Dense2D rows_of(const std::string &label) const {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < source.size(); ++i) {
            if (source[i] == label) idx.push_back(i);
        }
        return select_rows(points, idx);
    }
};

/// Posterior means of `n_per_source` random training rows, followed by the
/// same number of mixture and prior draws.
inline LatentDump dump_latents(const GeneratorBundle &b, const Dense2D &train_x, std::size_t n_per_source, std::uint64_t seed) {
    if (n_per_source == 0) throw InputError("latent dump: n_per_source must be >= 1");
    const auto n_real = static_cast<std::size_t>(train_x.rows());
    if (n_per_source > n_real) {
        log_warn("latent dump: n_per_source " + std::to_string(n_per_source) + " exceeds the " + std::to_string(n_real) +
                 " training rows; clamped");
        n_per_source = n_real;
    }
    auto rng = make_rng({seed, 0xd0ULL});
    std::vector<std::size_t> order(n_real);
    for (std::size_t i = 0; i < n_real; ++i) order[i] = i;
    shuffle_in_place(order, rng);
    order.resize(n_per_source);
    const auto n = static_cast<Index>(n_per_source);
    const Dense2D real = b.model.encode(select_rows(train_x, order)).mu;
    const Dense2D mix = sample_latents(b, n, GenerationMode::bgm, rng);
    const Dense2D prior = sample_latents(b, n, GenerationMode::prior, rng);
    LatentDump d;
    d.points = vstack(vstack(real, mix), prior);
    d.source.insert(d.source.end(), n_per_source, "real");
    d.source.insert(d.source.end(), n_per_source, "bgm");
    d.source.insert(d.source.end(), n_per_source, "prior");
    return d;
}

inline void write_latent_dump(std::ostream &out, const LatentDump &d) {
    for (Index j = 0; j < d.points.cols(); ++j) out << 'z' << j << ',';
    out << "source\n";
    for (Index i = 0; i < d.points.rows(); ++i) {
        for (Index j = 0; j < d.points.cols(); ++j) out << format_double(d.points(i, j)) << ',';
        out << d.source[static_cast<std::size_t>(i)] << '\n';
    }
}

/// Squared Euclidean distance from each sample row to its nearest reference row.
inline std::vector<double> nearest_neighbor_sq_distances(const Dense2D &reference, const Dense2D &samples) {
    if (reference.rows() == 0) throw InputError("nearest neighbour: empty reference set");
    std::vector<double> out(static_cast<std::size_t>(samples.rows()));
    for (Index i = 0; i < samples.rows(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (Index r = 0; r < reference.rows(); ++r) best = std::min(best, (reference.row(r) - samples.row(i)).squaredNorm());
        out[static_cast<std::size_t>(i)] = best;
    }
    return out;
}

inline void write_bundle(Container &c, const GeneratorBundle &b) {
    vae::write_vae(c, b.model);
    b.bgm.write(c, "bgm");
    auto &p = c.add_section("provenance");
    p.fields = b.provenance;
}

inline void save_bundle(const std::filesystem::path &path, const GeneratorBundle &b) {
    Container c;
    write_bundle(c, b);
    c.save(path);
}

/// Loads a bundle; the mixture must match the VAE's latent dimension.
inline GeneratorBundle read_bundle(const Container &c) {
    GeneratorBundle b{vae::read_vae(c), bgm::BgmModel::read(c, "bgm"), {}};
    if (const auto *p = c.find("provenance")) b.provenance = p->fields;
    if (b.bgm.dim() != b.model.latent_dim()) throw ArtifactMismatch("bundle: mixture and VAE latent dimensions differ");
    return b;
}

inline GeneratorBundle load_bundle(const std::filesystem::path &path) { return read_bundle(Container::load(path)); }

}  // namespace vaebgm::gen

#endif
