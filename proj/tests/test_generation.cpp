#include "test_util.hpp"

#include "vaebgm/data/toy.hpp"
#include "vaebgm/eval/stats.hpp"
#include "vaebgm/generation/generator.hpp"

#include <gtest/gtest.h>

#include <unistd.h>

#include <algorithm>
#include <fstream>
#include <sstream>

using namespace vaebgm;
using namespace vaebgm::gen;

namespace {

struct ToySetup {
    data::DataMatrix train;
    data::DataMatrix val;
    vae::VaeModel model;
};

vae::VaeConfig toy_config() {
    vae::VaeConfig c;
    c.max_epochs = 300;
    c.early_stop_patience = 30;
    c.seeds = 1;
    c.keep_best = 1;
    return c;
}

// Trained once per process and cached on disk, so the individually launched
// test cases share one training run.
const ToySetup &toy() {
    static const ToySetup setup = [] {
        const auto raw = data::toy_bimodal(2000, 11);
        const auto all = data::fit_encode(raw, data::infer_schema(raw));
        auto [train, val] = data::split(all, 0.8, 5);
        const auto cache = std::filesystem::temp_directory_path() / ("vaebgm_test_toy_vae_" + all.schema->hash() + ".ckpt");
        vae::VaeModel model;
        if (std::filesystem::exists(cache)) {
            model = vae::read_vae(Container::load(cache));
        } else {
            model = vae::train(vae::VaeModel(all.schema, toy_config(), 0), train.values, val.values, 0).model;
            Container c;
            vae::write_vae(c, model);
            const auto tmp = cache.string() + ".tmp" + std::to_string(::getpid());
            c.save(tmp);
            std::filesystem::rename(tmp, cache);
        }
        return ToySetup{train, val, model};
    }();
    return setup;
}

const GeneratorBundle &toy_bundle() {
    static const GeneratorBundle b = build_generator(toy().model, toy().train.values, {}, 3);
    return b;
}

std::string bundle_bytes(const GeneratorBundle &b) {
    Container c;
    write_bundle(c, b);
    std::ostringstream os;
    c.write(os);
    return os.str();
}

}  // namespace

TEST(Generation, ModeAndSourceParsing) {
    EXPECT_EQ(parse_mode("bgm"), GenerationMode::bgm);
    EXPECT_EQ(parse_mode("prior"), GenerationMode::prior);
    EXPECT_THROW(parse_mode("gmm"), InputError);
    EXPECT_EQ(parse_latent_source(to_string(LatentSource::posterior_sample)), LatentSource::posterior_sample);
    EXPECT_THROW(parse_latent_source("mean"), InputError);
}

TEST(Generation, ToyBundleHasTwoEffectiveComponents) {
    const auto &b = toy_bundle();
    EXPECT_EQ(b.bgm.dim(), b.model.latent_dim());
    EXPECT_EQ(b.bgm.effective_components(0.05), 2);
    EXPECT_EQ(b.provenance.require("schema_hash"), b.schema().hash());
    EXPECT_EQ(b.provenance.require("latent_source"), "posterior_mean");
}

TEST(Generation, BuildIsDeterministic) {
    const auto again = build_generator(toy().model, toy().train.values, {}, 3);
    EXPECT_EQ(bundle_bytes(again), bundle_bytes(toy_bundle()));
}

TEST(Generation, SampledLatentSourceDiffersFromMeans) {
    const auto means = latent_corpus(toy().model, toy().train.values, LatentSource::posterior_mean, 1);
    const auto samples = latent_corpus(toy().model, toy().train.values, LatentSource::posterior_sample, 1);
    EXPECT_EQ(means.rows(), samples.rows());
    EXPECT_GT((means - samples).norm(), 0.0);
    const auto b = build_generator(toy().model, toy().train.values, {}, 3, LatentSource::posterior_sample);
    EXPECT_EQ(b.provenance.require("latent_source"), "posterior_sample");
}

TEST(Generation, UntrainedModelStillYieldsValidBundle) {
    const auto raw = testutil::random_mixed_table(300, 4);
    const auto m = data::fit_encode(raw, data::infer_schema(raw));
    vae::VaeConfig cfg;
    cfg.latent_dim = 3;
    const vae::VaeModel model(m.schema, cfg, 9);
    const auto b = build_generator(model, m.values, {}, 1);
    EXPECT_EQ(b.bgm.dim(), 3);
    const auto t = generate(b, 50, GenerationMode::bgm, 2);
    EXPECT_EQ(t.table.row_count(), 50u);
}

TEST(Generation, ProducesExactlyNSchemaValidRows) {
    for (auto mode : {GenerationMode::bgm, GenerationMode::prior}) {
        const auto t = generate(toy_bundle(), 100, mode, 8);
        ASSERT_EQ(t.table.row_count(), 100u);
        EXPECT_EQ(t.table.header, toy_bundle().schema().column_names());
        EXPECT_EQ(t.schema_hash, toy_bundle().schema().hash());
        EXPECT_EQ(t.mode, mode);
        for (const auto &row : t.table.rows) {
            const auto err = data::validate_row(toy_bundle().schema(), row);
            EXPECT_FALSE(err.has_value()) << *err;
        }
    }
    EXPECT_THROW(generate(toy_bundle(), 0, GenerationMode::bgm, 1), InputError);
}

TEST(Generation, SchemaConformanceAtScale) {
    const auto t = generate(toy_bundle(), 5000, GenerationMode::prior, 21);
    std::size_t bad = 0;
    for (const auto &row : t.table.rows) bad += data::validate_row(toy_bundle().schema(), row).has_value() ? 1 : 0;
    EXPECT_EQ(bad, 0u);
}

TEST(Generation, SeededAndChunkStable) {
    const auto a = generate(toy_bundle(), 2500, GenerationMode::bgm, 4);
    const auto b = generate(toy_bundle(), 2500, GenerationMode::bgm, 4);
    EXPECT_EQ(a.table.rows, b.table.rows);
    const auto prefix = generate(toy_bundle(), static_cast<std::size_t>(kGenerationChunk), GenerationMode::bgm, 4);
    for (std::size_t i = 0; i < prefix.table.row_count(); ++i) EXPECT_EQ(prefix.table.rows[i], a.table.rows[i]);
    const auto c = generate(toy_bundle(), 2500, GenerationMode::bgm, 5);
    EXPECT_NE(a.table.rows, c.table.rows);
}

TEST(Generation, ModesDifferOnlyInLatentSource) {
    auto rng = make_rng({1, 2});
    const Dense2D z = vae::standard_normal_matrix(64, toy_bundle().model.latent_dim(), rng);
    auto r1 = make_rng({7});
    auto r2 = make_rng({7});
    EXPECT_EQ(decode_latents(toy_bundle(), z, r1).rows, decode_latents(toy_bundle(), z, r2).rows);
}

TEST(Generation, DegenerateMixtureMatchesPriorMode) {
    GeneratorBundle b = toy_bundle();
    const Index d = b.model.latent_dim();
    b.bgm = bgm::BgmModel::from_parameters(Vector::Ones(1), Dense2D::Zero(1, d), {Eigen::MatrixXd::Identity(d, d)});
    const std::size_t n = 100000;
    const auto tb = generate(b, n, GenerationMode::bgm, 31);
    const auto tp = generate(b, n, GenerationMode::prior, 32);
    const auto eb = data::encode(tb.table, b.model.schema_ptr());
    const auto ep = data::encode(tp.table, b.model.schema_ptr());
    // Every encoded coordinate: difference of means within 5 standard errors.
    for (Index j = 0; j < eb.values.cols(); ++j) {
        const double mb = eb.values.col(j).mean();
        const double mp = ep.values.col(j).mean();
        const double vb = (eb.values.col(j).array() - mb).square().mean();
        const double vp = (ep.values.col(j).array() - mp).square().mean();
        const double se = std::sqrt((vb + vp) / static_cast<double>(n));
        EXPECT_LT(std::abs(mb - mp), 5.0 * se + 1e-12) << "encoded column " << j;
    }
}

TEST(Generation, LatentDumpShapeAndLabels) {
    const auto d = dump_latents(toy_bundle(), toy().train.values, 300, 5);
    EXPECT_EQ(d.points.rows(), 900);
    EXPECT_EQ(d.points.cols(), toy_bundle().model.latent_dim());
    EXPECT_EQ(d.rows_of("real").rows(), 300);
    EXPECT_EQ(d.rows_of("bgm").rows(), 300);
    EXPECT_EQ(d.rows_of("prior").rows(), 300);
    std::ostringstream os;
    write_latent_dump(os, d);
    const auto text = os.str();
    EXPECT_EQ(text.substr(0, text.find('\n')), "z0,z1,z2,z3,z4,source");
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 901);
}

TEST(Generation, LatentDumpClampsToTrainingRows) {
    const Dense2D few = toy().train.values.topRows(20);
    const auto d = dump_latents(toy_bundle(), few, 300, 5);
    EXPECT_EQ(d.points.rows(), 60);
    EXPECT_THROW(dump_latents(toy_bundle(), few, 0, 5), InputError);
}

TEST(Generation, TwoDimensionalDumpIsPlottable) {
    const auto raw = data::toy_bimodal(400, 3);
    const auto m = data::fit_encode(raw, data::infer_schema(raw));
    vae::VaeConfig cfg;
    cfg.latent_dim = 2;
    const auto b = build_generator(vae::VaeModel(m.schema, cfg, 1), m.values, {}, 1);
    std::ostringstream os;
    write_latent_dump(os, dump_latents(b, m.values, 10, 1));
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "z0,z1,source");
    while (std::getline(is, line)) EXPECT_EQ(std::count(line.begin(), line.end(), ','), 2);
}

TEST(Generation, MixtureSamplesSitCloserToRealLatents) {
    const auto d = dump_latents(toy_bundle(), toy().train.values, 300, 12);
    const auto real = d.rows_of("real");
    const auto nn_bgm = nearest_neighbor_sq_distances(real, d.rows_of("bgm"));
    const auto nn_prior = nearest_neighbor_sq_distances(real, d.rows_of("prior"));
    EXPECT_LT(eval::mean_of(nn_bgm), eval::mean_of(nn_prior));
    EXPECT_LT(eval::mann_whitney_less(nn_bgm, nn_prior).p_value, 0.01);
}

TEST(Generation, NearestNeighborDistances) {
    Dense2D ref(2, 2);
    ref << 0, 0, 3, 4;
    Dense2D q(2, 2);
    q << 1, 0, 3, 5;
    const auto d = nearest_neighbor_sq_distances(ref, q);
    EXPECT_DOUBLE_EQ(d[0], 1.0);
    EXPECT_DOUBLE_EQ(d[1], 1.0);
    EXPECT_THROW(nearest_neighbor_sq_distances(Dense2D(0, 2), q), InputError);
}

TEST(Generation, BundleRoundTrip) {
    const auto dir = testutil::scratch_dir("bundle");
    save_bundle(dir / "gen.bundle", toy_bundle());
    const auto loaded = load_bundle(dir / "gen.bundle");
    EXPECT_EQ(bundle_bytes(loaded), bundle_bytes(toy_bundle()));
    EXPECT_EQ(generate(loaded, 300, GenerationMode::bgm, 2).table.rows, generate(toy_bundle(), 300, GenerationMode::bgm, 2).table.rows);
}

TEST(Generation, BundleRejectsLatentDimensionMismatch) {
    GeneratorBundle b = toy_bundle();
    b.bgm = bgm::BgmModel::from_parameters(Vector::Ones(1), Dense2D::Zero(1, 2), {Eigen::MatrixXd::Identity(2, 2)});
    Container c;
    write_bundle(c, b);
    EXPECT_THROW(read_bundle(c), ArtifactMismatch);
    EXPECT_THROW(generate(b, 10, GenerationMode::bgm, 1), ArtifactMismatch);
}
