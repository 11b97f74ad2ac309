#include "test_util.hpp"

#include "vaebgm/data/encode.hpp"
#include "vaebgm/data/schema.hpp"
#include "vaebgm/data/toy.hpp"
#include "vaebgm/vae/checkpoint.hpp"
#include "vaebgm/vae/model.hpp"
#include "vaebgm/vae/train.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace vaebgm;
using namespace vaebgm::vae;

namespace {

data::DataMatrix toy_matrix(std::size_t n, std::uint64_t seed = 1) {
    const auto raw = data::toy_bimodal(n, seed);
    return data::fit_encode(raw, data::infer_schema(raw));
}

VaeConfig small_config() {
    VaeConfig c;
    c.latent_dim = 3;
    c.hidden_units = 8;
    c.batch_size = 4;
    c.max_epochs = 5;
    c.early_stop_patience = 3;
    c.seeds = 3;
    c.keep_best = 1;
    return c;
}

// Independent negative ELBO for one row, written directly from the model
// definition: encoder, reparameterization, decoder, per-column likelihoods.
double reference_row_loss(const VaeModel &m, const Dense2D &x_row, const Dense2D &eps_row) {
    auto affine = [](const numerics::Layer &l, const Eigen::RowVectorXd &in) -> Eigen::RowVectorXd {
        return in * l.weight.transpose() + l.bias.transpose();
    };
    const Eigen::RowVectorXd h = affine(m.enc_hidden, x_row.row(0)).cwiseMax(0.0);
    const Eigen::RowVectorXd t = affine(m.enc_proj, h).array().tanh().matrix();
    const Eigen::RowVectorXd mu = affine(m.mu_head, t);
    const Eigen::RowVectorXd lv = affine(m.logvar_head, t).cwiseMax(-15.0).cwiseMin(15.0);
    const Eigen::RowVectorXd z = mu.array() + (0.5 * lv.array()).exp() * eps_row.row(0).array();
    const Eigen::RowVectorXd dh = affine(m.dec_hidden, z).cwiseMax(0.0);
    const Eigen::RowVectorXd p = affine(m.dec_out, dh);
    double kl = 0.0;
    for (Index d = 0; d < mu.size(); ++d) kl += 0.5 * (mu(d) * mu(d) + std::exp(lv(d)) - 1.0 - lv(d));
    double ll = 0.0;
    const auto &s = m.schema();
    const auto eo = s.encoded_offsets();
    const auto po = s.param_offsets();
    for (std::size_t k = 0; k < s.columns.size(); ++k) {
        const auto e = static_cast<Index>(eo[k]);
        const auto q = static_cast<Index>(po[k]);
        const double xv = x_row(0, e);
        switch (s.columns[k].kind) {
        case data::ColumnKind::continuous:
        case data::ColumnKind::count: {
            const double var = std::exp(std::clamp(p(q + 1), -15.0, 15.0));
            ll += -0.5 * std::log(2.0 * std::numbers::pi * var) - 0.5 * (xv - p(q)) * (xv - p(q)) / var;
            break;
        }
        case data::ColumnKind::binary: {
            const double pr = 1.0 / (1.0 + std::exp(-p(q)));
            ll += xv > 0.5 ? std::log(pr) : std::log(1.0 - pr);
            break;
        }
        case data::ColumnKind::categorical: {
            const auto w = static_cast<Index>(s.columns[k].levels.size());
            double z_sum = 0.0;
            double picked = 0.0;
            for (Index l = 0; l < w; ++l) {
                z_sum += std::exp(p(q + l));
                picked += x_row(0, e + l) * p(q + l);
            }
            ll += picked - std::log(z_sum);
            break;
        }
        }
    }
    return kl - ll;
}

double central_difference(double &value, const std::function<double()> &f, double h = 1e-5) {
    const double saved = value;
    value = saved + h;
    const double up = f();
    value = saved - h;
    const double down = f();
    value = saved;
    return (up - down) / (2.0 * h);
}

}  // namespace

TEST(Encode, DeterministicAndZeroHeads) {
    const auto m = toy_matrix(20);
    VaeModel model(m.schema, small_config(), 3);
    Dense2D x(2, m.values.cols());
    x.row(0) = m.values.row(4);
    x.row(1) = m.values.row(4);
    const auto q = model.encode(x);
    EXPECT_EQ(q.mu.row(0), q.mu.row(1));
    EXPECT_EQ(q.logvar.row(0), q.logvar.row(1));

    model.mu_head.weight.setZero();
    model.mu_head.bias.setZero();
    model.logvar_head.weight.setZero();
    model.logvar_head.bias.setZero();
    const auto q0 = model.encode(m.values);
    EXPECT_TRUE((q0.mu.array() == 0.0).all());
    EXPECT_TRUE((q0.logvar.array() == 0.0).all());
}

TEST(Encode, LogvarClampedForAdversarialInputs) {
    const auto m = toy_matrix(20);
    VaeModel model(m.schema, small_config(), 3);
    model.logvar_head.bias.setConstant(1e4);
    auto q = model.encode(m.values * 1e6);
    EXPECT_LE(q.logvar.maxCoeff(), 15.0);
    model.logvar_head.bias.setConstant(-1e4);
    q = model.encode(m.values * -1e6);
    EXPECT_GE(q.logvar.minCoeff(), -15.0);
    EXPECT_THROW(model.encode(Dense2D::Zero(1, 2)), ShapeError);
}

TEST(Reparameterize, Examples) {
    GaussianPosterior q{Dense2D(1, 2), Dense2D(1, 2)};
    q.mu << 1, 2;
    q.logvar << 0, 0;
    Dense2D eps = Dense2D::Zero(1, 2);
    auto z = reparameterize(q, eps);
    EXPECT_EQ(z(0, 0), 1.0);
    EXPECT_EQ(z(0, 1), 2.0);
    q.logvar << 0, std::log(4.0);
    eps << 1, -1;
    z = reparameterize(q, eps);
    EXPECT_DOUBLE_EQ(z(0, 0), 2.0);
    EXPECT_NEAR(z(0, 1), 0.0, 1e-15);
    // affine in epsilon
    const auto z2 = reparameterize(q, 2.0 * eps);
    const auto z0 = reparameterize(q, 0.0 * eps);
    EXPECT_TRUE(((z2 - z0) - 2.0 * (z - z0)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST(Reparameterize, MonteCarloMoments) {
    Rng rng(17);
    const Index n = 100000;
    GaussianPosterior q{Dense2D::Zero(n, 1), Dense2D::Zero(n, 1)};
    const Dense2D eps = standard_normal_matrix(n, 1, rng);
    const Dense2D z = reparameterize(q, eps);
    const double mean = z.mean();
    const double var = (z.array() - mean).square().sum() / static_cast<double>(n - 1);
    EXPECT_NEAR(mean, 0.0, 0.01);
    EXPECT_NEAR(var, 1.0, 0.02);
}

TEST(KlDivergence, Identities) {
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(4), lv = Eigen::VectorXd::Zero(4);
    EXPECT_EQ(kl_divergence(mu, lv), 0.0);
    Eigen::VectorXd m1(1), l1(1);
    m1 << 1.0;
    l1 << 0.0;
    EXPECT_DOUBLE_EQ(kl_divergence(m1, l1), 0.5);
    m1 << 0.0;
    l1 << 1.0;
    EXPECT_NEAR(kl_divergence(m1, l1), (std::numbers::e - 2.0) / 2.0, 1e-15);
}

TEST(KlDivergence, NonNegativeProperty) {
    Rng rng(5);
    for (int t = 0; t < 500; ++t) {
        Eigen::VectorXd mu(3), lv(3);
        for (int d = 0; d < 3; ++d) {
            mu(d) = 3.0 * standard_normal(rng);
            lv(d) = 4.0 * standard_normal(rng);
        }
        EXPECT_GT(kl_divergence(mu, lv), 0.0);
    }
}

TEST(LogLikelihood, ColumnExamples) {
    using data::ColumnKind;
    std::vector<ColumnSlot> cont{{ColumnKind::continuous, 0, 0, 1}};
    Eigen::RowVectorXd p(2), x(1);
    p << 0.0, 0.0;
    x << 0.0;
    EXPECT_NEAR(log_likelihood(p, x, cont), -0.5 * std::log(2.0 * std::numbers::pi), 1e-15);

    std::vector<ColumnSlot> bin{{ColumnKind::binary, 0, 0, 1}};
    Eigen::RowVectorXd pb(1), xb(1);
    pb << 20.0;
    xb << 1.0;
    EXPECT_NEAR(log_likelihood(pb, xb, bin), -2.0611536e-9, 1e-15);
    pb << 800.0;
    xb << 0.0;
    EXPECT_NEAR(log_likelihood(pb, xb, bin), -800.0, 1e-9);

    std::vector<ColumnSlot> cat{{ColumnKind::categorical, 0, 0, 3}};
    Eigen::RowVectorXd pc = Eigen::RowVectorXd::Constant(3, 7.5), xc(3);
    xc << 0, 0, 1;
    EXPECT_NEAR(log_likelihood(pc, xc, cat), std::log(1.0 / 3.0), 1e-14);
}

TEST(ElboLoss, MatchesIndependentReference) {
    const auto m = toy_matrix(10);
    VaeModel model(m.schema, small_config(), 11);
    Rng rng(3);
    const Dense2D eps = standard_normal_matrix(10, 3, rng);
    const auto [value, tape] = elbo_loss_with_noise(model, m.values, eps, numerics::Mode::infer, nullptr);
    double ref = 0.0;
    for (Index i = 0; i < 10; ++i) ref += reference_row_loss(model, m.values.row(i), eps.row(i));
    EXPECT_NEAR(value.loss, ref / 10.0, 1e-10 * std::abs(ref));
    EXPECT_NEAR(value.loss, value.kl - value.log_likelihood, 1e-12 * std::abs(value.loss));
    EXPECT_THROW(elbo_loss_with_noise(model, Dense2D::Zero(0, m.values.cols()), Dense2D::Zero(0, 3), numerics::Mode::infer, nullptr), ShapeError);
}

TEST(ElboLoss, PriorPinnedPosteriorHasZeroKl) {
    const auto m = toy_matrix(10);
    VaeModel model(m.schema, small_config(), 2);
    for (auto *l : {&model.mu_head, &model.logvar_head}) {
        l->weight.setZero();
        l->bias.setZero();
    }
    Rng rng(1);
    const auto [value, tape] = elbo_loss(model, m.values, rng, numerics::Mode::infer);
    EXPECT_EQ(value.kl, 0.0);
    EXPECT_DOUBLE_EQ(value.loss, -value.log_likelihood);
}

// Finite-difference oracle on the full ELBO: 20 random small models on a
// 10-row toy table, with fixed noise and a fixed dropout mask per evaluation.
TEST(ElboGradient, MatchesCentralDifferences) {
    const auto m = toy_matrix(10, 5);
    double worst = 0.0;
    for (std::uint64_t trial = 0; trial < 20; ++trial) {
        auto cfg = small_config();
        cfg.latent_dim = 2 + static_cast<int>(trial % 3);
        cfg.hidden_units = 4 + static_cast<int>(trial % 4);
        VaeModel model(m.schema, cfg, 100 + trial);
        Rng rng(trial);
        const Dense2D eps = standard_normal_matrix(10, cfg.latent_dim, rng);
        const auto mode = trial % 2 == 0 ? numerics::Mode::train : numerics::Mode::infer;
        auto loss = [&] {
            Rng drop(trial + 999);
            return elbo_loss_with_noise(model, m.values, eps, mode, &drop).first.loss;
        };
        Rng drop(trial + 999);
        const auto [value, tape] = elbo_loss_with_noise(model, m.values, eps, mode, &drop);
        const auto grads = elbo_backward(model, tape);
        const auto params = model.parameters();
        ASSERT_EQ(grads.size(), params.size());
        for (std::size_t l = 0; l < params.size(); ++l) {
            for (Index i = 0; i < params[l]->weight.size(); ++i) {
                const double fd = central_difference(params[l]->weight.data()[i], loss);
                const double an = grads[l].weight.data()[i];
                worst = std::max(worst, std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-4}));
            }
            for (Index i = 0; i < params[l]->bias.size(); ++i) {
                const double fd = central_difference(params[l]->bias(i), loss);
                const double an = grads[l].bias(i);
                worst = std::max(worst, std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-4}));
            }
        }
    }
    EXPECT_LT(worst, 1e-4);
}

TEST(ElboGradient, ClampedLogvarHasZeroGradient) {
    const auto m = toy_matrix(10);
    VaeModel model(m.schema, small_config(), 4);
    model.logvar_head.bias.setConstant(40.0);
    Rng rng(1);
    const Dense2D eps = standard_normal_matrix(10, 3, rng);
    const auto [value, tape] = elbo_loss_with_noise(model, m.values, eps, numerics::Mode::infer, nullptr);
    const auto grads = elbo_backward(model, tape);
    EXPECT_TRUE((grads[3].bias.array() == 0.0).all());
    EXPECT_TRUE((grads[3].weight.array() == 0.0).all());
}

TEST(EarlyStopping, PatienceOneStopsAfterFirstRegression) {
    EarlyStopping es(1);
    EXPECT_TRUE(es.update(10));
    EXPECT_TRUE(es.update(9));
    EXPECT_FALSE(es.should_stop());
    EXPECT_FALSE(es.update(9.5));
    EXPECT_TRUE(es.should_stop());
    EXPECT_EQ(es.best_epoch(), 2);
    EXPECT_EQ(es.best(), 9);
}

TEST(Train, ZeroEpochsReturnsInitialModel) {
    const auto m = toy_matrix(40);
    auto cfg = small_config();
    cfg.max_epochs = 0;
    VaeModel init(m.schema, cfg, 0);
    const auto res = train(init, m.values.topRows(30), m.values.bottomRows(10), 0);
    EXPECT_TRUE(res.train_loss.empty());
    EXPECT_TRUE(res.val_loss.empty());
    EXPECT_EQ(res.model.enc_hidden.weight, init.enc_hidden.weight);
    EXPECT_TRUE(std::isfinite(res.best_val_loss));
}

TEST(Train, DeterministicAndSnapshotIsBest) {
    const auto m = toy_matrix(200);
    auto cfg = small_config();
    cfg.batch_size = 50;
    cfg.max_epochs = 12;
    cfg.early_stop_patience = 4;
    const Dense2D tr = m.values.topRows(160);
    const Dense2D va = m.values.bottomRows(40);
    const auto a = train(VaeModel(m.schema, cfg, 7), tr, va, 7);
    const auto b = train(VaeModel(m.schema, cfg, 7), tr, va, 7);
    EXPECT_EQ(a.train_loss, b.train_loss);
    EXPECT_EQ(a.val_loss, b.val_loss);
    EXPECT_EQ(a.model.dec_out.weight, b.model.dec_out.weight);
    const double best = *std::min_element(a.val_loss.begin(), a.val_loss.end());
    EXPECT_EQ(a.best_val_loss, best);
    auto rng = make_rng({7, 0x7a1dULL});
    const Dense2D eps = standard_normal_matrix(va.rows(), cfg.latent_dim, rng);
    EXPECT_EQ(validation_loss(a.model, va, eps), best);
}

TEST(Train, LossDecreasesOnToyData) {
    const auto m = toy_matrix(1000);
    auto cfg = VaeConfig{};
    cfg.max_epochs = 10;
    cfg.batch_size = 100;
    const auto res = train(VaeModel(m.schema, cfg, 0), m.values.topRows(800), m.values.bottomRows(200), 0);
    ASSERT_EQ(res.train_loss.size(), 10u);
    // moving average over 3 epochs is monotone non-increasing
    for (std::size_t e = 3; e < res.train_loss.size(); ++e) {
        const double prev = res.train_loss[e - 3] + res.train_loss[e - 2] + res.train_loss[e - 1];
        const double cur = res.train_loss[e - 2] + res.train_loss[e - 1] + res.train_loss[e];
        EXPECT_LE(cur, prev) << "epoch " << e;
    }
    EXPECT_LT(res.train_loss.back(), res.train_loss.front());
}

TEST(MultiSeed, FlagsBestAndExcludesFailures) {
    auto fake = [](std::uint64_t seed) {
        if (seed == 4) throw TrainingError("injected");
        TrainResult r;
        r.seed = seed;
        r.best_val_loss = static_cast<double>((seed * 7) % 15);
        return r;
    };
    const auto res = rank_seed_runs(15, 3, fake);
    ASSERT_EQ(res.runs.size(), 15u);
    int ok = 0;
    for (const auto &r : res.runs) ok += r.result ? 1 : 0;
    EXPECT_EQ(ok, 14);
    const auto flagged = res.flagged();
    ASSERT_EQ(flagged.size(), 3u);
    EXPECT_EQ(flagged[0]->seed, 0u);   // loss 0
    EXPECT_EQ(flagged[1]->seed, 13u);  // loss 1
    EXPECT_EQ(flagged[2]->seed, 11u);  // loss 2
    EXPECT_FALSE(res.runs.back().result.has_value());
    EXPECT_EQ(res.runs.back().seed, 4u);

    const auto single = rank_seed_runs(1, 1, fake);
    EXPECT_EQ(single.flagged().size(), 1u);
    EXPECT_THROW(rank_seed_runs(3, 3, [](std::uint64_t) -> TrainResult { throw TrainingError("x"); }), TrainingError);
}

TEST(MultiSeed, TiesBrokenBySeed) {
    const auto res = rank_seed_runs(5, 2, [](std::uint64_t seed) {
        TrainResult r;
        r.seed = seed;
        r.best_val_loss = seed < 2 ? 5.0 : 1.0;
        return r;
    });
    EXPECT_EQ(res.runs[0].seed, 2u);
    EXPECT_EQ(res.runs[1].seed, 3u);
    EXPECT_EQ(res.runs[2].seed, 4u);
}

TEST(MultiSeed, RealTrainingFlagsKeepBest) {
    const auto m = toy_matrix(120);
    auto cfg = small_config();
    cfg.batch_size = 40;
    cfg.max_epochs = 3;
    cfg.seeds = 4;
    cfg.keep_best = 2;
    const auto res = multi_seed_train(m.schema, m.values.topRows(100), m.values.bottomRows(20), cfg);
    EXPECT_EQ(res.runs.size(), 4u);
    EXPECT_EQ(res.flagged().size(), 2u);
    for (std::size_t i = 1; i < res.runs.size(); ++i) {
        EXPECT_LE(res.runs[i - 1].result->best_val_loss, res.runs[i].result->best_val_loss);
    }
}

TEST(VaeConfig, ValidationAndRoundTrip) {
    VaeConfig c;
    c.keep_best = 16;
    EXPECT_THROW(c.validate(), InputError);
    c = VaeConfig{};
    c.latent_dim = 0;
    EXPECT_THROW(c.validate(), InputError);
    c = VaeConfig{};
    c.learning_rate = 3e-4;
    c.selection = SeedSelection::discriminator;
    KeyValueFile kv;
    c.write_to(kv);
    VaeConfig back;
    back.read_from(kv);
    EXPECT_EQ(back.learning_rate, 3e-4);
    EXPECT_EQ(back.selection, SeedSelection::discriminator);
    EXPECT_EQ(back.seeds, 15);
}

TEST(Checkpoint, RoundTripIsBitIdentical) {
    const auto m = toy_matrix(30);
    VaeModel model(m.schema, small_config(), 21);
    Container c;
    write_vae(c, model);
    const auto dir = testutil::scratch_dir("ckpt");
    c.save(dir / "model.ckpt");
    const auto back = read_vae(Container::load(dir / "model.ckpt"));
    const auto q1 = model.encode(m.values);
    const auto q2 = back.encode(m.values);
    EXPECT_EQ(q1.mu, q2.mu);
    EXPECT_EQ(q1.logvar, q2.logvar);
    EXPECT_EQ(model.decode(q1.mu), back.decode(q2.mu));
    EXPECT_EQ(back.schema().hash(), model.schema().hash());
}

TEST(Checkpoint, TamperedSchemaIsRejected) {
    const auto m = toy_matrix(30);
    VaeModel model(m.schema, small_config(), 21);
    Container c;
    write_vae(c, model);
    c.section("vae").fields.set("schema_hash", "0000000000000000");
    EXPECT_THROW(read_vae(c), ArtifactMismatch);
}
