#include "vaebgm/numerics/adam.hpp"
#include "vaebgm/numerics/grad_check.hpp"
#include "vaebgm/numerics/layers.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace vaebgm;
using namespace vaebgm::numerics;

namespace {

Dense2D random_matrix(Index r, Index c, Rng &rng, double scale = 1.0) {
    Dense2D m(r, c);
    for (Index i = 0; i < r; ++i) {
        for (Index j = 0; j < c; ++j) m(i, j) = scale * standard_normal(rng);
    }
    return m;
}

// Independent central-difference derivative of `f` with respect to `value`.
template <class F>
double central_difference(double &value, F &&f, double h = 1e-5) {
    const double saved = value;
    value = saved + h;
    const double up = f();
    value = saved - h;
    const double down = f();
    value = saved;
    return (up - down) / (2.0 * h);
}

double relative_error(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-4});
}

}  // namespace

TEST(Forward, IdentityLayerPassesInputThrough) {
    auto layer = Layer::zeros("id", 3, 3, Activation::identity);
    layer.weight.setIdentity();
    Dense2D x(2, 3);
    x << 1, -2, 3, 0.5, 0.25, -7;
    const auto [y, tape] = forward({layer}, x, Mode::infer, nullptr);
    EXPECT_EQ(y, x);
}

TEST(Forward, ReluClampsNegatives) {
    auto layer = Layer::zeros("relu", 3, 3, Activation::relu);
    layer.weight.setIdentity();
    Dense2D x(1, 3);
    x << -1, 0, 2;
    const auto [y, tape] = forward({layer}, x, Mode::infer, nullptr);
    EXPECT_EQ(y(0, 0), 0.0);
    EXPECT_EQ(y(0, 1), 0.0);
    EXPECT_EQ(y(0, 2), 2.0);
}

TEST(Forward, DropoutIsIdentityInInferMode) {
    Rng rng(4);
    auto layer = Layer::uniform_init("h", 4, 6, Activation::relu, rng);
    auto plain = layer;
    layer.dropout_rate = 0.2;
    const Dense2D x = random_matrix(5, 4, rng);
    const auto [a, ta] = forward({layer}, x, Mode::infer, &rng);
    const auto [b, tb] = forward({plain}, x, Mode::infer, nullptr);
    EXPECT_EQ(a, b);
}

TEST(Forward, SoftmaxBlocksNormalizeIndependently) {
    auto layer = Layer::zeros("sm", 5, 5, Activation::softmax_blocks);
    layer.weight.setIdentity();
    layer.softmax_blocks = {{0, 2}, {2, 3}};
    Dense2D x(1, 5);
    x << 1000.0, 999.0, -3, 0, 3;
    const auto [y, tape] = forward({layer}, x, Mode::infer, nullptr);
    EXPECT_NEAR(y.row(0).segment(0, 2).sum(), 1.0, 1e-15);
    EXPECT_NEAR(y.row(0).segment(2, 3).sum(), 1.0, 1e-15);
    EXPECT_NEAR(y(0, 0), 1.0 / (1.0 + std::exp(-1.0)), 1e-12);
}

TEST(Forward, Errors) {
    auto layer = Layer::zeros("w", 3, 2, Activation::identity);
    EXPECT_THROW(forward({layer}, Dense2D::Zero(1, 4), Mode::infer, nullptr), ShapeError);
    layer.weight.setConstant(1e308);
    Dense2D x = Dense2D::Constant(1, 3, 10.0);
    try {
        forward({layer}, x, Mode::infer, nullptr);
        FAIL();
    } catch (const TrainingError &e) {
        EXPECT_NE(std::string(e.what()).find("'w'"), std::string::npos);
    }
}

TEST(Backward, IdentityNetworkReturnsOutputGradient) {
    auto layer = Layer::zeros("id", 3, 3, Activation::identity);
    layer.weight.setIdentity();
    Rng rng(1);
    const Dense2D x = random_matrix(4, 3, rng);
    const Dense2D g = random_matrix(4, 3, rng);
    const auto [y, tape] = forward({layer}, x, Mode::infer, nullptr);
    const auto [grads, gx] = backward({layer}, tape, g);
    EXPECT_EQ(gx, g);
}

TEST(Backward, LinearWeightGradientIsOuterProduct) {
    Rng rng(2);
    auto layer = Layer::uniform_init("lin", 3, 2, Activation::identity, rng);
    Dense2D x(1, 3);
    x << 1, 2, 3;
    Dense2D g(1, 2);
    g << 0.5, -1;
    const auto [y, tape] = forward({layer}, x, Mode::infer, nullptr);
    const auto [grads, gx] = backward({layer}, tape, g);
    const Dense2D expected = g.transpose() * x;
    EXPECT_EQ(grads[0].weight, expected);
    EXPECT_EQ(grads[0].bias(0), 0.5);
    EXPECT_EQ(grads[0].bias(1), -1.0);
}

TEST(Backward, RejectsMismatchedTape) {
    Rng rng(3);
    auto layer = Layer::uniform_init("lin", 3, 2, Activation::identity, rng);
    const auto [y, tape] = forward({layer}, random_matrix(2, 3, rng), Mode::infer, nullptr);
    EXPECT_THROW(backward({layer}, tape, Dense2D::Zero(3, 2)), ShapeError);
    EXPECT_THROW(backward({layer, layer}, tape, Dense2D::Zero(2, 2)), ShapeError);
}

// Finite-difference oracle over random two-layer networks covering every
// activation, with the loss sum(R .* f(x)) for a fixed random R.
TEST(BackwardProperty, MatchesCentralDifferencesForRandomNetworks) {
    const Activation acts[] = {Activation::identity, Activation::relu, Activation::tanh, Activation::sigmoid,
                               Activation::softmax_blocks};
    double worst = 0.0;
    for (std::uint64_t trial = 0; trial < 25; ++trial) {
        Rng rng(1000 + trial);
        const Index in = 2 + static_cast<Index>(trial % 4);
        const Index hidden = 3 + static_cast<Index>(trial % 5);
        const Index out = 5;
        std::vector<Layer> net{Layer::uniform_init("a", in, hidden, acts[trial % 4], rng),
                               Layer::uniform_init("b", hidden, out, acts[(trial + 1) % 5], rng)};
        net[1].softmax_blocks = {{0, 2}, {2, 3}};
        const bool with_dropout = trial % 3 == 0;
        if (with_dropout) net[0].dropout_rate = 0.3;
        const Dense2D x = random_matrix(6, in, rng, 1.5);
        const Dense2D r = random_matrix(6, out, rng);
        const std::uint64_t mask_seed = 77 + trial;

        auto loss = [&] {
            Rng mask_rng(mask_seed);
            const auto [y, tape] = forward(net, x, Mode::train, &mask_rng);
            return (y.array() * r.array()).sum();
        };
        Rng mask_rng(mask_seed);
        const auto [y, tape] = forward(net, x, Mode::train, &mask_rng);
        const auto [grads, gx] = backward(net, tape, r);
        for (std::size_t l = 0; l < net.size(); ++l) {
            for (Index i = 0; i < net[l].weight.size(); ++i) {
                const double fd = central_difference(net[l].weight.data()[i], loss);
                worst = std::max(worst, relative_error(fd, grads[l].weight.data()[i]));
            }
            for (Index i = 0; i < net[l].bias.size(); ++i) {
                const double fd = central_difference(net[l].bias(i), loss);
                worst = std::max(worst, relative_error(fd, grads[l].bias(i)));
            }
        }
        Dense2D xm = x;
        auto loss_x = [&] {
            Rng m2(mask_seed);
            const auto [yy, tt] = forward(net, xm, Mode::train, &m2);
            return (yy.array() * r.array()).sum();
        };
        for (Index i = 0; i < xm.size(); ++i) {
            const double fd = central_difference(xm.data()[i], loss_x);
            worst = std::max(worst, relative_error(fd, gx.data()[i]));
        }
    }
    EXPECT_LT(worst, 1e-4);
}

TEST(Dropout, TrainModeExpectationMatchesInferOutput) {
    Rng rng(9);
    auto layer = Layer::uniform_init("h", 3, 8, Activation::tanh, rng);
    layer.dropout_rate = 0.2;
    Dense2D x = random_matrix(1, 3, rng);
    const auto [ref, t0] = forward({layer}, x, Mode::infer, nullptr);
    Dense2D acc = Dense2D::Zero(1, 8);
    const int draws = 10000;
    for (int d = 0; d < draws; ++d) acc += forward_layer(layer, x, Mode::train, &rng, nullptr);
    acc /= draws;
    for (Index j = 0; j < 8; ++j) {
        EXPECT_NEAR(acc(0, j), ref(0, j), 0.02 * std::max(std::abs(ref(0, j)), 0.1)) << "unit " << j;
    }
}

TEST(Dropout, BackwardReusesForwardMask) {
    Rng rng(5);
    auto layer = Layer::zeros("h", 4, 4, Activation::identity);
    layer.weight.setIdentity();
    layer.dropout_rate = 0.5;
    const Dense2D x = Dense2D::Ones(3, 4);
    const auto [y, tape] = forward({layer}, x, Mode::train, &rng);
    const auto [grads, gx] = backward({layer}, tape, Dense2D::Ones(3, 4));
    EXPECT_EQ(gx, y);  // identity map: input gradient equals the mask, which equals the output
}

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
    Rng rng(1);
    auto layer = Layer::uniform_init("a", 3, 2, Activation::relu, rng);
    const auto before = layer;
    AdamState st;
    adam_step({&layer}, {LayerGrad::zeros_like(layer)}, st, {});
    EXPECT_EQ(layer.weight, before.weight);
    EXPECT_EQ(layer.bias, before.bias);
}

TEST(Adam, FirstStepClosedForm) {
    Rng rng(1);
    auto layer = Layer::uniform_init("a", 3, 2, Activation::relu, rng);
    const auto before = layer;
    auto g = LayerGrad::zeros_like(layer);
    g.weight = random_matrix(2, 3, rng);
    g.weight(0, 0) = 1e-9;
    g.bias << 3.0, -0.5;
    AdamState st;
    const AdamConfig cfg;
    adam_step({&layer}, {g}, st, cfg);
    for (Index i = 0; i < g.weight.size(); ++i) {
        const double gi = g.weight.data()[i];
        const double expected = cfg.learning_rate * gi / (std::abs(gi) + cfg.epsilon);
        EXPECT_NEAR(before.weight.data()[i] - layer.weight.data()[i], expected, 1e-15);
    }
    EXPECT_NEAR(before.bias(0) - layer.bias(0), 1e-3 * 3.0 / (3.0 + 1e-8), 1e-15);
    EXPECT_NEAR(before.bias(1) - layer.bias(1), -1e-3 * 0.5 / (0.5 + 1e-8), 1e-15);
    EXPECT_EQ(st.step, 1);
}

TEST(Adam, DeterministicTrajectories) {
    auto run = [] {
        Rng rng(12);
        auto layer = Layer::uniform_init("a", 4, 3, Activation::tanh, rng);
        AdamState st;
        for (int s = 0; s < 50; ++s) {
            auto g = LayerGrad::zeros_like(layer);
            g.weight = random_matrix(3, 4, rng);
            g.bias = random_matrix(3, 1, rng).col(0);
            adam_step({&layer}, {g}, st, {});
        }
        return layer;
    };
    const auto a = run();
    const auto b = run();
    EXPECT_EQ(a.weight, b.weight);
    EXPECT_EQ(a.bias, b.bias);
}

TEST(Adam, NonFiniteGradientNamesLayer) {
    Rng rng(1);
    auto layer = Layer::uniform_init("decoder_out", 3, 2, Activation::relu, rng);
    const auto before = layer;
    auto g = LayerGrad::zeros_like(layer);
    g.bias(1) = std::nan("");
    AdamState st;
    try {
        adam_step({&layer}, {g}, st, {});
        FAIL();
    } catch (const TrainingError &e) {
        EXPECT_NE(std::string(e.what()).find("decoder_out"), std::string::npos);
    }
    EXPECT_EQ(layer.weight, before.weight);
    EXPECT_THROW(adam_step({&layer}, {}, st, {}), ShapeError);
}

TEST(GradCheck, QuadraticLossMatchesTightly) {
    std::vector<double> x{0.3, -1.2, 2.5, 0.0};
    const std::vector<double> analytic = x;
    const std::vector<ParamBlockRef> blocks{{"x", {x.data(), x.size()}, {analytic.data(), analytic.size()}}};
    const auto report = grad_check(blocks, [&] {
        double s = 0;
        for (double v : x) s += 0.5 * v * v;
        return s;
    });
    EXPECT_TRUE(report.pass());
    EXPECT_LT(report.max_relative_error(), 1e-6);
}

TEST(GradCheck, CorruptedGradientFailsOnlyThatBlock) {
    Rng rng(8);
    std::vector<Layer> net{Layer::uniform_init("h", 3, 4, Activation::tanh, rng), Layer::uniform_init("o", 4, 2, Activation::identity, rng)};
    const Dense2D x = random_matrix(5, 3, rng);
    const Dense2D r = random_matrix(5, 2, rng);
    auto loss = [&] { return (forward(net, x, Mode::infer, nullptr).first.array() * r.array()).sum(); };
    const auto [y, tape] = forward(net, x, Mode::infer, nullptr);
    auto [grads, gx] = backward(net, tape, r);
    std::vector<Layer *> ptrs{&net[0], &net[1]};
    auto clean = grad_check(layer_blocks(ptrs, grads), loss);
    EXPECT_TRUE(clean.pass());
    grads[1].weight *= 2.0;
    auto bad = grad_check(layer_blocks(ptrs, grads), loss);
    EXPECT_FALSE(bad.pass());
    for (const auto &b : bad.blocks) EXPECT_EQ(b.pass, b.name != "o.weight") << b.name;
}
