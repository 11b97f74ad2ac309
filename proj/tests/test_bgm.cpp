#include "test_util.hpp"

#include "vaebgm/bgm/bgm.hpp"
#include "vaebgm/bgm/kmeans.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace vaebgm;
using namespace vaebgm::bgm;

namespace {

Dense2D two_mode_1d(Index n, std::uint64_t seed) {
    Rng rng(seed);
    Dense2D x(n, 1);
    for (Index i = 0; i < n; ++i) x(i, 0) = (i < n / 2 ? -5.0 : 5.0) + standard_normal(rng);
    return x;
}

Dense2D standard_normal_rows(Index n, Index d, std::uint64_t seed) {
    Rng rng(seed);
    Dense2D x(n, d);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < d; ++j) x(i, j) = standard_normal(rng);
    }
    return x;
}

struct EmFit {
    std::vector<double> weight, mean, var;
};

// Plain maximum-likelihood EM for a 1-D Gaussian mixture, written
// independently of the variational fitter.
EmFit em_oracle_1d(const Dense2D &x, std::vector<double> mean_init, int iterations = 300) {
    const std::size_t k = mean_init.size();
    EmFit f{std::vector<double>(k, 1.0 / static_cast<double>(k)), std::move(mean_init), std::vector<double>(k, 1.0)};
    const Index n = x.rows();
    std::vector<double> r(static_cast<std::size_t>(n) * k);
    for (int it = 0; it < iterations; ++it) {
        for (Index i = 0; i < n; ++i) {
            double total = 0.0;
            for (std::size_t c = 0; c < k; ++c) {
                const double d = x(i, 0) - f.mean[c];
                const double p = f.weight[c] * std::exp(-0.5 * d * d / f.var[c]) / std::sqrt(2.0 * std::numbers::pi * f.var[c]);
                r[static_cast<std::size_t>(i) * k + c] = p;
                total += p;
            }
            for (std::size_t c = 0; c < k; ++c) r[static_cast<std::size_t>(i) * k + c] /= total;
        }
        for (std::size_t c = 0; c < k; ++c) {
            double nk = 0.0, s = 0.0;
            for (Index i = 0; i < n; ++i) {
                nk += r[static_cast<std::size_t>(i) * k + c];
                s += r[static_cast<std::size_t>(i) * k + c] * x(i, 0);
            }
            f.mean[c] = s / nk;
            double v = 0.0;
            for (Index i = 0; i < n; ++i) {
                const double d = x(i, 0) - f.mean[c];
                v += r[static_cast<std::size_t>(i) * k + c] * d * d;
            }
            f.var[c] = v / nk;
            f.weight[c] = nk / static_cast<double>(n);
        }
    }
    return f;
}

std::vector<Index> components_above(const BgmModel &m, double threshold) {
    std::vector<Index> out;
    for (Index k = 0; k < m.components(); ++k) {
        if (m.weights(k) > threshold) out.push_back(k);
    }
    std::sort(out.begin(), out.end(), [&](Index a, Index b) { return m.means(a, 0) < m.means(b, 0); });
    return out;
}

}  // namespace

TEST(KMeans, SeparatesObviousClusters) {
    const auto x = two_mode_1d(200, 1);
    const auto a = kmeans_assign(x, 2, 3);
    for (Index i = 1; i < 100; ++i) EXPECT_EQ(a[static_cast<std::size_t>(i)], a[0]);
    for (Index i = 101; i < 200; ++i) EXPECT_EQ(a[static_cast<std::size_t>(i)], a[100]);
    EXPECT_NE(a[0], a[100]);
}

TEST(BgmFit, RecoversTwoModesAndMatchesEmOracle) {
    const auto x = two_mode_1d(2000, 42);
    BgmPriorConfig prior;
    prior.max_components = 5;
    const auto res = fit(x, prior, 0);
    const auto &m = res.model;
    EXPECT_EQ(m.effective_components(0.05), 2);
    const auto comps = components_above(m, 0.05);
    ASSERT_EQ(comps.size(), 2u);
    EXPECT_NEAR(m.means(comps[0], 0), -5.0, 0.15);
    EXPECT_NEAR(m.means(comps[1], 0), 5.0, 0.15);
    EXPECT_NEAR(m.weights(comps[0]), 0.5, 0.05);
    EXPECT_NEAR(m.weights(comps[1]), 0.5, 0.05);
    for (Index k = 0; k < m.components(); ++k) {
        if (k != comps[0] && k != comps[1]) EXPECT_LT(m.weights(k), 0.01);
    }
    const auto em = em_oracle_1d(x, {-1.0, 1.0});
    EXPECT_NEAR(m.means(comps[0], 0), em.mean[0], 0.1);
    EXPECT_NEAR(m.means(comps[1], 0), em.mean[1], 0.1);
    EXPECT_NEAR(m.weights(comps[0]), em.weight[0], 0.05);
    EXPECT_NEAR(m.weights(comps[1]), em.weight[1], 0.05);
    for (std::size_t i = 1; i < res.lower_bound.size(); ++i) EXPECT_GE(res.lower_bound[i], res.lower_bound[i - 1] - 1e-8);
    EXPECT_TRUE(m.converged);
}

TEST(BgmFit, MatchesEmOracleIn2D) {
    Rng rng(8);
    Dense2D x(1500, 2);
    for (Index i = 0; i < x.rows(); ++i) {
        const bool a = i % 3 != 0;
        x(i, 0) = (a ? -4.0 : 4.0) + standard_normal(rng);
        x(i, 1) = (a ? 2.0 : -3.0) + 0.5 * standard_normal(rng);
    }
    BgmPriorConfig prior;
    prior.max_components = 4;
    const auto m = fit(x, prior, 1).model;
    const auto comps = components_above(m, 0.05);
    ASSERT_EQ(comps.size(), 2u);
    EXPECT_NEAR(m.weights(comps[0]), 2.0 / 3.0, 0.05);
    EXPECT_NEAR(m.means(comps[0], 0), -4.0, 0.1);
    EXPECT_NEAR(m.means(comps[0], 1), 2.0, 0.1);
    EXPECT_NEAR(m.means(comps[1], 0), 4.0, 0.1);
    EXPECT_NEAR(m.means(comps[1], 1), -3.0, 0.1);
    // expected covariance of the tight component reflects the 0.5 scale
    EXPECT_NEAR(m.covariances[static_cast<std::size_t>(comps[0])](1, 1), 0.25, 0.05);
}

TEST(BgmFit, SingleGaussianCollapsesToOneComponent) {
    const auto x = standard_normal_rows(2000, 1, 9);
    BgmPriorConfig prior;
    prior.max_components = 5;
    const auto m = fit(x, prior, 0).model;
    EXPECT_EQ(m.effective_components(0.05), 1);
    EXPECT_GT(m.weights.maxCoeff(), 0.95);
    EXPECT_EQ(m.effective_components(), 1);
}

TEST(BgmFit, DeterministicAndInvariants) {
    const auto x = standard_normal_rows(500, 3, 4);
    const auto a = fit(x, {}, 5);
    const auto b = fit(x, {}, 5);
    EXPECT_EQ(a.lower_bound, b.lower_bound);
    EXPECT_EQ(a.model.weights, b.model.weights);
    EXPECT_EQ(a.model.means, b.model.means);
    EXPECT_NEAR(a.model.weights.sum(), 1.0, 1e-10);
    EXPECT_TRUE((a.model.weights.array() >= 0.0).all());
    EXPECT_NEAR(a.model.counts.sum(), 500.0, 1e-8);
    for (const auto &c : a.model.covariances) EXPECT_EQ(c.llt().info(), Eigen::Success);
}

TEST(BgmFit, MonotoneLowerBoundOnRandomData) {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        Rng rng(seed);
        Dense2D x(300, 2);
        for (Index i = 0; i < x.rows(); ++i) {
            x(i, 0) = standard_normal(rng) * (1.0 + static_cast<double>(seed)) + (i % 4 == 0 ? 6.0 : 0.0);
            x(i, 1) = 0.3 * x(i, 0) + standard_normal(rng);
        }
        EXPECT_NO_THROW(fit(x, {}, seed)) << "seed " << seed;
    }
}

TEST(BgmFit, DegenerateLatentDimensionIsRegularized) {
    Dense2D x = standard_normal_rows(400, 3, 2);
    x.col(2).setConstant(0.25);
    const auto m = fit(x, {}, 0).model;
    for (const auto &c : m.covariances) EXPECT_EQ(c.llt().info(), Eigen::Success);
}

TEST(BgmFit, Errors) {
    EXPECT_THROW(fit(Dense2D::Zero(2, 2), {}, 0), InputError);
    Dense2D x = standard_normal_rows(50, 2, 1);
    x(3, 1) = std::nan("");
    EXPECT_THROW(fit(x, {}, 0), InputError);
    BgmPriorConfig bad;
    bad.degrees_of_freedom = 1.0;
    EXPECT_THROW(fit(standard_normal_rows(50, 2, 1), bad, 0), InputError);
}

TEST(LogDensity, AnalyticCases) {
    const auto single = BgmModel::from_parameters(Vector::Ones(1), Dense2D::Zero(1, 2), {Eigen::MatrixXd::Identity(2, 2)});
    EXPECT_NEAR(single.log_density(Eigen::RowVector2d(0.0, 0.0)), -std::log(2.0 * std::numbers::pi), 1e-12);

    Vector w(2);
    w << 0.5, 0.5;
    const auto twin = BgmModel::from_parameters(w, Dense2D::Zero(2, 1), {Eigen::MatrixXd::Identity(1, 1), Eigen::MatrixXd::Identity(1, 1)});
    EXPECT_NEAR(twin.log_density(Eigen::RowVectorXd::Zero(1)), std::log(1.0 / std::sqrt(2.0 * std::numbers::pi)), 1e-12);

    Vector w0(2);
    w0 << 1.0, 0.0;
    Dense2D mu(2, 1);
    mu << 0.0, 100.0;
    const auto skip = BgmModel::from_parameters(w0, mu, {Eigen::MatrixXd::Identity(1, 1), Eigen::MatrixXd::Identity(1, 1)});
    EXPECT_NEAR(skip.log_density(Eigen::RowVectorXd::Zero(1)), -0.5 * std::log(2.0 * std::numbers::pi), 1e-12);
}

// Trapezoid quadrature of the fitted 1-D density over a wide grid.
TEST(LogDensity, IntegratesToOne) {
    const auto m = fit(two_mode_1d(1000, 3), {.max_components = 4}, 0).model;
    const double lo = -20.0, hi = 20.0;
    const int steps = 40000;
    const double h = (hi - lo) / steps;
    double total = 0.0;
    for (int i = 0; i <= steps; ++i) {
        const double w = (i == 0 || i == steps) ? 0.5 : 1.0;
        total += w * std::exp(m.log_density(Eigen::RowVectorXd::Constant(1, lo + h * i)));
    }
    EXPECT_NEAR(total * h, 1.0, 1e-3);
}

TEST(Sample, DegenerateCases) {
    Dense2D mu(1, 2);
    mu << 3.0, 3.0;
    const auto tight = BgmModel::from_parameters(Vector::Ones(1), mu, {1e-12 * Eigen::MatrixXd::Identity(2, 2)});
    Rng rng(1);
    const auto s = tight.sample(200, rng);
    EXPECT_LT((s.array() - 3.0).abs().maxCoeff(), 1e-5);

    Vector w(3);
    w << 1.0, 0.0, 0.0;
    Dense2D mus(3, 1);
    mus << -10.0, 0.0, 10.0;
    std::vector<Eigen::MatrixXd> covs(3, Eigen::MatrixXd::Identity(1, 1));
    const auto first = BgmModel::from_parameters(w, mus, covs);
    const auto t = first.sample(500, rng);
    EXPECT_LT(t.maxCoeff(), -4.0);
}

TEST(Sample, ComponentProportionsMatchWeights) {
    const auto m = fit(two_mode_1d(2000, 42), {.max_components = 5}, 0).model;
    Rng rng(77);
    const auto s = m.sample(100000, rng);
    const double left = (s.array() < 0.0).cast<double>().mean();
    double w_left = 0.0;
    for (Index k = 0; k < m.components(); ++k) {
        if (m.means(k, 0) < 0.0) w_left += m.weights(k);
    }
    EXPECT_NEAR(left, w_left, 0.01);
    Rng again(77);
    EXPECT_EQ(m.sample(100, again), [&] {
        Rng r2(77);
        return m.sample(100, r2);
    }());
}

TEST(EffectiveComponents, Counting) {
    std::vector<Eigen::MatrixXd> covs3(3, Eigen::MatrixXd::Identity(1, 1));
    Vector w(3);
    w << 0.98, 0.01, 0.01;
    EXPECT_EQ(BgmModel::from_parameters(w, Dense2D::Zero(3, 1), covs3).effective_components(0.05), 1);
    std::vector<Eigen::MatrixXd> covs5(5, Eigen::MatrixXd::Identity(1, 1));
    EXPECT_EQ(BgmModel::from_parameters(Vector::Constant(5, 0.2), Dense2D::Zero(5, 1), covs5).effective_components(0.05), 5);
}

TEST(Degeneracy, PriorLatentsGiveNearIdenticalSampler) {
    const auto z = standard_normal_rows(5000, 5, 31);
    const auto m = fit(z, {}, 0).model;
    EXPECT_EQ(m.effective_components(0.05), 1);
    EXPECT_GT(m.weights.maxCoeff(), 0.95);
    Rng rng(5);
    const auto s = m.sample(100000, rng);
    const Eigen::RowVectorXd mean = s.colwise().mean();
    const Dense2D centered = s.rowwise() - mean;
    const Dense2D cov = centered.transpose() * centered / static_cast<double>(s.rows() - 1);
    EXPECT_LT(mean.cwiseAbs().maxCoeff(), 0.05);
    EXPECT_LT((cov - Dense2D::Identity(5, 5)).cwiseAbs().maxCoeff(), 0.05);
}

TEST(Serialization, RoundTripIsExact) {
    const auto m = fit(two_mode_1d(400, 3), {.max_components = 3}, 0).model;
    Container c;
    m.write(c);
    std::stringstream ss;
    c.write(ss);
    const auto back = BgmModel::read(Container::read(ss));
    EXPECT_EQ(back.weights, m.weights);
    EXPECT_EQ(back.means, m.means);
    EXPECT_EQ(back.log_density(Eigen::RowVectorXd::Constant(1, 0.3)), m.log_density(Eigen::RowVectorXd::Constant(1, 0.3)));
}
