#ifndef VAEBGM_EVAL_STATS_HPP
#define VAEBGM_EVAL_STATS_HPP

#include "vaebgm/core/error.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

namespace vaebgm::eval {

struct Interval {
    double lower = 0.0;
    double upper = 0.0;
};

/// Mean with a two-sided confidence interval.
struct Estimate {
    double mean = 0.0;
    Interval ci;
    std::vector<double> per_seed;
};

inline double mean_of(const std::vector<double> &v) {
    if (v.empty()) throw InputError("mean of an empty sample");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double sample_sd(const std::vector<double> &v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

/// Student-t interval for the mean; a single value gives a zero-width interval.
inline Estimate t_estimate(std::vector<double> values, double level) {
    if (!(level > 0.0 && level < 1.0)) throw InputError("confidence level must lie in (0, 1)");
    Estimate e;
    e.mean = mean_of(values);
    e.ci = {e.mean, e.mean};
    if (values.size() >= 2) {
        const boost::math::students_t dist(static_cast<double>(values.size() - 1));
        const double q = boost::math::quantile(dist, 0.5 + 0.5 * level);
        const double half = q * sample_sd(values) / std::sqrt(static_cast<double>(values.size()));
        e.ci = {e.mean - half, e.mean + half};
    }
    e.per_seed = std::move(values);
    return e;
}

/// Wilson score interval for a binomial proportion.
inline Interval wilson_interval(double successes, double trials, double level) {
    if (trials <= 0.0) throw InputError("wilson interval: no trials");
    const boost::math::normal_distribution<double> norm;
    const double z = boost::math::quantile(norm, 0.5 + 0.5 * level);
    const double p = successes / trials;
    const double z2n = z * z / trials;
    const double centre = (p + 0.5 * z2n) / (1.0 + z2n);
    const double half = z * std::sqrt(p * (1.0 - p) / trials + z * z / (4.0 * trials * trials)) / (1.0 + z2n);
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw InputError("ks statistic: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v) ++i;
        while (j < b.size() && b[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

struct MannWhitneyResult {
    double u = 0.0;        // U statistic of the first sample
    double z = 0.0;        // normal approximation with tie and continuity corrections
    double p_value = 1.0;  // one-sided: first sample stochastically smaller
};

/// One-sided Mann-Whitney U test of "x tends to be smaller than y".
inline MannWhitneyResult mann_whitney_less(const std::vector<double> &x, const std::vector<double> &y) {
    if (x.empty() || y.empty()) throw InputError("mann-whitney: empty sample");
    struct Item {
        double v;
        int group;
    };
    std::vector<Item> all;
    all.reserve(x.size() + y.size());
    for (double v : x) all.push_back({v, 0});
    for (double v : y) all.push_back({v, 1});
    std::sort(all.begin(), all.end(), [](const Item &a, const Item &b) { return a.v < b.v; });
    const double n1 = static_cast<double>(x.size());
    const double n2 = static_cast<double>(y.size());
    const double n = n1 + n2;
    double rank_sum_x = 0.0;
    double tie_term = 0.0;
    for (std::size_t i = 0; i < all.size();) {
        std::size_t j = i;
        while (j < all.size() && all[j].v == all[i].v) ++j;
        const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);
        const double t = static_cast<double>(j - i);
        tie_term += t * t * t - t;
        for (std::size_t k = i; k < j; ++k) {
            if (all[k].group == 0) rank_sum_x += mid_rank;
        }
        i = j;
    }
    MannWhitneyResult r;
    r.u = rank_sum_x - n1 * (n1 + 1.0) / 2.0;
    const double mean_u = n1 * n2 / 2.0;
    const double var_u = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if (var_u <= 0.0) return r;
    r.z = (r.u - mean_u + 0.5) / std::sqrt(var_u);
    const boost::math::normal_distribution<double> norm;
    r.p_value = boost::math::cdf(norm, r.z);
    return r;
}

}  // namespace vaebgm::eval

#endif
