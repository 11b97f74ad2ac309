#ifndef VAEBGM_DATA_TOY_HPP
#define VAEBGM_DATA_TOY_HPP

#include "vaebgm/core/random.hpp"
#include "vaebgm/core/text.hpp"
#include "vaebgm/data/table.hpp"

#include <array>
#include <cmath>
#include <string>

namespace vaebgm::data {

namespace detail {

inline long long poisson_draw(double lambda, Rng &rng) {
    // Inverse-CDF walk; adequate for the small rates used here.
    const double u = uniform01(rng);
    double p = std::exp(-lambda);
    double cdf = p;
    long long k = 0;
    while (u > cdf && k < 10000) {
        ++k;
        p *= lambda / static_cast<double>(k);
        cdf += p;
    }
    return k;
}

inline std::string pick_level(const std::array<double, 4> &probs, const char *const *names, Rng &rng) {
    double u = uniform01(rng);
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (u < probs[i]) return names[i];
        u -= probs[i];
    }
    return names[probs.size() - 1];
}

}  // namespace detail

/// Two well-separated subpopulations expressed through seven mixed-type
/// columns. Every column shifts with the hidden cluster, so a generator whose
/// latent prior is unimodal tends to produce rows between the two modes.
inline RawTable toy_bimodal(std::size_t n_rows = 5000, std::uint64_t seed = 2024) {
    auto rng = make_rng({seed, 0x70e});
    static const char *const segments[] = {"north", "south", "east", "west"};
    static const char *const plans[] = {"basic", "plus", "pro", "max"};
    RawTable t;
    t.header = {"income", "spend", "visits", "member", "segment", "plan", "tenure"};
    t.rows.reserve(n_rows);
    for (std::size_t i = 0; i < n_rows; ++i) {
        const bool upper = uniform01(rng) < 0.5;
        const double shift = upper ? 1.0 : -1.0;
        const double income = 50.0 + 18.0 * shift + 4.0 * standard_normal(rng);
        const double spend = 0.4 * income + 6.0 * shift + 2.0 * standard_normal(rng);
        const long long visits = detail::poisson_draw(upper ? 24.0 : 4.0, rng);
        const bool member = uniform01(rng) < (upper ? 0.9 : 0.1);
        const std::array<double, 4> seg_p = upper ? std::array<double, 4>{0.6, 0.3, 0.05, 0.05} : std::array<double, 4>{0.05, 0.05, 0.3, 0.6};
        const std::array<double, 4> plan_p = upper ? std::array<double, 4>{0.05, 0.1, 0.35, 0.5} : std::array<double, 4>{0.55, 0.3, 0.1, 0.05};
        const double tenure = std::exp((upper ? 2.2 : 0.8) + 0.3 * standard_normal(rng));
        t.rows.push_back({format_fixed(income, 3), format_fixed(spend, 3), std::to_string(visits), member ? "yes" : "no",
                          detail::pick_level(seg_p, segments, rng), detail::pick_level(plan_p, plans, rng), format_fixed(tenure, 3)});
    }
    return t;
}

/// Right-censored exponential survival data with one binary and one continuous
/// covariate; the binary covariate doubles the hazard.
inline RawTable toy_survival(std::size_t n_rows = 2000, std::uint64_t seed = 7) {
    auto rng = make_rng({seed, 0x5a7});
    RawTable t;
    t.header = {"treated", "age", "time", "event"};
    for (std::size_t i = 0; i < n_rows; ++i) {
        const bool treated = uniform01(rng) < 0.5;
        const double age = 60.0 + 8.0 * standard_normal(rng);
        const double hazard = 0.1 * (treated ? 2.0 : 1.0) * std::exp(0.02 * (age - 60.0));
        const double event_time = -std::log(1.0 - uniform01(rng)) / hazard;
        const double censor_time = -std::log(1.0 - uniform01(rng)) / 0.05;
        const bool event = event_time <= censor_time;
        t.rows.push_back({treated ? "1" : "0", format_fixed(age, 2), format_fixed(std::min(event_time, censor_time), 4), event ? "1" : "0"});
    }
    return t;
}

}  // namespace vaebgm::data

#endif
