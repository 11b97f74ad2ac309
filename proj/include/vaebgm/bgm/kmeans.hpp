#ifndef VAEBGM_BGM_KMEANS_HPP
#define VAEBGM_BGM_KMEANS_HPP

#include "vaebgm/core/linalg.hpp"
#include "vaebgm/core/random.hpp"

#include <limits>
#include <vector>

namespace vaebgm::bgm {

/// Seeded k-means++ seeding followed by Lloyd iterations. Returns the cluster
/// index of every row.
inline std::vector<int> kmeans_assign(const Dense2D &x, int k, std::uint64_t seed, int max_iterations = 100) {
    const Index n = x.rows();
    auto rng = make_rng({seed, 0xc3ULL});
    Dense2D centers(k, x.cols());
    centers.row(0) = x.row(static_cast<Index>(uniform_index(rng, static_cast<std::size_t>(n))));
    Vector dist2(n);
    for (Index i = 0; i < n; ++i) dist2(i) = (x.row(i) - centers.row(0)).squaredNorm();
    for (int c = 1; c < k; ++c) {
        const double total = dist2.sum();
        Index pick = n - 1;
        if (total > 0.0) {
            double u = uniform01(rng) * total;
            for (Index i = 0; i < n; ++i) {
                if (u < dist2(i)) {
                    pick = i;
                    break;
                }
                u -= dist2(i);
            }
        } else {
            pick = static_cast<Index>(uniform_index(rng, static_cast<std::size_t>(n)));
        }
        centers.row(c) = x.row(pick);
        for (Index i = 0; i < n; ++i) dist2(i) = std::min(dist2(i), (x.row(i) - centers.row(c)).squaredNorm());
    }

    std::vector<int> assign(static_cast<std::size_t>(n), -1);
    for (int it = 0; it < max_iterations; ++it) {
        bool changed = false;
        for (Index i = 0; i < n; ++i) {
            int best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                const double d = (x.row(i) - centers.row(c)).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (assign[static_cast<std::size_t>(i)] != best) {
                assign[static_cast<std::size_t>(i)] = best;
                changed = true;
            }
        }
        if (!changed) break;
        Dense2D sums = Dense2D::Zero(k, x.cols());
        std::vector<Index> counts(static_cast<std::size_t>(k), 0);
        for (Index i = 0; i < n; ++i) {
            sums.row(assign[static_cast<std::size_t>(i)]) += x.row(i);
            ++counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];
        }
        for (int c = 0; c < k; ++c) {
            // Empty clusters keep their previous center.
            if (counts[static_cast<std::size_t>(c)] > 0) centers.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
        }
    }
    return assign;
}

}  // namespace vaebgm::bgm

#endif
