#ifndef VAEBGM_EVAL_COX_HPP
#define VAEBGM_EVAL_COX_HPP

#include "vaebgm/core/error.hpp"
#include "vaebgm/core/linalg.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace vaebgm::eval {

enum class CoxStatus { converged, max_iterations, separation };

inline std::string to_string(CoxStatus s) {
    switch (s) {
    case CoxStatus::converged: return "converged";
    case CoxStatus::max_iterations: return "max_iterations";
    case CoxStatus::separation: return "separation";
    }
    return "?";
}

struct CoxConfig {
    int max_iterations = 100;
    double gradient_tolerance = 1e-6;
    double separation_norm = 50.0;
    int max_halvings = 40;
};

struct CoxModel {
    Vector beta;
    int iterations = 0;
    double gradient_norm = 0.0;
    double log_likelihood = 0.0;
    CoxStatus status = CoxStatus::converged;

    [[nodiscard]] bool converged() const { return status == CoxStatus::converged; }

    [[nodiscard]] Vector risk(const Dense2D &x) const { return x * beta; }
};

struct PartialLikelihood {
    double value = 0.0;
    Vector gradient;
    Dense2D hessian;
};

/// Efron-corrected log partial likelihood with its gradient and Hessian.
/// Rows are visited in decreasing time so risk-set sums accumulate.
inline PartialLikelihood efron_partial_likelihood(const Dense2D &x, const std::vector<double> &time, const std::vector<int> &event,
                                                  const Vector &beta, bool with_hessian = true) {
    const Index n = x.rows();
    const Index p = x.cols();
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return time[static_cast<std::size_t>(a)] > time[static_cast<std::size_t>(b)]; });
    const Vector eta = x * beta;
    const double shift = n > 0 ? eta.maxCoeff() : 0.0;

    PartialLikelihood out{0.0, Vector::Zero(p), Dense2D::Zero(with_hessian ? p : 0, with_hessian ? p : 0)};
    double s0 = 0.0;
    Vector s1 = Vector::Zero(p);
    Dense2D s2 = Dense2D::Zero(with_hessian ? p : 0, with_hessian ? p : 0);

    for (std::size_t pos = 0; pos < order.size();) {
        const double t = time[static_cast<std::size_t>(order[pos])];
        std::size_t end = pos;
        double d0 = 0.0;
        Vector d1 = Vector::Zero(p);
        Dense2D d2 = Dense2D::Zero(with_hessian ? p : 0, with_hessian ? p : 0);
        int deaths = 0;
        for (; end < order.size() && time[static_cast<std::size_t>(order[end])] == t; ++end) {
            const Index i = order[end];
            const double w = std::exp(eta(i) - shift);
            const auto xi = x.row(i).transpose();
            s0 += w;
            s1 += w * xi;
            if (with_hessian) s2.noalias() += w * xi * xi.transpose();
            if (event[static_cast<std::size_t>(i)] != 0) {
                ++deaths;
                d0 += w;
                d1 += w * xi;
                if (with_hessian) d2.noalias() += w * xi * xi.transpose();
                out.value += eta(i);
                out.gradient += xi;
            }
        }
        for (int l = 0; l < deaths; ++l) {
            const double f = static_cast<double>(l) / deaths;
            const double denom = s0 - f * d0;
            const Vector m1 = (s1 - f * d1) / denom;
            out.value -= std::log(denom) + shift;
            out.gradient -= m1;
            if (with_hessian) out.hessian -= (s2 - f * d2) / denom - m1 * m1.transpose();
        }
        pos = end;
    }
    return out;
}

/// Newton-Raphson with step halving on the Efron partial likelihood.
inline CoxModel fit_coxph(const Dense2D &x, const std::vector<double> &time, const std::vector<int> &event, const CoxConfig &cfg = {}) {
    const auto n = static_cast<std::size_t>(x.rows());
    if (time.size() != n || event.size() != n) throw ShapeError("cox: features, time and event lengths differ");
    if (std::none_of(event.begin(), event.end(), [](int e) { return e != 0; })) throw InputError("cox: no events");
    if (!x.allFinite() || std::any_of(time.begin(), time.end(), [](double t) { return !std::isfinite(t); })) {
        throw InputError("cox: non-finite input");
    }
    CoxModel m;
    m.beta = Vector::Zero(x.cols());
    auto pl = efron_partial_likelihood(x, time, event, m.beta);
    m.status = CoxStatus::max_iterations;
    for (m.iterations = 0; m.iterations <= cfg.max_iterations; ++m.iterations) {
        m.gradient_norm = pl.gradient.norm();
        m.log_likelihood = pl.value;
        if (m.beta.norm() > cfg.separation_norm) {
            m.status = CoxStatus::separation;
            break;
        }
        const Dense2D info = -pl.hessian;
        Eigen::LDLT<Dense2D> ldlt(info);
        Vector step = ldlt.solve(pl.gradient);
        if (ldlt.info() != Eigen::Success || !step.allFinite()) step = pl.gradient;
        // A vanishing gradient with a large Newton step is a likelihood that
        // keeps rising towards infinite beta.
        if (m.gradient_norm < cfg.gradient_tolerance && step.norm() < 1e-3 * (1.0 + m.beta.norm())) {
            // A flat optimum (singular information) at nonzero beta means the
            // likelihood only levels off as beta runs away.
            const double min_eig = info.size() > 0 ? Eigen::SelfAdjointEigenSolver<Dense2D>(info).eigenvalues().minCoeff() : 1.0;
            const double scale = std::max(1.0, info.trace() / static_cast<double>(std::max<Index>(1, info.rows())));
            m.status = min_eig > 1e-10 * scale || m.beta.norm() < 1.0 ? CoxStatus::converged : CoxStatus::separation;
            break;
        }
        if (m.iterations == cfg.max_iterations) break;
        bool improved = false;
        for (int h = 0; h <= cfg.max_halvings; ++h) {
            const Vector trial = m.beta + step;
            auto next = efron_partial_likelihood(x, time, event, trial);
            if (std::isfinite(next.value) && next.value >= pl.value) {
                m.beta = trial;
                pl = std::move(next);
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if (!improved) break;
    }
    return m;
}

/// Harrell's concordance: pairs (i, j) with an event for i strictly before
/// time_j; higher risk for i is concordant and equal risks count one half.
inline double c_index(const std::vector<double> &risk, const std::vector<double> &time, const std::vector<int> &event) {
    const std::size_t n = risk.size();
    if (time.size() != n || event.size() != n) throw ShapeError("c-index: lengths differ");
    double comparable = 0.0;
    double score = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (event[i] == 0) continue;
        for (std::size_t j = 0; j < n; ++j) {
            if (!(time[i] < time[j])) continue;
            comparable += 1.0;
            if (risk[i] > risk[j]) {
                score += 1.0;
            } else if (risk[i] == risk[j]) {
                score += 0.5;
            }
        }
    }
    if (comparable == 0.0) throw InputError("c-index: no comparable pairs");
    return score / comparable;
}

}  // namespace vaebgm::eval

#endif
