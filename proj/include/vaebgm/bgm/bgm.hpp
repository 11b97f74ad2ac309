#ifndef VAEBGM_BGM_BGM_HPP
#define VAEBGM_BGM_BGM_HPP

#include "vaebgm/bgm/kmeans.hpp"
#include "vaebgm/core/container.hpp"
#include "vaebgm/core/error.hpp"
#include "vaebgm/core/linalg.hpp"
#include "vaebgm/core/random.hpp"
#include "vaebgm/core/text.hpp"

#include <boost/math/special_functions/digamma.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

namespace vaebgm::bgm {

/// Prior of the truncated Dirichlet-process Gaussian mixture. Zero / empty
/// fields mean "derive from the latent dimension" (see `resolved`).
struct BgmPriorConfig {
    int max_components = 0;             // default: latent dimension
    double weight_concentration = 0.0;  // default: 1 / max_components
    Vector mean_prior;                  // default: zero vector
    double mean_precision = 1.0;
    double degrees_of_freedom = 0.0;    // default: latent dimension
    Dense2D scale_prior;                // default: identity
    int max_iterations = 500;
    double convergence_tol = 1e-4;

    [[nodiscard]] BgmPriorConfig resolved(Index dim) const {
        BgmPriorConfig r = *this;
        if (r.max_components <= 0) r.max_components = static_cast<int>(dim);
        if (r.weight_concentration <= 0.0) r.weight_concentration = 1.0 / r.max_components;
        if (r.mean_prior.size() == 0) r.mean_prior = Vector::Zero(dim);
        if (r.degrees_of_freedom <= 0.0) r.degrees_of_freedom = static_cast<double>(dim);
        if (r.scale_prior.size() == 0) r.scale_prior = Dense2D::Identity(dim, dim);
        if (r.mean_prior.size() != dim || r.scale_prior.rows() != dim || r.scale_prior.cols() != dim) {
            throw InputError("bgm prior: mean/scale dimensions do not match the latent dimension");
        }
        if (r.degrees_of_freedom < static_cast<double>(dim)) throw InputError("bgm prior: degrees of freedom must be >= latent dimension");
        if (!(r.mean_precision > 0.0)) throw InputError("bgm prior: mean precision must be > 0");
        if (r.max_iterations < 1) throw InputError("bgm prior: max_iterations must be >= 1");
        if (!r.scale_prior.isApprox(r.scale_prior.transpose()) || r.scale_prior.llt().info() != Eigen::Success) {
            throw InputError("bgm prior: scale matrix must be symmetric positive-definite");
        }
        return r;
    }
};

namespace detail {

/// Cholesky with jitter escalation 1e-10 -> 1e-6 on failure.
inline Eigen::LLT<Eigen::MatrixXd> robust_cholesky(const Eigen::MatrixXd &a, const std::string &what) {
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) return llt;
    const double scale = std::max(1.0, a.diagonal().cwiseAbs().maxCoeff());
    for (double jitter = 1e-10; jitter <= 1e-6 * 1.0001; jitter *= 10.0) {
        llt.compute(a + jitter * scale * Eigen::MatrixXd::Identity(a.rows(), a.cols()));
        if (llt.info() == Eigen::Success) {
            log_warn(what + ": covariance regularized with jitter " + format_double(jitter));
            return llt;
        }
    }
    throw TrainingError(what + ": Cholesky factorization failed after jitter escalation");
}

inline double log_det_from_llt(const Eigen::LLT<Eigen::MatrixXd> &llt) {
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

inline double log_multigamma_sum(double nu, Index d) {
    double s = 0.0;
    for (Index i = 1; i <= d; ++i) s += std::lgamma(0.5 * (nu + 1.0 - static_cast<double>(i)));
    return s;
}

inline double digamma(double x) { return boost::math::digamma(x); }

}  // namespace detail

/// Fitted truncated stick-breaking mixture. Per component: expected weight,
/// posterior mean, posterior expected covariance, and the underlying
/// variational parameters.
class BgmModel {
  public:
    Vector weights;                        // expected mixture weights, sum to 1
    Dense2D means;                         // K x d
    std::vector<Eigen::MatrixXd> covariances;  // expected covariance per component
    // Variational posterior parameters.
    Vector stick_alpha;  // Beta(alpha_k, beta_k) for k < K; last entry unused
    Vector stick_beta;
    Vector counts;       // effective counts N_k
    Vector mean_precision;
    Vector dof;
    std::vector<Eigen::MatrixXd> scale_inverse;  // W_k^{-1}
    int iterations = 0;
    bool converged = false;

    [[nodiscard]] Index dim() const { return means.cols(); }
    [[nodiscard]] Index components() const { return means.rows(); }

    /// Model with explicit weights, means and covariances (no variational state).
    static BgmModel from_parameters(Vector weights, Dense2D means, std::vector<Eigen::MatrixXd> covariances) {
        BgmModel m;
        const Index k = means.rows();
        if (weights.size() != k || static_cast<Index>(covariances.size()) != k) throw ShapeError("bgm: inconsistent component count");
        m.weights = std::move(weights);
        m.means = std::move(means);
        m.covariances = std::move(covariances);
        m.stick_alpha = m.stick_beta = m.counts = m.mean_precision = m.dof = Vector::Zero(k);
        m.finalize();
        return m;
    }

    /// Recomputes the cached Cholesky factors and normalizers.
    void finalize() {
        chol_.clear();
        log_norm_.resize(components());
        for (Index k = 0; k < components(); ++k) {
            chol_.push_back(detail::robust_cholesky(covariances[static_cast<std::size_t>(k)], "bgm component " + std::to_string(k)));
            log_norm_(k) = -0.5 * static_cast<double>(dim()) * std::log(2.0 * std::numbers::pi) -
                           0.5 * detail::log_det_from_llt(chol_.back());
        }
    }

    /// log sum_k pi_k N(z | mu_k, Sigma_k); zero-weight components are skipped.
    template <typename Derived>
    [[nodiscard]] double log_density(const Eigen::MatrixBase<Derived> &z) const {
        if (z.size() != dim()) throw ShapeError("bgm log_density: dimension mismatch");
        double mx = -std::numeric_limits<double>::infinity();
        std::vector<double> terms;
        terms.reserve(static_cast<std::size_t>(components()));
        for (Index k = 0; k < components(); ++k) {
            if (!(weights(k) > 0.0)) continue;
            Eigen::VectorXd diff(dim());
            for (Index j = 0; j < dim(); ++j) diff(j) = z(j) - means(k, j);
            const double quad = chol_[static_cast<std::size_t>(k)].matrixL().solve(diff).squaredNorm();
            terms.push_back(std::log(weights(k)) + log_norm_(k) - 0.5 * quad);
            mx = std::max(mx, terms.back());
        }
        if (terms.empty()) return -std::numeric_limits<double>::infinity();
        double s = 0.0;
        for (const double t : terms) s += std::exp(t - mx);
        return mx + std::log(s);
    }

    /// n draws: component by weight, then mu_k + L_k * eps.
    [[nodiscard]] Dense2D sample(Index n, Rng &rng) const {
        Dense2D out(n, dim());
        Eigen::VectorXd eps(dim());
        for (Index i = 0; i < n; ++i) {
            double u = uniform01(rng);
            Index pick = components() - 1;
            while (pick > 0 && !(weights(pick) > 0.0)) --pick;
            for (Index k = 0; k < components(); ++k) {
                if (u < weights(k)) {
                    pick = k;
                    break;
                }
                u -= weights(k);
            }
            for (Index j = 0; j < dim(); ++j) eps(j) = standard_normal(rng);
            out.row(i) = means.row(pick) + (chol_[static_cast<std::size_t>(pick)].matrixL() * eps).transpose();
        }
        return out;
    }

    [[nodiscard]] int effective_components(double threshold = 0.01) const {
        int n = 0;
        for (Index k = 0; k < components(); ++k) n += weights(k) > threshold ? 1 : 0;
        return n;
    }

    void write(Container &c, const std::string &section = "bgm") const {
        auto &s = c.add_section(section);
        s.fields.set("format", "vaebgm-bgm/1");
        s.fields.set("dim", std::to_string(dim()));
        s.fields.set("components", std::to_string(components()));
        s.fields.set("iterations", std::to_string(iterations));
        s.fields.set("converged", converged ? "true" : "false");
        s.add_matrix("weights", weights.transpose());
        s.add_matrix("means", means);
        s.add_matrix("stick_alpha", stick_alpha.transpose());
        s.add_matrix("stick_beta", stick_beta.transpose());
        s.add_matrix("counts", counts.transpose());
        s.add_matrix("mean_precision", mean_precision.transpose());
        s.add_matrix("dof", dof.transpose());
        for (Index k = 0; k < components(); ++k) {
            s.add_matrix("covariance." + std::to_string(k), covariances[static_cast<std::size_t>(k)]);
            if (!scale_inverse.empty()) s.add_matrix("scale_inverse." + std::to_string(k), scale_inverse[static_cast<std::size_t>(k)]);
        }
    }

    static BgmModel read(const Container &c, const std::string &section = "bgm") {
        const auto &s = c.section(section);
        if (s.fields.require("format") != "vaebgm-bgm/1") throw ArtifactMismatch("unsupported mixture format");
        BgmModel m;
        const auto k = s.fields.require_int("components");
        m.weights = s.matrix("weights").row(0).transpose();
        m.means = s.matrix("means");
        m.stick_alpha = s.matrix("stick_alpha").row(0).transpose();
        m.stick_beta = s.matrix("stick_beta").row(0).transpose();
        m.counts = s.matrix("counts").row(0).transpose();
        m.mean_precision = s.matrix("mean_precision").row(0).transpose();
        m.dof = s.matrix("dof").row(0).transpose();
        m.iterations = static_cast<int>(s.fields.require_int("iterations"));
        m.converged = s.fields.require("converged") == "true";
        for (long long j = 0; j < k; ++j) {
            m.covariances.push_back(s.matrix("covariance." + std::to_string(j)));
            if (s.has_matrix("scale_inverse." + std::to_string(j))) m.scale_inverse.push_back(s.matrix("scale_inverse." + std::to_string(j)));
        }
        if (m.means.rows() != k || m.weights.size() != k || m.means.cols() != s.fields.require_int("dim")) {
            throw ArtifactMismatch("mixture section has inconsistent shapes");
        }
        m.finalize();
        return m;
    }

  private:
    std::vector<Eigen::LLT<Eigen::MatrixXd>> chol_;
    Vector log_norm_;
};

struct FitResult {
    BgmModel model;
    std::vector<double> lower_bound;  // one value per iteration
};

/// Coordinate-ascent variational inference for the truncated DP mixture.
/// Responsibilities start from seeded k-means++; each iteration updates the
/// responsibilities, then the Gaussian-Wishart and stick-breaking factors,
/// then evaluates the full variational lower bound.
class BgmFitter {
  public:
    BgmFitter(const Dense2D &x, const BgmPriorConfig &prior) : x_(x), p_(prior.resolved(x.cols())) {
        n_ = x.rows();
        d_ = x.cols();
        k_ = p_.max_components;
        if (n_ <= d_) throw InputError("bgm fit: need more points (" + std::to_string(n_) + ") than latent dimensions (" + std::to_string(d_) + ")");
        if (!x.allFinite()) throw InputError("bgm fit: non-finite latent values");
        psi0_ = p_.scale_prior;
        const auto psi_llt = detail::robust_cholesky(psi0_, "bgm prior scale");
        log_det_psi0_ = detail::log_det_from_llt(psi_llt);
        resp_ = Dense2D::Zero(n_, k_);
        allocate();
    }

    FitResult fit(std::uint64_t seed) {
        const auto assign = kmeans_assign(x_, k_, seed);
        for (Index i = 0; i < n_; ++i) resp_(i, assign[static_cast<std::size_t>(i)]) = 1.0;
        FitResult out;
        m_step();
        out.lower_bound.push_back(lower_bound());
        bool converged = false;
        int it = 0;
        for (it = 1; it < p_.max_iterations; ++it) {
            e_step();
            m_step();
            double lb = lower_bound();
            for (Index k = 0; k < k_; ++k) lb = try_delete_move(k, lb);
            for (Index a = 0; a < k_; ++a) {
                for (Index b = a + 1; b < k_; ++b) lb = try_merge_move(a, b, lb);
            }
            out.lower_bound.push_back(lb);
            const double change = out.lower_bound.back() - out.lower_bound[out.lower_bound.size() - 2];
            if (std::abs(change) < p_.convergence_tol) {
                converged = true;
                ++it;
                break;
            }
        }
        out.model = export_model();
        out.model.iterations = it;
        out.model.converged = converged;
        return out;
    }

    [[nodiscard]] const Dense2D &responsibilities() const { return resp_; }

  private:
    void allocate() {
        nk_ = Vector::Zero(k_);
        xbar_ = Dense2D::Zero(k_, d_);
        scatter_.assign(static_cast<std::size_t>(k_), Eigen::MatrixXd::Zero(d_, d_));
        kappa_ = Vector::Zero(k_);
        nu_ = Vector::Zero(k_);
        m_ = Dense2D::Zero(k_, d_);
        winv_.assign(static_cast<std::size_t>(k_), Eigen::MatrixXd::Zero(d_, d_));
        alpha_ = Vector::Ones(k_);
        beta_ = Vector::Zero(k_);
        e_log_v_ = Vector::Zero(k_);
        e_log_1mv_ = Vector::Zero(k_);
        e_log_pi_ = Vector::Zero(k_);
        e_log_det_ = Vector::Zero(k_);
        log_det_winv_ = Vector::Zero(k_);
    }

    void m_step() {
        nk_ = resp_.colwise().sum().transpose();
        for (Index k = 0; k < k_; ++k) {
            const auto ks = static_cast<std::size_t>(k);
            Eigen::VectorXd xbar = Eigen::VectorXd::Zero(d_);
            Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(d_, d_);
            if (nk_(k) > 0.0) {
                xbar = (resp_.col(k).transpose() * x_).transpose() / nk_(k);
                const Dense2D centered = x_.rowwise() - xbar.transpose();
                scatter = centered.transpose() * resp_.col(k).asDiagonal() * centered;
            }
            xbar_.row(k) = xbar.transpose();
            scatter_[ks] = 0.5 * (scatter + scatter.transpose());
            kappa_(k) = p_.mean_precision + nk_(k);
            nu_(k) = p_.degrees_of_freedom + nk_(k);
            m_.row(k) = ((p_.mean_precision * p_.mean_prior + nk_(k) * xbar) / kappa_(k)).transpose();
            const Eigen::VectorXd dm = xbar - p_.mean_prior;
            winv_[ks] = psi0_ + scatter_[ks] + (p_.mean_precision * nk_(k) / kappa_(k)) * dm * dm.transpose();
        }
        // Truncated stick-breaking: the last stick takes all remaining mass.
        double tail = 0.0;
        for (Index k = k_ - 1; k >= 0; --k) {
            alpha_(k) = 1.0 + nk_(k);
            beta_(k) = p_.weight_concentration + tail;
            tail += nk_(k);
        }
        double cum = 0.0;
        for (Index k = 0; k < k_; ++k) {
            if (k < k_ - 1) {
                const double ab = detail::digamma(alpha_(k) + beta_(k));
                e_log_v_(k) = detail::digamma(alpha_(k)) - ab;
                e_log_1mv_(k) = detail::digamma(beta_(k)) - ab;
            } else {
                e_log_v_(k) = 0.0;
                e_log_1mv_(k) = 0.0;
            }
            e_log_pi_(k) = e_log_v_(k) + cum;
            cum += e_log_1mv_(k);
        }
        chol_.clear();
        for (Index k = 0; k < k_; ++k) {
            chol_.push_back(detail::robust_cholesky(winv_[static_cast<std::size_t>(k)], "bgm component " + std::to_string(k)));
            log_det_winv_(k) = detail::log_det_from_llt(chol_.back());
            double s = 0.0;
            for (Index i = 1; i <= d_; ++i) s += detail::digamma(0.5 * (nu_(k) + 1.0 - static_cast<double>(i)));
            e_log_det_(k) = s + static_cast<double>(d_) * std::numbers::ln2 - log_det_winv_(k);
        }
    }

    /// Tentatively hands component `k`'s responsibilities to the remaining
    /// components; kept only if the lower bound improves.
    double try_delete_move(Index k, double current) {
        if (k_ < 2 || nk_(k) <= 1e-8 * static_cast<double>(n_) || nk_(k) >= 0.5 * static_cast<double>(n_)) return current;
        const Dense2D saved = resp_;
        for (Index i = 0; i < n_; ++i) {
            resp_(i, k) = 0.0;
            const double rest = resp_.row(i).sum();
            if (rest > 1e-300) {
                resp_.row(i) /= rest;
            } else {
                // Row owned entirely by k: move it to the nearest other mean.
                Index best = k == 0 ? 1 : 0;
                double best_d = std::numeric_limits<double>::infinity();
                for (Index j = 0; j < k_; ++j) {
                    if (j == k) continue;
                    const double dist = (x_.row(i) - m_.row(j)).squaredNorm();
                    if (dist < best_d) {
                        best_d = dist;
                        best = j;
                    }
                }
                resp_(i, best) = 1.0;
            }
        }
        m_step();
        const double candidate = lower_bound();
        if (candidate > current) return candidate;
        resp_ = saved;
        m_step();
        return current;
    }

    /// Tentatively folds component `b`'s responsibilities into `a`; kept only
    /// if the lower bound improves.
    double try_merge_move(Index a, Index b, double current) {
        const double floor = 1e-8 * static_cast<double>(n_);
        if (nk_(a) <= floor || nk_(b) <= floor) return current;
        const Vector saved_a = resp_.col(a);
        const Vector saved_b = resp_.col(b);
        resp_.col(a) += resp_.col(b);
        resp_.col(b).setZero();
        m_step();
        const double candidate = lower_bound();
        if (candidate > current) return candidate;
        resp_.col(a) = saved_a;
        resp_.col(b) = saved_b;
        m_step();
        return current;
    }

    void e_step() {
        const double log2pi = std::log(2.0 * std::numbers::pi);
        Dense2D log_rho(n_, k_);
        for (Index k = 0; k < k_; ++k) {
            const auto &llt = chol_[static_cast<std::size_t>(k)];
            const Dense2D centered = x_.rowwise() - m_.row(k);
            // Rows of L^{-1} (x - m)^T.
            const Eigen::MatrixXd solved = llt.matrixL().solve(Eigen::MatrixXd(centered.transpose()));
            const Eigen::VectorXd quad = solved.colwise().squaredNorm().transpose();
            const double base = e_log_pi_(k) + 0.5 * e_log_det_(k) - 0.5 * static_cast<double>(d_) * log2pi -
                                0.5 * static_cast<double>(d_) / kappa_(k);
            log_rho.col(k) = (base - 0.5 * nu_(k) * quad.array()).matrix();
        }
        for (Index i = 0; i < n_; ++i) {
            const double mx = log_rho.row(i).maxCoeff();
            const double lse = mx + std::log((log_rho.row(i).array() - mx).exp().sum());
            resp_.row(i) = (log_rho.row(i).array() - lse).exp().matrix();
        }
    }

    [[nodiscard]] double log_wishart_norm(double log_det_w, double nu) const {
        const double d = static_cast<double>(d_);
        return -0.5 * nu * log_det_w -
               (0.5 * nu * d * std::numbers::ln2 + 0.25 * d * (d - 1.0) * std::log(std::numbers::pi) +
                detail::log_multigamma_sum(nu, d_));
    }

    /// Full variational lower bound for the current factors.
    [[nodiscard]] double lower_bound() const {
        const double d = static_cast<double>(d_);
        const double log2pi = std::log(2.0 * std::numbers::pi);
        const double kappa0 = p_.mean_precision;
        const double nu0 = p_.degrees_of_freedom;
        const double gamma0 = p_.weight_concentration;
        const double log_b0 = log_wishart_norm(-log_det_psi0_, nu0);
        double lb = 0.0;
        for (Index k = 0; k < k_; ++k) {
            const auto ks = static_cast<std::size_t>(k);
            const auto &llt = chol_[ks];
            const double nk = nk_(k);
            const double tr_sw = nk > 0.0 ? llt.solve(scatter_[ks]).trace() / nk : 0.0;
            const Eigen::VectorXd dx = xbar_.row(k).transpose() - m_.row(k).transpose();
            const double quad_x = llt.matrixL().solve(dx).squaredNorm();
            // E[ln p(X | Z, mu, Lambda)]
            lb += 0.5 * nk * (e_log_det_(k) - d / kappa_(k) - nu_(k) * tr_sw - nu_(k) * quad_x - d * log2pi);
            // E[ln p(Z | v)]
            lb += nk * e_log_pi_(k);
            // E[ln p(mu, Lambda)]
            const Eigen::VectorXd dm = m_.row(k).transpose() - p_.mean_prior;
            const double quad_m = llt.matrixL().solve(dm).squaredNorm();
            const double tr_psi_w = llt.solve(psi0_).trace();
            lb += 0.5 * (d * std::log(kappa0 / (2.0 * std::numbers::pi)) + e_log_det_(k) - d * kappa0 / kappa_(k) -
                         kappa0 * nu_(k) * quad_m);
            lb += log_b0 + 0.5 * (nu0 - d - 1.0) * e_log_det_(k) - 0.5 * nu_(k) * tr_psi_w;
            // - E[ln q(mu, Lambda)]
            const double entropy_w = -log_wishart_norm(-log_det_winv_(k), nu_(k)) - 0.5 * (nu_(k) - d - 1.0) * e_log_det_(k) +
                                     0.5 * nu_(k) * d;
            lb -= 0.5 * e_log_det_(k) + 0.5 * d * std::log(kappa_(k) / (2.0 * std::numbers::pi)) - 0.5 * d - entropy_w;
            if (k < k_ - 1) {
                // E[ln p(v)] - E[ln q(v)]
                lb += std::log(gamma0) + (gamma0 - 1.0) * e_log_1mv_(k);
                lb -= std::lgamma(alpha_(k) + beta_(k)) - std::lgamma(alpha_(k)) - std::lgamma(beta_(k)) +
                      (alpha_(k) - 1.0) * e_log_v_(k) + (beta_(k) - 1.0) * e_log_1mv_(k);
            }
        }
        // - E[ln q(Z)]
        double ent = 0.0;
        for (Index i = 0; i < resp_.size(); ++i) {
            const double r = resp_.data()[i];
            if (r > 0.0) ent += r * std::log(r);
        }
        return lb - ent;
    }

    [[nodiscard]] BgmModel export_model() const {
        BgmModel m;
        m.weights.resize(k_);
        double remaining = 1.0;
        for (Index k = 0; k < k_; ++k) {
            const double ev = k < k_ - 1 ? alpha_(k) / (alpha_(k) + beta_(k)) : 1.0;
            m.weights(k) = remaining * ev;
            remaining *= 1.0 - ev;
        }
        m.means = m_;
        for (Index k = 0; k < k_; ++k) {
            const auto ks = static_cast<std::size_t>(k);
            const double denom = nu_(k) > static_cast<double>(d_) + 1.0 ? nu_(k) - static_cast<double>(d_) - 1.0 : nu_(k);
            m.covariances.push_back(winv_[ks] / denom);
        }
        m.stick_alpha = alpha_;
        m.stick_beta = beta_;
        m.counts = nk_;
        m.mean_precision = kappa_;
        m.dof = nu_;
        m.scale_inverse = winv_;
        m.finalize();
        return m;
    }

    const Dense2D &x_;
    BgmPriorConfig p_;
    Index n_ = 0, d_ = 0, k_ = 0;
    Eigen::MatrixXd psi0_;
    double log_det_psi0_ = 0.0;
    Dense2D resp_;
    Vector nk_;
    Dense2D xbar_;
    std::vector<Eigen::MatrixXd> scatter_;  // N_k S_k
    Vector kappa_, nu_;
    Dense2D m_;
    std::vector<Eigen::MatrixXd> winv_;
    std::vector<Eigen::LLT<Eigen::MatrixXd>> chol_;
    Vector alpha_, beta_, e_log_v_, e_log_1mv_, e_log_pi_, e_log_det_, log_det_winv_;
};

/// Fits the mixture to latent rows. Throws if the lower bound ever decreases by
/// more than 1e-8.
inline FitResult fit(const Dense2D &latents, const BgmPriorConfig &prior, std::uint64_t seed) {
    BgmFitter fitter(latents, prior);
    auto res = fitter.fit(seed);
    for (std::size_t i = 1; i < res.lower_bound.size(); ++i) {
        if (res.lower_bound[i] < res.lower_bound[i - 1] - 1e-8) {
            throw TrainingError("bgm fit: variational lower bound decreased at iteration " + std::to_string(i) + " (" +
                                format_double(res.lower_bound[i - 1]) + " -> " + format_double(res.lower_bound[i]) + ")");
        }
    }
    return res;
}

}  // namespace vaebgm::bgm

#endif
