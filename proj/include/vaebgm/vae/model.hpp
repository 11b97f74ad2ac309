#ifndef VAEBGM_VAE_MODEL_HPP
#define VAEBGM_VAE_MODEL_HPP

#include "vaebgm/core/error.hpp"
#include "vaebgm/core/linalg.hpp"
#include "vaebgm/core/random.hpp"
#include "vaebgm/data/schema.hpp"
#include "vaebgm/numerics/layers.hpp"
#include "vaebgm/vae/config.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <vector>

namespace vaebgm::vae {

using numerics::Activation;
using numerics::Layer;
using numerics::LayerGrad;
using numerics::Mode;

inline constexpr double kLogvarMin = -15.0;
inline constexpr double kLogvarMax = 15.0;

/// Batch of diagonal Gaussian posteriors q(z|x), one per row. `logvar` is
/// already clamped to [kLogvarMin, kLogvarMax].
struct GaussianPosterior {
    Dense2D mu;
    Dense2D logvar;
};

/// Where each column's parameters sit in a decoder output row and its values
/// in an encoded data row.
struct ColumnSlot {
    data::ColumnKind kind;
    Index encoded_offset;
    Index param_offset;
    Index width;  // number of levels for categorical columns, 1 otherwise
};

inline std::vector<ColumnSlot> column_slots(const data::TableSchema &schema) {
    std::vector<ColumnSlot> out;
    const auto enc = schema.encoded_offsets();
    const auto par = schema.param_offsets();
    for (std::size_t k = 0; k < schema.columns.size(); ++k) {
        const auto &c = schema.columns[k];
        out.push_back({c.kind, static_cast<Index>(enc[k]), static_cast<Index>(par[k]),
                       c.kind == data::ColumnKind::categorical ? static_cast<Index>(c.levels.size()) : 1});
    }
    return out;
}

/// Encoder: input -> hidden (relu) -> latent-width projection (tanh) -> linear
/// mu and logvar heads. Decoder: latent -> hidden (relu, dropout) -> per-column
/// parameter heads (identity; interpreted by the column likelihoods).
class VaeModel {
  public:
    Layer enc_hidden;
    Layer enc_proj;
    Layer mu_head;
    Layer logvar_head;
    Layer dec_hidden;
    Layer dec_out;

    VaeModel() = default;

    VaeModel(std::shared_ptr<const data::TableSchema> schema, VaeConfig config, std::uint64_t init_seed)
        : schema_(std::move(schema)), config_(config) {
        config_.validate();
        const auto d = static_cast<Index>(schema_->encoded_dim());
        const auto p = static_cast<Index>(schema_->param_dim());
        const Index h = config_.hidden_units;
        const Index l = config_.latent_dim;
        auto rng = make_rng({init_seed, 0x1417ULL});
        enc_hidden = Layer::uniform_init("enc_hidden", d, h, Activation::relu, rng);
        enc_proj = Layer::uniform_init("enc_proj", h, l, Activation::tanh, rng);
        mu_head = Layer::uniform_init("mu_head", l, l, Activation::identity, rng);
        logvar_head = Layer::uniform_init("logvar_head", l, l, Activation::identity, rng);
        dec_hidden = Layer::uniform_init("dec_hidden", l, h, Activation::relu, rng);
        dec_hidden.dropout_rate = config_.dropout_rate;
        dec_out = Layer::uniform_init("dec_out", h, p, Activation::identity, rng);
        slots_ = column_slots(*schema_);
    }

    [[nodiscard]] const data::TableSchema &schema() const { return *schema_; }
    [[nodiscard]] const std::shared_ptr<const data::TableSchema> &schema_ptr() const { return schema_; }
    [[nodiscard]] const VaeConfig &config() const { return config_; }
    [[nodiscard]] const std::vector<ColumnSlot> &slots() const { return slots_; }
    [[nodiscard]] Index latent_dim() const { return config_.latent_dim; }

    void set_schema(std::shared_ptr<const data::TableSchema> schema, VaeConfig config) {
        schema_ = std::move(schema);
        config_ = config;
        slots_ = column_slots(*schema_);
    }

    /// Parameter blocks in a fixed order (optimizer state and checkpoints rely on it).
    std::vector<Layer *> parameters() { return {&enc_hidden, &enc_proj, &mu_head, &logvar_head, &dec_hidden, &dec_out}; }
    [[nodiscard]] std::vector<const Layer *> parameters() const {
        return {&enc_hidden, &enc_proj, &mu_head, &logvar_head, &dec_hidden, &dec_out};
    }

    /// Posterior for each row of an encoded batch. No dropout on the encoder.
    [[nodiscard]] GaussianPosterior encode(const Dense2D &x) const {
        check_input(x);
        const Dense2D h = numerics::forward_layer(enc_hidden, x, Mode::infer, nullptr, nullptr);
        const Dense2D t = numerics::forward_layer(enc_proj, h, Mode::infer, nullptr, nullptr);
        GaussianPosterior q;
        q.mu = numerics::forward_layer(mu_head, t, Mode::infer, nullptr, nullptr);
        q.logvar = numerics::forward_layer(logvar_head, t, Mode::infer, nullptr, nullptr).cwiseMax(kLogvarMin).cwiseMin(kLogvarMax);
        return q;
    }

    /// Decoder parameter rows for latent rows. Dropout is active only in train mode.
    [[nodiscard]] Dense2D decode(const Dense2D &z, Mode mode = Mode::infer, Rng *rng = nullptr) const {
        if (z.cols() != latent_dim()) throw ShapeError("decode: latent width mismatch");
        const Dense2D h = numerics::forward_layer(dec_hidden, z, mode, rng, nullptr);
        Dense2D out = numerics::forward_layer(dec_out, h, Mode::infer, nullptr, nullptr);
        clamp_decoder_logvars(out);
        return out;
    }

    /// Numeric columns' logvar entries clamped like the posterior's.
    void clamp_decoder_logvars(Dense2D &params) const {
        for (const auto &s : slots_) {
            if (data::is_numeric_kind(s.kind)) {
                params.col(s.param_offset + 1) = params.col(s.param_offset + 1).cwiseMax(kLogvarMin).cwiseMin(kLogvarMax);
            }
        }
    }

    void check_input(const Dense2D &x) const {
        if (static_cast<std::size_t>(x.cols()) != schema_->encoded_dim()) {
            throw ShapeError("input width " + std::to_string(x.cols()) + " does not match schema encoded dimension " +
                             std::to_string(schema_->encoded_dim()));
        }
    }

  private:
    std::shared_ptr<const data::TableSchema> schema_;
    VaeConfig config_;
    std::vector<ColumnSlot> slots_;
};

/// z = mu + exp(logvar / 2) * epsilon, element-wise.
inline Dense2D reparameterize(const GaussianPosterior &q, const Dense2D &epsilon) {
    if (epsilon.rows() != q.mu.rows() || epsilon.cols() != q.mu.cols()) throw ShapeError("reparameterize: shape mismatch");
    return (q.mu.array() + (0.5 * q.logvar.array()).exp() * epsilon.array()).matrix();
}

/// KL(N(mu, diag(exp(logvar))) || N(0, I)) for a single posterior.
template <typename MuExpr, typename LogvarExpr>
double kl_divergence(const MuExpr &mu, const LogvarExpr &logvar) {
    double kl = 0.0;
    for (Index d = 0; d < mu.size(); ++d) {
        kl += mu(d) * mu(d) + std::exp(logvar(d)) - 1.0 - logvar(d);
    }
    return 0.5 * kl;
}

namespace detail {

inline double log_sigmoid(double x) { return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }

inline double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace detail

/// log p(x|params) for one encoded row: Gaussian density for numeric columns,
/// Bernoulli (logit form) for binary, log-softmax at the observed level for
/// categorical.
template <typename ParamRow, typename DataRow>
double log_likelihood(const ParamRow &params, const DataRow &x, const std::vector<ColumnSlot> &slots) {
    constexpr double half_log_2pi = 0.91893853320467274178;
    double ll = 0.0;
    for (const auto &s : slots) {
        switch (s.kind) {
        case data::ColumnKind::continuous:
        case data::ColumnKind::count: {
            const double mean = params(s.param_offset);
            const double logvar = params(s.param_offset + 1);
            const double diff = x(s.encoded_offset) - mean;
            ll += -half_log_2pi - 0.5 * logvar - 0.5 * diff * diff * std::exp(-logvar);
            break;
        }
        case data::ColumnKind::binary: {
            const double logit = params(s.param_offset);
            const double y = x(s.encoded_offset);
            ll += y * detail::log_sigmoid(logit) + (1.0 - y) * detail::log_sigmoid(-logit);
            break;
        }
        case data::ColumnKind::categorical: {
            double mx = -std::numeric_limits<double>::infinity();
            for (Index l = 0; l < s.width; ++l) mx = std::max(mx, params(s.param_offset + l));
            double sum = 0.0;
            double picked = 0.0;
            for (Index l = 0; l < s.width; ++l) {
                sum += std::exp(params(s.param_offset + l) - mx);
                picked += x(s.encoded_offset + l) * params(s.param_offset + l);
            }
            ll += picked - mx - std::log(sum);
            break;
        }
        }
    }
    return ll;
}

/// d(-log p(x|params))/d(params) for one row, written into `grad` (same layout as params).
template <typename ParamRow, typename DataRow, typename GradRow>
void negative_log_likelihood_grad(const ParamRow &params, const DataRow &x, const std::vector<ColumnSlot> &slots,
                                  GradRow &&grad) {
    for (const auto &s : slots) {
        switch (s.kind) {
        case data::ColumnKind::continuous:
        case data::ColumnKind::count: {
            const double mean = params(s.param_offset);
            const double logvar = params(s.param_offset + 1);
            const double diff = x(s.encoded_offset) - mean;
            const double inv_var = std::exp(-logvar);
            grad(s.param_offset) = -diff * inv_var;
            grad(s.param_offset + 1) = 0.5 * (1.0 - diff * diff * inv_var);
            break;
        }
        case data::ColumnKind::binary:
            grad(s.param_offset) = detail::sigmoid(params(s.param_offset)) - x(s.encoded_offset);
            break;
        case data::ColumnKind::categorical: {
            double mx = -std::numeric_limits<double>::infinity();
            for (Index l = 0; l < s.width; ++l) mx = std::max(mx, params(s.param_offset + l));
            double sum = 0.0;
            for (Index l = 0; l < s.width; ++l) sum += std::exp(params(s.param_offset + l) - mx);
            for (Index l = 0; l < s.width; ++l) {
                grad(s.param_offset + l) = std::exp(params(s.param_offset + l) - mx) / sum - x(s.encoded_offset + l);
            }
            break;
        }
        }
    }
}

/// Everything the backward pass of the ELBO needs.
struct ElboTape {
    numerics::LayerCache enc_hidden, enc_proj, mu_head, logvar_head, dec_hidden, dec_out;
    Dense2D x;
    Dense2D epsilon;
    GaussianPosterior posterior;
    Dense2D logvar_raw;  // before clamping
    Dense2D decoded;     // after decoder logvar clamping
    Dense2D decoded_raw;
};

struct ElboValue {
    double loss = 0.0;  // mean over rows of KL - log-likelihood
    double kl = 0.0;    // mean KL
    double log_likelihood = 0.0;  // mean log-likelihood
};

/// Negative ELBO with caller-supplied noise. `dropout_rng` is only used in train mode.
inline std::pair<ElboValue, ElboTape> elbo_loss_with_noise(const VaeModel &m, const Dense2D &x, const Dense2D &epsilon,
                                                          Mode mode, Rng *dropout_rng) {
    m.check_input(x);
    if (x.rows() == 0) throw ShapeError("elbo_loss: empty batch");
    ElboTape t;
    t.x = x;
    t.epsilon = epsilon;
    const Dense2D h = numerics::forward_layer(m.enc_hidden, x, Mode::infer, nullptr, &t.enc_hidden);
    const Dense2D proj = numerics::forward_layer(m.enc_proj, h, Mode::infer, nullptr, &t.enc_proj);
    t.posterior.mu = numerics::forward_layer(m.mu_head, proj, Mode::infer, nullptr, &t.mu_head);
    t.logvar_raw = numerics::forward_layer(m.logvar_head, proj, Mode::infer, nullptr, &t.logvar_head);
    t.posterior.logvar = t.logvar_raw.cwiseMax(kLogvarMin).cwiseMin(kLogvarMax);
    const Dense2D z = reparameterize(t.posterior, epsilon);
    const Dense2D dh = numerics::forward_layer(m.dec_hidden, z, mode, dropout_rng, &t.dec_hidden);
    t.decoded_raw = numerics::forward_layer(m.dec_out, dh, Mode::infer, nullptr, &t.dec_out);
    t.decoded = t.decoded_raw;
    m.clamp_decoder_logvars(t.decoded);

    ElboValue v;
    const auto n = static_cast<double>(x.rows());
    for (Index i = 0; i < x.rows(); ++i) {
        v.kl += kl_divergence(t.posterior.mu.row(i), t.posterior.logvar.row(i));
        v.log_likelihood += log_likelihood(t.decoded.row(i), x.row(i), m.slots());
    }
    v.kl /= n;
    v.log_likelihood /= n;
    v.loss = v.kl - v.log_likelihood;
    if (!std::isfinite(v.loss)) throw TrainingError("elbo_loss: non-finite loss");
    return {v, std::move(t)};
}

/// Negative ELBO with one standard-normal epsilon per row drawn from `rng`
/// (then the dropout mask, in train mode, from the same generator).
inline std::pair<ElboValue, ElboTape> elbo_loss(const VaeModel &m, const Dense2D &x, Rng &rng, Mode mode = Mode::train) {
    Dense2D eps(x.rows(), m.latent_dim());
    for (Index i = 0; i < eps.rows(); ++i) {
        for (Index j = 0; j < eps.cols(); ++j) eps(i, j) = standard_normal(rng);
    }
    return elbo_loss_with_noise(m, x, eps, mode, &rng);
}

/// Exact gradients of the batch-mean negative ELBO, in `VaeModel::parameters()` order.
inline std::vector<LayerGrad> elbo_backward(const VaeModel &m, const ElboTape &t) {
    const Index n = t.x.rows();
    const double inv_n = 1.0 / static_cast<double>(n);
    const auto &slots = m.slots();

    Dense2D d_decoded(n, t.decoded.cols());
    for (Index i = 0; i < n; ++i) {
        negative_log_likelihood_grad(t.decoded.row(i), t.x.row(i), slots, d_decoded.row(i));
    }
    d_decoded *= inv_n;
    for (const auto &s : slots) {
        if (!data::is_numeric_kind(s.kind)) continue;
        const Index c = s.param_offset + 1;
        for (Index i = 0; i < n; ++i) {
            const double raw = t.decoded_raw(i, c);
            if (raw < kLogvarMin || raw > kLogvarMax) d_decoded(i, c) = 0.0;
        }
    }

    std::vector<LayerGrad> g(6);
    g[5] = LayerGrad::zeros_like(m.dec_out);
    const Dense2D d_dh = numerics::backward_layer(m.dec_out, t.dec_out, d_decoded, g[5]);
    g[4] = LayerGrad::zeros_like(m.dec_hidden);
    const Dense2D dz = numerics::backward_layer(m.dec_hidden, t.dec_hidden, d_dh, g[4]);

    const auto &mu = t.posterior.mu;
    const auto &lv = t.posterior.logvar;
    const Dense2D sigma = (0.5 * lv.array()).exp().matrix();
    Dense2D d_mu = dz + mu * inv_n;
    Dense2D d_lv = (dz.array() * 0.5 * sigma.array() * t.epsilon.array() + 0.5 * inv_n * (lv.array().exp() - 1.0)).matrix();
    for (Index i = 0; i < d_lv.rows(); ++i) {
        for (Index j = 0; j < d_lv.cols(); ++j) {
            const double raw = t.logvar_raw(i, j);
            if (raw < kLogvarMin || raw > kLogvarMax) d_lv(i, j) = 0.0;
        }
    }
    g[2] = LayerGrad::zeros_like(m.mu_head);
    g[3] = LayerGrad::zeros_like(m.logvar_head);
    Dense2D d_proj = numerics::backward_layer(m.mu_head, t.mu_head, d_mu, g[2]);
    d_proj += numerics::backward_layer(m.logvar_head, t.logvar_head, d_lv, g[3]);
    g[1] = LayerGrad::zeros_like(m.enc_proj);
    const Dense2D d_h = numerics::backward_layer(m.enc_proj, t.enc_proj, d_proj, g[1]);
    g[0] = LayerGrad::zeros_like(m.enc_hidden);
    numerics::backward_layer(m.enc_hidden, t.enc_hidden, d_h, g[0]);
    return g;
}

}  // namespace vaebgm::vae

#endif
