#pragma once

// Loss terms: closed-form diagonal-Gaussian KL, mean-absolute-error
// reconstruction, the linear annealing schedule for the KL weight, and the
// weighted two-branch objective
//   total = alpha * (recon_post + lambda * kl) + (1 - alpha) * recon_prior
// where recon_post rates on a posterior-sampled latent, recon_prior on a
// prior-sampled one, and both ratings come from the same QRG parameters.

#include <cmath>
#include <stdexcept>

#include "pcqa/model.hpp"
#include "pcqa/rng.hpp"

namespace pcqa {

struct LossBreakdown {
    double recon_post = 0.0;
    double kl = 0.0;
    double recon_prior = 0.0;
    double lambda = 1.0;
    double alpha = 1.0;
    double total = 0.0;
};

// KL(q || p) for diagonal Gaussians:
//   sum_k [ ln(sp/sq) + (sq^2 + (mq - mp)^2) / (2 sp^2) - 1/2 ].
inline double kl_diag_gauss(const GaussianStat& q, const GaussianStat& p) {
    if (q.mu.size() != p.mu.size() || q.sigma.size() != p.sigma.size() || q.mu.size() != q.sigma.size())
        throw std::invalid_argument("kl_diag_gauss: dimension mismatch");
    double kl = 0.0;
    for (std::size_t k = 0; k < q.mu.size(); ++k) {
        const double sq = q.sigma[k], sp = p.sigma[k];
        if (!(sq > 0.0) || !(sp > 0.0)) throw std::invalid_argument("kl_diag_gauss: non-positive sigma");
        const double dm = q.mu[k] - p.mu[k];
        kl += std::log(sp / sq) + (sq * sq + dm * dm) / (2.0 * sp * sp) - 0.5;
    }
    return kl;
}

// Differentiable KL on graph-attached stats. Uses the log-sigmas directly
// (they exist pre-exponential), which keeps the expression stable:
//   sum_k [ lsp - lsq + (exp(2 lsq) + (mq - mp)^2) * exp(-2 lsp) / 2 - 1/2 ].
template <typename T>
Var<T> kl_divergence(const GaussStat<T>& q, const GaussStat<T>& p) {
    if (q.mu->val.numel() != p.mu->val.numel())
        throw ShapeError("kl_divergence: dimension mismatch");
    Var<T> dm = sub(q.mu, p.mu);
    Var<T> var_q = vexp(scale(q.log_sigma, T(2)));
    Var<T> inv_var_p = vexp(scale(p.log_sigma, T(-2)));
    Var<T> quad = scale(mul(add(var_q, mul(dm, dm)), inv_var_p), T(0.5));
    Var<T> terms = add_const(add(sub(p.log_sigma, q.log_sigma), quad), T(-0.5));
    return reduce_sum(terms);
}

// |rating - target| on the normalized scale; subgradient 0 at equality.
template <typename T>
Var<T> recon_mae(const Var<T>& rating, double target_normalized) {
    if (rating->val.numel() != 1) throw ShapeError("recon_mae: rating must be scalar");
    return vabs(add_const(rating, static_cast<T>(-target_normalized)));
}

// KL weight = epoch / total_epochs, 1-indexed so the first epoch already
// regularizes a little.
inline double lambda_schedule(int epoch, int total_epochs) {
    if (total_epochs < 1 || epoch < 1 || epoch > total_epochs)
        throw std::out_of_range("lambda_schedule: epoch outside [1, total_epochs]");
    return static_cast<double>(epoch) / static_cast<double>(total_epochs);
}

template <typename T>
struct StepLoss {
    Var<T> total;
    LossBreakdown parts;
};

// Single-sample training objective. Posterior and prior branches draw
// independent noise; both ratings flow through the shared QRG parameters.
template <typename T>
StepLoss<T> overall_loss(const QualityModel<T>& model, const std::vector<Var<T>>& views,
                         double mos_normalized, double lambda, double alpha, Rng& rng) {
    if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("overall_loss: alpha outside [0, 1]");
    if (lambda <= 0.0 || lambda > 1.0) throw std::invalid_argument("overall_loss: lambda outside (0, 1]");

    const GaussStat<T> q = model.encode_posterior(views, mos_normalized);
    const GaussStat<T> p = model.encode_prior(views);

    const int k = model.config().latent_dim;
    Var<T> z_q = reparameterize(q, draw_standard_normal<T>(k, rng));
    Var<T> z_p = reparameterize(p, draw_standard_normal<T>(k, rng));

    Var<T> loss_post = recon_mae(model.rate(views, z_q), mos_normalized);
    Var<T> loss_prior = recon_mae(model.rate(views, z_p), mos_normalized);
    Var<T> kl = kl_divergence(q, p);

    Var<T> cvae = add(loss_post, scale(kl, static_cast<T>(lambda)));
    Var<T> total = add(scale(cvae, static_cast<T>(alpha)), scale(loss_prior, static_cast<T>(1.0 - alpha)));

    StepLoss<T> out;
    out.total = total;
    out.parts.recon_post = static_cast<double>(loss_post->val.v[0]);
    out.parts.kl = static_cast<double>(kl->val.v[0]);
    out.parts.recon_prior = static_cast<double>(loss_prior->val.v[0]);
    out.parts.lambda = lambda;
    out.parts.alpha = alpha;
    out.parts.total = static_cast<double>(total->val.v[0]);
    return out;
}

} // namespace pcqa
