#pragma once

#include <span>
#include <vector>

#include "gmvae/autodiff.hpp"
#include "gmvae/numeric.hpp"
#include "gmvae/types.hpp"

namespace gmvae {

// Bernoulli parameters are clamped to this band before taking logs so that
// saturated sigmoids cannot produce -inf.
inline constexpr double kBernoulliEps = 1e-7;

// ---------------------------------------------------------------------------
// Differentiable (tape) forms. All tensors are batched row-wise: a BxD mean
// and BxD variance describe one diagonal Gaussian per row. The *_rows ops
// return one value per row (Bx1).
// ---------------------------------------------------------------------------

struct DiagGaussianVars {
  Var mean;
  Var var;
};

struct CategoricalVars {
  Var probs;      // BxK
  Var log_probs;  // BxK
};

// log N(x | mean, diag(var)) summed over dims. DomainError on nonpositive
// variance.
Var gaussian_logpdf_rows(Tape& tape, Var x, const DiagGaussianVars& g);

// Closed-form KL(q || p) between diagonal Gaussians, per row.
Var kl_diag_gaussians_rows(Tape& tape, const DiagGaussianVars& q, const DiagGaussianVars& p);

// KL(q || N(0, I)), per row.
Var kl_to_standard_normal_rows(Tape& tape, const DiagGaussianVars& q);

// sum_d y log p + (1-y) log(1-p), per row; probs clamped to
// [kBernoulliEps, 1-kBernoulliEps].
Var bernoulli_loglik_rows(Tape& tape, Var y, Var probs);

// mean + sqrt(var) .* noise (noise enters as a constant, so gradients flow
// into mean and var only).
Var reparam_sample(Tape& tape, const DiagGaussianVars& g, const Mat& noise);

// Mixture responsibilities p(z_j = 1 | x, w) for K row-wise components,
// computed in log space. `log_pi` is the log prior over components
// (uniform -ln K when empty). ConfigError on K = 0.
CategoricalVars z_posterior_rows(Tape& tape, Var x, std::span<const DiagGaussianVars> components,
                                 const Vec& log_pi = Vec());

// KL(c || uniform(K)) = sum_k p_k (log p_k + log K), per row; in [0, ln K].
Var kl_categorical_uniform_rows(Tape& tape, const CategoricalVars& c, Index k);

// ---------------------------------------------------------------------------
// Plain (non-differentiable) forms over Eigen vectors; the same math without
// a tape. These back the evaluation paths and serve as cross-check oracles
// for the tape forms.
// ---------------------------------------------------------------------------

double gaussian_logpdf(const Vec& x, const Vec& mean, const Vec& var);
double kl_diag_gaussians(const Vec& mean_q, const Vec& var_q, const Vec& mean_p, const Vec& var_p);
double kl_to_standard_normal(const Vec& mean, const Vec& var);
double bernoulli_loglik(const Vec& y, const Vec& probs);
Vec reparam_sample(const Vec& mean, const Vec& var, const Vec& noise);

// Responsibilities for a single x over K components (means/vars as K x D
// matrices); uniform prior unless log_pi given.
Vec z_posterior(const Vec& x, const Mat& means, const Mat& vars, const Vec& log_pi = Vec());

double kl_categorical_uniform(const Vec& probs);

}  // namespace gmvae
