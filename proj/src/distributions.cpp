#include "gmvae/distributions.hpp"

#include <cmath>

#include "gmvae/errors.hpp"

namespace gmvae {

namespace {

void require_positive_var(const Mat& var, const char* where) {
  if ((var.array() <= 0.0).any()) throw DomainError(std::string(where) + ": nonpositive variance");
}

}  // namespace

Var gaussian_logpdf_rows(Tape& tape, Var x, const DiagGaussianVars& g) {
  require_positive_var(tape.value(g.var), "gaussian_logpdf");
  const Index d = tape.value(x).cols();
  // -1/2 sum_d [ log 2pi + log var + (x - mean)^2 / var ]
  const Var diff = tape.sub(x, g.mean);
  const Var quad = tape.div(tape.square(diff), g.var);
  const Var terms = tape.add(tape.log(g.var), quad);
  const Var summed = tape.row_sum(terms);
  return tape.shift(tape.scale(summed, -0.5), -0.5 * kLog2Pi * static_cast<double>(d));
}

Var kl_diag_gaussians_rows(Tape& tape, const DiagGaussianVars& q, const DiagGaussianVars& p) {
  require_positive_var(tape.value(q.var), "kl_diag_gaussians");
  require_positive_var(tape.value(p.var), "kl_diag_gaussians");
  // 1/2 sum_d [ log vp - log vq + (vq + (mq - mp)^2) / vp - 1 ]
  const Var log_ratio = tape.sub(tape.log(p.var), tape.log(q.var));
  const Var num = tape.add(q.var, tape.square(tape.sub(q.mean, p.mean)));
  const Var terms = tape.shift(tape.add(log_ratio, tape.div(num, p.var)), -1.0);
  return tape.scale(tape.row_sum(terms), 0.5);
}

Var kl_to_standard_normal_rows(Tape& tape, const DiagGaussianVars& q) {
  require_positive_var(tape.value(q.var), "kl_to_standard_normal");
  // 1/2 sum_d [ var + mean^2 - 1 - log var ]
  const Var terms =
      tape.shift(tape.sub(tape.add(q.var, tape.square(q.mean)), tape.log(q.var)), -1.0);
  return tape.scale(tape.row_sum(terms), 0.5);
}

Var bernoulli_loglik_rows(Tape& tape, Var y, Var probs) {
  const Mat& yv = tape.value(y);
  if ((yv.array() < 0.0).any() || (yv.array() > 1.0).any())
    throw DomainError("bernoulli_loglik: targets outside [0, 1]");
  const Var p = tape.clamp(probs, kBernoulliEps, 1.0 - kBernoulliEps);
  const Var one_minus_p = tape.shift(tape.neg(p), 1.0);
  const Var one_minus_y = tape.shift(tape.neg(y), 1.0);
  const Var ll = tape.add(tape.mul(y, tape.log(p)), tape.mul(one_minus_y, tape.log(one_minus_p)));
  return tape.row_sum(ll);
}

Var reparam_sample(Tape& tape, const DiagGaussianVars& g, const Mat& noise) {
  const Mat& mean = tape.value(g.mean);
  if (noise.rows() != mean.rows() || noise.cols() != mean.cols())
    throw ShapeError("reparam_sample: noise shape mismatch");
  require_positive_var(tape.value(g.var), "reparam_sample");
  return tape.add(g.mean, tape.mul(tape.sqrt(g.var), tape.constant(noise, "noise")));
}

CategoricalVars z_posterior_rows(Tape& tape, Var x, std::span<const DiagGaussianVars> components,
                                 const Vec& log_pi) {
  const Index k = static_cast<Index>(components.size());
  if (k == 0) throw ConfigError("z_posterior: no mixture components");
  if (log_pi.size() != 0 && log_pi.size() != k)
    throw ShapeError("z_posterior: prior length does not match K");
  const double uniform_log_pi = -std::log(static_cast<double>(k));

  std::vector<Var> logits;
  logits.reserve(static_cast<std::size_t>(k));
  for (Index j = 0; j < k; ++j) {
    const double lp = log_pi.size() ? log_pi(j) : uniform_log_pi;
    logits.push_back(tape.shift(gaussian_logpdf_rows(tape, x, components[static_cast<std::size_t>(j)]), lp));
  }
  const Var stacked = tape.concat_cols(logits);
  return CategoricalVars{tape.softmax_rows(stacked), tape.log_softmax_rows(stacked)};
}

Var kl_categorical_uniform_rows(Tape& tape, const CategoricalVars& c, Index k) {
  const Var plogp = tape.row_sum(tape.mul(c.probs, c.log_probs));
  return tape.shift(plogp, std::log(static_cast<double>(k)));
}

// ---------------------------------------------------------------------------
// Plain forms.
// ---------------------------------------------------------------------------

double gaussian_logpdf(const Vec& x, const Vec& mean, const Vec& var) {
  if (x.size() != mean.size() || mean.size() != var.size())
    throw ShapeError("gaussian_logpdf: dims differ");
  if ((var.array() <= 0.0).any()) throw DomainError("gaussian_logpdf: nonpositive variance");
  const auto d = (x - mean).array();
  return -0.5 * (kLog2Pi * static_cast<double>(x.size()) + var.array().log().sum() +
                 (d.square() / var.array()).sum());
}

double kl_diag_gaussians(const Vec& mean_q, const Vec& var_q, const Vec& mean_p, const Vec& var_p) {
  if (mean_q.size() != var_q.size() || mean_q.size() != mean_p.size() ||
      mean_p.size() != var_p.size())
    throw ShapeError("kl_diag_gaussians: dims differ");
  if ((var_q.array() <= 0.0).any() || (var_p.array() <= 0.0).any())
    throw DomainError("kl_diag_gaussians: nonpositive variance");
  const auto dm = (mean_q - mean_p).array();
  return 0.5 * ((var_p.array().log() - var_q.array().log()) +
                (var_q.array() + dm.square()) / var_p.array() - 1.0)
                   .sum();
}

double kl_to_standard_normal(const Vec& mean, const Vec& var) {
  if (mean.size() != var.size()) throw ShapeError("kl_to_standard_normal: dims differ");
  if ((var.array() <= 0.0).any()) throw DomainError("kl_to_standard_normal: nonpositive variance");
  return 0.5 * (var.array() + mean.array().square() - 1.0 - var.array().log()).sum();
}

double bernoulli_loglik(const Vec& y, const Vec& probs) {
  if (y.size() != probs.size()) throw ShapeError("bernoulli_loglik: dims differ");
  if ((y.array() < 0.0).any() || (y.array() > 1.0).any())
    throw DomainError("bernoulli_loglik: targets outside [0, 1]");
  const auto p = probs.array().max(kBernoulliEps).min(1.0 - kBernoulliEps);
  return (y.array() * p.log() + (1.0 - y.array()) * (1.0 - p).log()).sum();
}

Vec reparam_sample(const Vec& mean, const Vec& var, const Vec& noise) {
  if (mean.size() != var.size() || mean.size() != noise.size())
    throw ShapeError("reparam_sample: dims differ");
  if ((var.array() <= 0.0).any()) throw DomainError("reparam_sample: nonpositive variance");
  return mean.array() + var.array().sqrt() * noise.array();
}

Vec z_posterior(const Vec& x, const Mat& means, const Mat& vars, const Vec& log_pi) {
  const Index k = means.rows();
  if (k == 0) throw ConfigError("z_posterior: no mixture components");
  if (vars.rows() != k || vars.cols() != means.cols() || x.size() != means.cols())
    throw ShapeError("z_posterior: component shapes differ");
  if (log_pi.size() != 0 && log_pi.size() != k)
    throw ShapeError("z_posterior: prior length does not match K");
  Vec logits(k);
  const double uniform_log_pi = -std::log(static_cast<double>(k));
  for (Index j = 0; j < k; ++j) {
    const double lp = log_pi.size() ? log_pi(j) : uniform_log_pi;
    logits(j) = lp + gaussian_logpdf(x, means.row(j).transpose(), vars.row(j).transpose());
  }
  const double lse = logsumexp(logits);
  return (logits.array() - lse).exp();
}

double kl_categorical_uniform(const Vec& probs) {
  const Index k = probs.size();
  if (k == 0) throw ConfigError("kl_categorical_uniform: empty distribution");
  double acc = std::log(static_cast<double>(k));
  for (Index j = 0; j < k; ++j) {
    const double p = probs(j);
    if (p > 0.0) acc += p * std::log(p);  // 0 log 0 = 0
  }
  return acc;
}

}  // namespace gmvae
