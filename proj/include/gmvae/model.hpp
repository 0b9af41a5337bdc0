#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gmvae/autodiff.hpp"
#include "gmvae/distributions.hpp"
#include "gmvae/nn.hpp"
#include "gmvae/rng.hpp"
#include "gmvae/types.hpp"

namespace gmvae {

enum class Likelihood : std::uint8_t { Gaussian, Bernoulli };

const char* likelihood_name(Likelihood l);
Likelihood likelihood_from_name(const std::string& name);

// Architecture of the three networks plus the latent layout. `arch` is a
// preset id so a checkpoint sidecar can reconstruct the spec.
struct GmvaeSpec {
  std::string arch;
  Index k = 0;         // mixture components
  Index n_x = 0;       // x-latent width
  Index n_w = 0;       // w-latent width
  Index data_dim = 0;  // observation width
  Likelihood likelihood = Likelihood::Gaussian;

  MlpSpec recognition;  // y -> heads mu_x, var_x, mu_w, var_w
  MlpSpec mixture;      // w -> K mean heads + K variance heads over n_x
  MlpSpec decoder;      // x -> likelihood params

  void validate() const;
};

// Presets. The synthetic nets follow the dense tables verbatim
// (trunk 2x120 relu, mixture 120 tanh, decoder 2x120 relu with Gaussian
// heads). The MNIST nets are dense throughout: encoder 784-500-500 relu with
// heads 150/200, mixture 150-500 tanh with 2K heads of 200, decoder
// 200-500-500-784 sigmoid Bernoulli.
GmvaeSpec synthetic_spec(Index k);
GmvaeSpec mnist_spec(Index k);
GmvaeSpec spec_from_arch(const std::string& arch, Index k);

struct GmvaeModel {
  GmvaeSpec spec;
  MlpParams recognition;
  MlpParams mixture;
  MlpParams decoder;

  static GmvaeModel init(const GmvaeSpec& spec, std::uint64_t seed);

  Index param_count() const;
  void for_each_param(const std::function<void(const std::string&, Mat&)>& fn);
  void for_each_param(const std::function<void(const std::string&, const Mat&)>& fn) const;
};

// The four terms of the lower bound plus their sum, per-batch means in nats
// per data point. Each *_prior field is a negated KL, so nonpositive.
// `z_kl` keeps the pre-clamp z KL (positive convention) for the training
// trace. total = ((reconstruction + conditional_prior) + w_prior) + z_prior.
struct ElboBreakdown {
  double reconstruction = 0.0;
  double conditional_prior = 0.0;
  double w_prior = 0.0;
  double z_prior = 0.0;
  double total = 0.0;
  double z_kl = 0.0;
};

// Fixed noise for one ELBO evaluation: one draw for the reconstruction term
// and M draws of (x, w) shared by the conditional-prior and z-prior
// estimators. Draw order: eps_recon, then eps_x[j], eps_w[j] per j.
struct ElboNoise {
  Mat eps_recon;           // B x n_x
  std::vector<Mat> eps_x;  // M of B x n_x
  std::vector<Mat> eps_w;  // M of B x n_w

  static ElboNoise draw(Rng& rng, Index batch, Index n_x, Index n_w, int m);
};

// Bound parameter leaves for one tape.
struct ModelVars {
  MlpVars recognition;
  MlpVars mixture;
  MlpVars decoder;
};

ModelVars bind(Tape& tape, const GmvaeModel& model);

struct RecognizeVars {
  DiagGaussianVars q_x;
  DiagGaussianVars q_w;
};

// Recognition networks: y -> q(x|y), q(w|y).
RecognizeVars recognize(Tape& tape, const GmvaeSpec& spec, const MlpVars& recognition, Var y);

// Mixture network: w -> K diagonal Gaussians over n_x (one forward pass).
std::vector<DiagGaussianVars> mixture_params(Tape& tape, const GmvaeSpec& spec,
                                             const MlpVars& mixture, Var w);

// Decoder: x -> likelihood parameters.
struct DecodeVars {
  Likelihood likelihood = Likelihood::Gaussian;
  DiagGaussianVars gauss;  // Gaussian likelihood
  Var bernoulli_probs;     // Bernoulli likelihood, values in (0, 1)
};

DecodeVars decode(Tape& tape, const GmvaeSpec& spec, const MlpVars& decoder, Var x);

// Tape handles of the ELBO terms; values can be read off the tape and the
// whole thing is differentiable. lambda >= 0 clamps the z-prior KL from
// below (max(lambda, KL)), zeroing its gradient when the estimate is under
// the threshold.
struct ElboVars {
  Var reconstruction;
  Var conditional_prior;
  Var w_prior;
  Var z_prior;
  Var total;
  Var z_kl;  // pre-clamp, positive
};

ElboVars elbo_graph(Tape& tape, const GmvaeSpec& spec, const ModelVars& vars, const Mat& batch,
                    double lambda, const ElboNoise& noise);

ElboBreakdown read_breakdown(const Tape& tape, const ElboVars& v);

// Convenience: build a throwaway tape, draw noise from rng, evaluate.
ElboBreakdown elbo(const GmvaeModel& model, const Mat& batch, int m, double lambda, Rng& rng);

// Averaged z-posterior over m reparameterized draws of (x, w); m = 0 uses
// the posterior means (deterministic mode). Returns the per-point posterior
// matrix (N x K) and the argmax assignment with ties broken toward the
// lowest index.
struct ClusterAssignment {
  std::vector<Index> cluster;
  Mat posterior;  // N x K
};

ClusterAssignment cluster_assign(const GmvaeModel& model, const Mat& points, int m, Rng& rng);

// Draw one observation from component k: x ~ N(mu_k(w), var_k(w)), then
// decode. Bernoulli means are returned as grayscale (no pixel sampling);
// the Gaussian likelihood returns the decoder mean. IndexError if k is out
// of range.
Vec generate(const GmvaeModel& model, Index component, const Vec& w, Rng& rng);

}  // namespace gmvae
