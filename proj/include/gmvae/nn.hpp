#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gmvae/autodiff.hpp"
#include "gmvae/rng.hpp"
#include "gmvae/types.hpp"

namespace gmvae {

// Variance heads produce exp(linear) + kVarianceFloor, keeping them strictly
// positive and bounded away from zero.
inline constexpr double kVarianceFloor = 1e-6;

enum class Activation : std::uint8_t { Identity, Relu, Tanh, Sigmoid, Exp };

const char* activation_name(Activation a);
Activation activation_from_name(const std::string& name);

struct LayerSpec {
  Index in = 0;
  Index out = 0;
  Activation act = Activation::Identity;
};

struct HeadSpec {
  std::string name;
  Index width = 0;
  Activation act = Activation::Identity;
};

// A shared trunk with named output heads, all heads reading the trunk's
// final activation.
struct MlpSpec {
  Index input = 0;
  std::vector<std::pair<Index, Activation>> trunk;  // widths + activations
  std::vector<HeadSpec> heads;

  std::vector<LayerSpec> trunk_layers() const;
  Index trunk_output() const;  // width feeding the heads
  Index head_index(const std::string& name) const;
  void validate() const;  // ConfigError on zero widths or duplicate head names
};

// Closed-form parameter count: sum of out*in + out over all layers.
Index param_count(const MlpSpec& spec);

struct DenseParams {
  Mat weight;  // out x in
  Mat bias;    // 1 x out
};

struct MlpParams {
  std::vector<DenseParams> trunk;
  std::vector<DenseParams> heads;

  Index count() const;
};

// Glorot-uniform weights: |w| <= sqrt(6 / (fan_in + fan_out)); zero biases.
// Deterministic per seed.
MlpParams init_params(const MlpSpec& spec, std::uint64_t seed);
MlpParams init_params(const MlpSpec& spec, Rng& rng);

// Tape handles for one parameter set, in declaration order.
struct MlpVars {
  std::vector<std::pair<Var, Var>> trunk;  // (weight, bias)
  std::vector<std::pair<Var, Var>> heads;
};

// Registers every parameter as a gradient-tracked leaf named
// "<name>.trunk<i>.w" / ".b" and "<name>.<head>.w" / ".b".
MlpVars bind(Tape& tape, const MlpSpec& spec, const MlpParams& params, const std::string& name);

// Forward pass; returns one tensor per head, in spec order. Exp-activated
// heads are floored at kVarianceFloor.
std::vector<Var> forward(Tape& tape, const MlpSpec& spec, const MlpVars& vars, Var input);

// Stable iteration over named parameters; order matches bind().
void for_each_param(const MlpSpec& spec, MlpParams& params, const std::string& name,
                    const std::function<void(const std::string&, Mat&)>& fn);
void for_each_param(const MlpSpec& spec, const MlpParams& params, const std::string& name,
                    const std::function<void(const std::string&, const Mat&)>& fn);

}  // namespace gmvae
