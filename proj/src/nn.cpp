#include "gmvae/nn.hpp"

#include <cmath>

#include "gmvae/errors.hpp"

namespace gmvae {

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::Identity: return "identity";
    case Activation::Relu: return "relu";
    case Activation::Tanh: return "tanh";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Exp: return "exp";
  }
  return "?";
}

Activation activation_from_name(const std::string& name) {
  if (name == "identity") return Activation::Identity;
  if (name == "relu") return Activation::Relu;
  if (name == "tanh") return Activation::Tanh;
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "exp") return Activation::Exp;
  throw ConfigError("unknown activation: " + name);
}

std::vector<LayerSpec> MlpSpec::trunk_layers() const {
  std::vector<LayerSpec> layers;
  Index in = input;
  for (const auto& [width, act] : trunk) {
    layers.push_back({in, width, act});
    in = width;
  }
  return layers;
}

Index MlpSpec::trunk_output() const { return trunk.empty() ? input : trunk.back().first; }

Index MlpSpec::head_index(const std::string& name) const {
  for (std::size_t i = 0; i < heads.size(); ++i)
    if (heads[i].name == name) return static_cast<Index>(i);
  throw ConfigError("no head named " + name);
}

void MlpSpec::validate() const {
  if (input <= 0) throw ConfigError("mlp: input width must be positive");
  for (const auto& [width, act] : trunk)
    if (width <= 0) throw ConfigError("mlp: trunk layer width must be positive");
  if (heads.empty()) throw ConfigError("mlp: at least one head required");
  for (std::size_t i = 0; i < heads.size(); ++i) {
    if (heads[i].width <= 0) throw ConfigError("mlp: head width must be positive");
    for (std::size_t j = i + 1; j < heads.size(); ++j)
      if (heads[i].name == heads[j].name)
        throw ConfigError("mlp: duplicate head name " + heads[i].name);
  }
}

Index param_count(const MlpSpec& spec) {
  Index n = 0;
  for (const LayerSpec& l : spec.trunk_layers()) n += l.out * l.in + l.out;
  const Index t = spec.trunk_output();
  for (const HeadSpec& h : spec.heads) n += h.width * t + h.width;
  return n;
}

Index MlpParams::count() const {
  Index n = 0;
  for (const DenseParams& p : trunk) n += p.weight.size() + p.bias.size();
  for (const DenseParams& p : heads) n += p.weight.size() + p.bias.size();
  return n;
}

namespace {

DenseParams init_dense(Index in, Index out, Rng& rng) {
  const double s = std::sqrt(6.0 / static_cast<double>(in + out));
  DenseParams p;
  p.weight = rng.uniform_matrix(out, in, -s, s);
  p.bias = Mat::Zero(1, out);
  return p;
}

}  // namespace

MlpParams init_params(const MlpSpec& spec, Rng& rng) {
  spec.validate();
  MlpParams params;
  for (const LayerSpec& l : spec.trunk_layers()) params.trunk.push_back(init_dense(l.in, l.out, rng));
  const Index t = spec.trunk_output();
  for (const HeadSpec& h : spec.heads) params.heads.push_back(init_dense(t, h.width, rng));
  return params;
}

MlpParams init_params(const MlpSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  return init_params(spec, rng);
}

MlpVars bind(Tape& tape, const MlpSpec& spec, const MlpParams& params, const std::string& name) {
  if (params.trunk.size() != spec.trunk.size() || params.heads.size() != spec.heads.size())
    throw ShapeError("bind: parameter set does not match spec " + name);
  MlpVars vars;
  for (std::size_t i = 0; i < params.trunk.size(); ++i) {
    const std::string base = name + ".trunk" + std::to_string(i);
    vars.trunk.emplace_back(tape.leaf(params.trunk[i].weight, true, base + ".w"),
                            tape.leaf(params.trunk[i].bias, true, base + ".b"));
  }
  for (std::size_t i = 0; i < params.heads.size(); ++i) {
    const std::string base = name + "." + spec.heads[i].name;
    vars.heads.emplace_back(tape.leaf(params.heads[i].weight, true, base + ".w"),
                            tape.leaf(params.heads[i].bias, true, base + ".b"));
  }
  return vars;
}

namespace {

Var activate(Tape& tape, Var z, Activation act) {
  switch (act) {
    case Activation::Identity: return z;
    case Activation::Relu: return tape.relu(z);
    case Activation::Tanh: return tape.tanh(z);
    case Activation::Sigmoid: return tape.sigmoid(z);
    case Activation::Exp: return tape.shift(tape.exp(z), kVarianceFloor);
  }
  throw ConfigError("bad activation");
}

Var dense(Tape& tape, Var x, Var weight, Var bias, Activation act) {
  return activate(tape, tape.bias_add(tape.matmul(x, tape.transpose(weight)), bias), act);
}

}  // namespace

std::vector<Var> forward(Tape& tape, const MlpSpec& spec, const MlpVars& vars, Var input) {
  if (tape.value(input).cols() != spec.input)
    throw ShapeError("mlp forward: input width " + std::to_string(tape.value(input).cols()) +
                     ", expected " + std::to_string(spec.input));
  Var h = input;
  for (std::size_t i = 0; i < spec.trunk.size(); ++i)
    h = dense(tape, h, vars.trunk[i].first, vars.trunk[i].second, spec.trunk[i].second);
  std::vector<Var> outs;
  outs.reserve(spec.heads.size());
  for (std::size_t i = 0; i < spec.heads.size(); ++i)
    outs.push_back(dense(tape, h, vars.heads[i].first, vars.heads[i].second, spec.heads[i].act));
  return outs;
}

void for_each_param(const MlpSpec& spec, MlpParams& params, const std::string& name,
                    const std::function<void(const std::string&, Mat&)>& fn) {
  for (std::size_t i = 0; i < params.trunk.size(); ++i) {
    const std::string base = name + ".trunk" + std::to_string(i);
    fn(base + ".w", params.trunk[i].weight);
    fn(base + ".b", params.trunk[i].bias);
  }
  for (std::size_t i = 0; i < params.heads.size(); ++i) {
    const std::string base = name + "." + spec.heads[i].name;
    fn(base + ".w", params.heads[i].weight);
    fn(base + ".b", params.heads[i].bias);
  }
}

void for_each_param(const MlpSpec& spec, const MlpParams& params, const std::string& name,
                    const std::function<void(const std::string&, const Mat&)>& fn) {
  for_each_param(spec, const_cast<MlpParams&>(params), name,
                 [&fn](const std::string& n, Mat& m) { fn(n, m); });
}

}  // namespace gmvae
