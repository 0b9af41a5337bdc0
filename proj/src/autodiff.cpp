#include "gmvae/autodiff.hpp"

#include <cmath>

#include "gmvae/numeric.hpp"

namespace gmvae {

const char* op_name(Op op) {
  switch (op) {
    case Op::Leaf: return "leaf";
    case Op::MatMul: return "matmul";
    case Op::Transpose: return "transpose";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::BiasAdd: return "bias_add";
    case Op::Mul: return "mul";
    case Op::Div: return "div";
    case Op::Scale: return "scale";
    case Op::Shift: return "shift";
    case Op::Relu: return "relu";
    case Op::Tanh: return "tanh";
    case Op::Sigmoid: return "sigmoid";
    case Op::Exp: return "exp";
    case Op::Log: return "log";
    case Op::Sqrt: return "sqrt";
    case Op::Square: return "square";
    case Op::Clamp: return "clamp";
    case Op::ClampMin: return "clamp_min";
    case Op::SumAll: return "sum_all";
    case Op::MeanAll: return "mean_all";
    case Op::RowSum: return "row_sum";
    case Op::LogSumExpRows: return "logsumexp_rows";
    case Op::SoftmaxRows: return "softmax_rows";
    case Op::LogSoftmaxRows: return "log_softmax_rows";
    case Op::ConcatCols: return "concat_cols";
    case Op::SliceCols: return "slice_cols";
  }
  return "?";
}

namespace {
std::string shape_str(const Mat& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}
}  // namespace

const Tape::Node& Tape::node(Var v) const {
  if (!v.valid() || v.id >= size()) throw IndexError("tape: invalid node handle");
  return nodes_[static_cast<std::size_t>(v.id)];
}

const Mat& Tape::value(Var v) const { return node(v).value; }

const Mat& Tape::adjoint(Var v) const { return node(v).adjoint; }

void Tape::clear() { nodes_.clear(); }

void Tape::check_finite(const Node& n, Index id) const {
  if (!n.value.allFinite()) {
    std::string msg = "non-finite value at node " + std::to_string(id) + " (" +
                      op_name(n.op) + (n.label.empty() ? "" : ", " + n.label) + ")";
    throw NumericalError(msg);
  }
}

void Tape::shape_fail(const std::string& what, Var a, Var b) const {
  std::string msg = what + ": " + shape_str(value(a));
  if (b.valid()) msg += " vs " + shape_str(value(b));
  throw ShapeError(msg);
}

Var Tape::push(Node&& n) {
  const Index id = size();
  nodes_.push_back(std::move(n));
  check_finite(nodes_.back(), id);
  return Var{id};
}

Var Tape::leaf(const Mat& value, bool requires_grad, std::string label) {
  Node n;
  n.op = Op::Leaf;
  n.value = value;
  n.requires_grad = requires_grad;
  n.label = std::move(label);
  return push(std::move(n));
}

Var Tape::constant(const Mat& value, std::string label) {
  return leaf(value, false, std::move(label));
}

Var Tape::constant(double scalar, std::string label) {
  Mat m(1, 1);
  m(0, 0) = scalar;
  return leaf(m, false, std::move(label));
}

Var Tape::matmul(Var a, Var b) {
  const Node &na = node(a), &nb = node(b);
  if (na.value.cols() != nb.value.rows()) shape_fail("matmul: inner dims differ", a, b);
  Node n;
  n.op = Op::MatMul;
  n.a = a.id;
  n.b = b.id;
  n.value.noalias() = na.value * nb.value;
  n.requires_grad = na.requires_grad || nb.requires_grad;
  return push(std::move(n));
}

Var Tape::transpose(Var a) {
  const Node& na = node(a);
  Node n;
  n.op = Op::Transpose;
  n.a = a.id;
  n.value = na.value.transpose();
  n.requires_grad = na.requires_grad;
  return push(std::move(n));
}

Var Tape::add(Var a, Var b) {
  const Node &na = node(a), &nb = node(b);
  if (na.value.rows() != nb.value.rows() || na.value.cols() != nb.value.cols())
    shape_fail("add: shapes differ", a, b);
  Node n;
  n.op = Op::Add;
  n.a = a.id;
  n.b = b.id;
  n.value = na.value + nb.value;
  n.requires_grad = na.requires_grad || nb.requires_grad;
  return push(std::move(n));
}

Var Tape::sub(Var a, Var b) {
  const Node &na = node(a), &nb = node(b);
  if (na.value.rows() != nb.value.rows() || na.value.cols() != nb.value.cols())
    shape_fail("sub: shapes differ", a, b);
  Node n;
  n.op = Op::Sub;
  n.a = a.id;
  n.b = b.id;
  n.value = na.value - nb.value;
  n.requires_grad = na.requires_grad || nb.requires_grad;
  return push(std::move(n));
}

Var Tape::bias_add(Var x, Var bias) {
  const Node &nx = node(x), &nb = node(bias);
  if (nb.value.rows() != 1 || nb.value.cols() != nx.value.cols())
    shape_fail("bias_add: bias must be 1xN matching columns", x, bias);
  Node n;
  n.op = Op::BiasAdd;
  n.a = x.id;
  n.b = bias.id;
  n.value = nx.value.rowwise() + nb.value.row(0);
  n.requires_grad = nx.requires_grad || nb.requires_grad;
  return push(std::move(n));
}

Var Tape::mul(Var a, Var b) {
  const Node &na = node(a), &nb = node(b);
  if (na.value.rows() != nb.value.rows() || na.value.cols() != nb.value.cols())
    shape_fail("mul: shapes differ", a, b);
  Node n;
  n.op = Op::Mul;
  n.a = a.id;
  n.b = b.id;
  n.value = na.value.cwiseProduct(nb.value);
  n.requires_grad = na.requires_grad || nb.requires_grad;
  return push(std::move(n));
}

Var Tape::div(Var a, Var b) {
  const Node &na = node(a), &nb = node(b);
  if (na.value.rows() != nb.value.rows() || na.value.cols() != nb.value.cols())
    shape_fail("div: shapes differ", a, b);
  Node n;
  n.op = Op::Div;
  n.a = a.id;
  n.b = b.id;
  n.value = na.value.cwiseQuotient(nb.value);
  n.requires_grad = na.requires_grad || nb.requires_grad;
  return push(std::move(n));
}

Var Tape::scale(Var a, double c) {
  const Node& na = node(a);
  Node n;
  n.op = Op::Scale;
  n.a = a.id;
  n.c0 = c;
  n.value = na.value * c;
  n.requires_grad = na.requires_grad;
  return push(std::move(n));
}

Var Tape::shift(Var a, double c) {
  const Node& na = node(a);
  Node n;
  n.op = Op::Shift;
  n.a = a.id;
  n.c0 = c;
  n.value = na.value.array() + c;
  n.requires_grad = na.requires_grad;
  return push(std::move(n));
}

Var Tape::neg(Var a) { return scale(a, -1.0); }

Var Tape::relu(Var a) {
  const Node& na = node(a);
  Node n;
  n.op = Op::Relu;
  n.a = a.id;
  n.value = na.value.cwiseMax(0.0);
  n.requires_grad = na.requires_grad;
  return push(std::move(n));
}

Var Tape::tanh(Var a) {
  const Node& na = node(a);
  Node n;
  n.op = Op::Tanh;
  n.a = a.id;
  n.value = na.value.array().tanh();
  n.requires_grad = na.requires_grad;
  return push(std::move(n));
}

Var Tape::sigmoid(Var a) {
  const Node& na = node(a);
  Node n;
  n.op = Op::Sigmoid;
  n.a = a.id;
  // 0.5*(1+tanh(x/2)) is stable for both signs
  n.value = (0.5 * ((na.value.array() * 0.5).tanh() + 1.0)).matrix();
  n.requires_grad = na.requires_grad;
  return push(std::move(n));
}

Var Tape::exp(Var a) {
  const Node& na = node(a);
  Node n;
  n.op = Op::Exp;
  n.a = a.id;
  n.value = na.value.array().exp();
  n.requires_grad = na.requires_grad;
  return push(std::move(n));
}

Var Tape::log(Var a) {
  const Node& na = node(a);
  Node n;
  n.op = Op::Log;
  n.a = a.id;
  n.value = na.value.array().log();
  n.requires_grad = na.requires_grad;
  return push(std::move(n));
}

Var Tape::sqrt(Var a) {
  const Node& na = node(a);
  Node n;
  n.op = Op::Sqrt;
  n.a = a.id;
  n.value = na.value.array().sqrt();
  n.requires_grad = na.requires_grad;
  return push(std::move(n));
}

Var Tape::square(Var a) {
  const Node& na = node(a);
  Node n;
  n.op = Op::Square;
  n.a = a.id;
  n.value = na.value.array().square();
  n.requires_grad = na.requires_grad;
  return push(std::move(n));
}

Var Tape::clamp(Var a, double lo, double hi) {
  if (!(lo <= hi)) throw ConfigError("clamp: lo > hi");
  const Node& na = node(a);
  Node n;
  n.op = Op::Clamp;
  n.a = a.id;
  n.c0 = lo;
  n.c1 = hi;
  n.value = na.value.cwiseMax(lo).cwiseMin(hi);
  n.requires_grad = na.requires_grad;
  return push(std::move(n));
}

Var Tape::clamp_min(Var a, double floor) {
  const Node& na = node(a);
  Node n;
  n.op = Op::ClampMin;
  n.a = a.id;
  n.c0 = floor;
  n.value = na.value.cwiseMax(floor);
  n.requires_grad = na.requires_grad;
  return push(std::move(n));
}

Var Tape::sum_all(Var a) {
  const Node& na = node(a);
  Node n;
  n.op = Op::SumAll;
  n.a = a.id;
  n.value.resize(1, 1);
  n.value(0, 0) = na.value.sum();
  n.requires_grad = na.requires_grad;
  return push(std::move(n));
}

Var Tape::mean_all(Var a) {
  const Node& na = node(a);
  Node n;
  n.op = Op::MeanAll;
  n.a = a.id;
  n.value.resize(1, 1);
  n.value(0, 0) = na.value.mean();
  n.requires_grad = na.requires_grad;
  return push(std::move(n));
}

Var Tape::row_sum(Var a) {
  const Node& na = node(a);
  Node n;
  n.op = Op::RowSum;
  n.a = a.id;
  n.value.resize(na.value.rows(), 1);
  n.value.col(0) = na.value.rowwise().sum();
  n.requires_grad = na.requires_grad;
  return push(std::move(n));
}

Var Tape::logsumexp_rows(Var a) {
  const Node& na = node(a);
  Node n;
  n.op = Op::LogSumExpRows;
  n.a = a.id;
  n.value = gmvae::logsumexp_rows(na.value);
  n.requires_grad = na.requires_grad;
  return push(std::move(n));
}

Var Tape::softmax_rows(Var a) {
  const Node& na = node(a);
  Node n;
  n.op = Op::SoftmaxRows;
  n.a = a.id;
  n.value = gmvae::softmax_rows(na.value);
  n.requires_grad = na.requires_grad;
  return push(std::move(n));
}

Var Tape::log_softmax_rows(Var a) {
  const Node& na = node(a);
  Node n;
  n.op = Op::LogSoftmaxRows;
  n.a = a.id;
  n.value = gmvae::log_softmax_rows(na.value);
  n.requires_grad = na.requires_grad;
  return push(std::move(n));
}

Var Tape::concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  Node n;
  n.op = Op::ConcatCols;
  const Index rows = node(parts[0]).value.rows();
  Index cols = 0;
  for (const Var p : parts) {
    const Node& np = node(p);
    if (np.value.rows() != rows) shape_fail("concat_cols: row counts differ", parts[0], p);
    cols += np.value.cols();
    n.parents.push_back(p.id);
    n.requires_grad = n.requires_grad || np.requires_grad;
  }
  n.value.resize(rows, cols);
  Index at = 0;
  for (const Var p : parts) {
    const Mat& v = node(p).value;
    n.value.middleCols(at, v.cols()) = v;
    at += v.cols();
  }
  return push(std::move(n));
}

Var Tape::slice_cols(Var a, Index begin, Index count) {
  const Node& na = node(a);
  if (begin < 0 || count < 0 || begin + count > na.value.cols())
    throw ShapeError("slice_cols: range [" + std::to_string(begin) + ", " +
                     std::to_string(begin + count) + ") outside " + shape_str(na.value));
  Node n;
  n.op = Op::SliceCols;
  n.a = a.id;
  n.c0 = static_cast<double>(begin);
  n.c1 = static_cast<double>(count);
  n.value = na.value.middleCols(begin, count);
  n.requires_grad = na.requires_grad;
  return push(std::move(n));
}

void Tape::backward(Var root) {
  const Node& r = node(root);
  if (r.value.rows() != 1 || r.value.cols() != 1)
    throw ShapeError("backward: root must be 1x1, got " + shape_str(r.value));

  for (Node& n : nodes_) {
    if (n.requires_grad)
      n.adjoint = Mat::Zero(n.value.rows(), n.value.cols());
    else
      n.adjoint.resize(0, 0);
  }
  if (!r.requires_grad) return;  // nothing reachable wants gradients
  nodes_[static_cast<std::size_t>(root.id)].adjoint(0, 0) = 1.0;

  auto grad = [&](Index id) -> Mat& { return nodes_[static_cast<std::size_t>(id)].adjoint; };
  auto wants = [&](Index id) { return id >= 0 && nodes_[static_cast<std::size_t>(id)].requires_grad; };
  auto val = [&](Index id) -> const Mat& { return nodes_[static_cast<std::size_t>(id)].value; };

  for (Index i = root.id; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (!n.requires_grad) continue;
    const Mat& g = n.adjoint;
    switch (n.op) {
      case Op::Leaf:
        break;
      case Op::MatMul:
        if (wants(n.a)) grad(n.a).noalias() += g * val(n.b).transpose();
        if (wants(n.b)) grad(n.b).noalias() += val(n.a).transpose() * g;
        break;
      case Op::Transpose:
        if (wants(n.a)) grad(n.a) += g.transpose();
        break;
      case Op::Add:
        if (wants(n.a)) grad(n.a) += g;
        if (wants(n.b)) grad(n.b) += g;
        break;
      case Op::Sub:
        if (wants(n.a)) grad(n.a) += g;
        if (wants(n.b)) grad(n.b) -= g;
        break;
      case Op::BiasAdd:
        if (wants(n.a)) grad(n.a) += g;
        if (wants(n.b)) grad(n.b).row(0) += g.colwise().sum();
        break;
      case Op::Mul:
        if (wants(n.a)) grad(n.a).array() += g.array() * val(n.b).array();
        if (wants(n.b)) grad(n.b).array() += g.array() * val(n.a).array();
        break;
      case Op::Div:
        if (wants(n.a)) grad(n.a).array() += g.array() / val(n.b).array();
        if (wants(n.b))
          grad(n.b).array() -= g.array() * val(n.a).array() / val(n.b).array().square();
        break;
      case Op::Scale:
        if (wants(n.a)) grad(n.a) += g * n.c0;
        break;
      case Op::Shift:
        if (wants(n.a)) grad(n.a) += g;
        break;
      case Op::Relu:
        if (wants(n.a))
          grad(n.a).array() += g.array() * (val(n.a).array() > 0.0).cast<double>();
        break;
      case Op::Tanh:
        if (wants(n.a)) grad(n.a).array() += g.array() * (1.0 - n.value.array().square());
        break;
      case Op::Sigmoid:
        if (wants(n.a))
          grad(n.a).array() += g.array() * n.value.array() * (1.0 - n.value.array());
        break;
      case Op::Exp:
        if (wants(n.a)) grad(n.a).array() += g.array() * n.value.array();
        break;
      case Op::Log:
        if (wants(n.a)) grad(n.a).array() += g.array() / val(n.a).array();
        break;
      case Op::Sqrt:
        if (wants(n.a)) grad(n.a).array() += g.array() * 0.5 / n.value.array();
        break;
      case Op::Square:
        if (wants(n.a)) grad(n.a).array() += g.array() * 2.0 * val(n.a).array();
        break;
      case Op::Clamp:
        if (wants(n.a))
          grad(n.a).array() +=
              g.array() *
              ((val(n.a).array() >= n.c0) && (val(n.a).array() <= n.c1)).cast<double>();
        break;
      case Op::ClampMin:
        // Pass-through at and above the floor so a zero floor is an identity.
        if (wants(n.a))
          grad(n.a).array() += g.array() * (val(n.a).array() >= n.c0).cast<double>();
        break;
      case Op::SumAll:
        if (wants(n.a)) grad(n.a).array() += g(0, 0);
        break;
      case Op::MeanAll:
        if (wants(n.a))
          grad(n.a).array() += g(0, 0) / static_cast<double>(val(n.a).size());
        break;
      case Op::RowSum:
        if (wants(n.a)) grad(n.a).colwise() += g.col(0);
        break;
      case Op::LogSumExpRows:
        if (wants(n.a)) {
          const Mat sm = gmvae::softmax_rows(val(n.a));
          grad(n.a).array() += sm.array().colwise() * g.col(0).array();
        }
        break;
      case Op::SoftmaxRows:
        if (wants(n.a)) {
          // ds = s .* (g - rowsum(g .* s))
          const Mat& s = n.value;
          const Vec dot = (g.array() * s.array()).rowwise().sum().matrix();
          grad(n.a).array() += s.array() * (g.array().colwise() - dot.array());
        }
        break;
      case Op::LogSoftmaxRows:
        if (wants(n.a)) {
          const Mat sm = gmvae::softmax_rows(val(n.a));
          const Vec gsum = g.rowwise().sum().matrix();
          grad(n.a).array() += g.array() - sm.array().colwise() * gsum.array();
        }
        break;
      case Op::ConcatCols: {
        Index at = 0;
        for (const Index p : n.parents) {
          const Index w = val(p).cols();
          if (wants(p)) grad(p) += g.middleCols(at, w);
          at += w;
        }
        break;
      }
      case Op::SliceCols:
        if (wants(n.a))
          grad(n.a).middleCols(static_cast<Index>(n.c0), static_cast<Index>(n.c1)) += g;
        break;
    }
  }
}

}  // namespace gmvae
