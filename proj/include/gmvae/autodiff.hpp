#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gmvae/errors.hpp"
#include "gmvae/types.hpp"

namespace gmvae {

// Reverse-mode automatic differentiation over dense matrices.
//
// The tape is a dynamic graph rebuilt for every training step. Nodes are
// evaluated eagerly at creation (so the topological order is the creation
// order by construction) and every forward value is checked finite; a NaN or
// Inf raises NumericalError naming the node. backward() runs one reverse
// sweep from a scalar root and accumulates adjoints into every node that
// requires gradients.
//
// Broadcasting is restricted to bias_add (a 1xN row added to every row of a
// BxN matrix); everything else demands exact shape agreement so that shape
// bugs fail loudly at the op that introduced them.

enum class Op : std::uint8_t {
  Leaf,
  MatMul,
  Transpose,
  Add,
  Sub,
  BiasAdd,
  Mul,
  Div,
  Scale,
  Shift,
  Relu,
  Tanh,
  Sigmoid,
  Exp,
  Log,
  Sqrt,
  Square,
  Clamp,
  ClampMin,
  SumAll,
  MeanAll,
  RowSum,
  LogSumExpRows,
  SoftmaxRows,
  LogSoftmaxRows,
  ConcatCols,
  SliceCols,
};

const char* op_name(Op op);

struct Var {
  Index id = -1;
  bool valid() const { return id >= 0; }
};

class Tape {
 public:
  // Leaves. Parameters want gradients; constants do not.
  Var leaf(const Mat& value, bool requires_grad, std::string label = {});
  Var constant(const Mat& value, std::string label = {});
  Var constant(double scalar, std::string label = {});

  // Primitives. Each computes its value immediately.
  Var matmul(Var a, Var b);
  Var transpose(Var a);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var bias_add(Var x, Var bias);  // (BxN) + (1xN)
  Var mul(Var a, Var b);          // elementwise
  Var div(Var a, Var b);          // elementwise
  Var scale(Var a, double c);
  Var shift(Var a, double c);
  Var neg(Var a);
  Var relu(Var a);
  Var tanh(Var a);
  Var sigmoid(Var a);
  Var exp(Var a);
  Var log(Var a);
  Var sqrt(Var a);
  Var square(Var a);
  Var clamp(Var a, double lo, double hi);
  Var clamp_min(Var a, double floor);  // max(v, floor); gradient zero below the floor
  Var sum_all(Var a);                  // -> 1x1
  Var mean_all(Var a);                 // -> 1x1
  Var row_sum(Var a);                  // BxN -> Bx1
  Var logsumexp_rows(Var a);           // BxN -> Bx1, max-subtracted
  Var softmax_rows(Var a);             // BxN -> BxN, max-subtracted
  Var log_softmax_rows(Var a);         // BxN -> BxN
  Var concat_cols(std::span<const Var> parts);
  Var slice_cols(Var a, Index begin, Index count);

  // Forward value of `root`; values are cached at creation, so this is a
  // lookup plus a handle check.
  const Mat& eval(Var root) const { return value(root); }

  const Mat& value(Var v) const;
  const Mat& adjoint(Var v) const;

  // Reverse sweep from a 1x1 root. Requires the root's value to exist
  // (it always does: evaluation is eager). Non-scalar root -> ShapeError.
  void backward(Var root);

  Index size() const { return static_cast<Index>(nodes_.size()); }
  void clear();

 private:
  struct Node {
    Op op = Op::Leaf;
    Index a = -1, b = -1;        // parents for unary/binary ops
    std::vector<Index> parents;  // ConcatCols only
    double c0 = 0.0, c1 = 0.0;   // op constants (scale factor, clamp bounds, slice range)
    Mat value;
    Mat adjoint;
    bool requires_grad = false;
    std::string label;
  };

  Var push(Node&& n);
  const Node& node(Var v) const;
  void check_finite(const Node& n, Index id) const;
  [[noreturn]] void shape_fail(const std::string& what, Var a, Var b) const;

  std::vector<Node> nodes_;
};

}  // namespace gmvae
