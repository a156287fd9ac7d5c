#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "temprel/tensor.hpp"

namespace temprel::nn {

/// Handle to a node on a Tape.
struct Var {
  std::size_t id = 0;
};

/// Reverse-mode tape. Operations append nodes; backward() walks them in
/// reverse order. Parameter leaves alias the Parameter's own value and grad,
/// so gradients accumulate directly into the model across tapes until the
/// caller zeroes them. A tape must not outlive the parameters it references.
class Tape {
 public:
  Var constant(Tensor value);
  Var parameter(Parameter& p);

  const Tensor& value(Var v) const;
  Tensor& grad(Var v);

  /// Seeds d(loss) = seed and propagates. `loss` must be a single-element node.
  void backward(Var loss, double seed = 1.0);

  std::size_t size() const { return nodes_.size(); }

  // Used by operation implementations.
  using Backward = std::function<void(Tape&)>;
  Var push(Tensor value, Backward backward);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    Parameter* param = nullptr;
    Backward backward;
  };
  std::vector<Node> nodes_;
};

/// y = W x + b with W of shape [out x in].
Var linear(Tape& t, Var x, Var weight, Var bias);
Var tanh(Tape& t, Var x);
Var sigmoid(Tape& t, Var x);
Var add(Tape& t, Var a, Var b);
Var scale(Tape& t, Var a, double c);
/// Concatenates vectors.
Var concat(Tape& t, std::span<const Var> parts);
/// Row `r` of a matrix, as a vector.
Var row(Tape& t, Var matrix, std::size_t r);

struct RowRef {
  Var source;
  std::size_t row;
};
/// Builds a matrix whose i-th row is rows[i].source[rows[i].row].
Var gather_rows(Tape& t, std::span<const RowRef> rows);

/// Unidirectional LSTM over the rows of `inputs` [T x d] with gate order
/// (input, forget, cell, output). `wx` is [4h x d], `wh` is [4h x h], `b` is
/// [4h]. Zero initial state. With `reverse`, steps run from T-1 down to 0 and
/// the output row t still holds the state produced at input position t.
Var lstm(Tape& t, Var inputs, Var wx, Var wh, Var b, bool reverse);

/// Mean-free cross entropy -sum(target * log softmax(logits)); target is a
/// distribution over the logits.
Var softmax_cross_entropy(Tape& t, Var logits, std::span<const double> target);
/// Binary cross entropy of sigmoid(logit) against probability `target`.
Var sigmoid_bce(Tape& t, Var logit, double target);

}  // namespace temprel::nn
