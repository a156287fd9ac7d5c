#include "temprel/tape.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "temprel/layers.hpp"

namespace temprel::nn {

Var Tape::constant(Tensor value) { return push(std::move(value), nullptr); }

Var Tape::parameter(Parameter& p) {
  Node n;
  n.param = &p;
  nodes_.push_back(std::move(n));
  return {nodes_.size() - 1};
}

const Tensor& Tape::value(Var v) const {
  const Node& n = nodes_[v.id];
  return n.param ? n.param->value : n.value;
}

Tensor& Tape::grad(Var v) {
  Node& n = nodes_[v.id];
  if (n.param) return n.param->grad;
  if (n.grad.size() != n.value.size()) n.grad = Tensor(n.value.shape());
  return n.grad;
}

Var Tape::push(Tensor value, Backward backward) {
  Node n;
  n.value = std::move(value);
  n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return {nodes_.size() - 1};
}

void Tape::backward(Var loss, double seed) {
  if (value(loss).size() != 1) throw std::invalid_argument("backward needs a scalar node");
  grad(loss)[0] += seed;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    if (nodes_[i].backward) nodes_[i].backward(*this);
  }
}

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

Var linear(Tape& t, Var x, Var weight, Var bias) {
  const Tensor& W = t.value(weight);
  const Tensor& xv = t.value(x);
  const Tensor& bv = t.value(bias);
  require(W.rank() == 2 && W.cols() == xv.size() && bv.size() == W.rows(),
          "linear: shape mismatch");
  const std::size_t out = W.rows(), in = W.cols();
  Tensor y({out});
  for (std::size_t o = 0; o < out; ++o) {
    double acc = bv[o];
    const auto wr = W.row(o);
    for (std::size_t i = 0; i < in; ++i) acc += wr[i] * xv[i];
    y[o] = acc;
  }
  Var self{t.size()};
  return t.push(std::move(y), [=](Tape& tp) {
    const Tensor dy = tp.grad(self);
    const Tensor& Wv = tp.value(weight);
    const Tensor xval = tp.value(x);
    Tensor& dW = tp.grad(weight);
    for (std::size_t o = 0; o < out; ++o)
      for (std::size_t i = 0; i < in; ++i) dW.at(o, i) += dy[o] * xval[i];
    Tensor& db = tp.grad(bias);
    for (std::size_t o = 0; o < out; ++o) db[o] += dy[o];
    Tensor& dx = tp.grad(x);
    for (std::size_t o = 0; o < out; ++o)
      for (std::size_t i = 0; i < in; ++i) dx[i] += Wv.at(o, i) * dy[o];
  });
}

Var tanh(Tape& t, Var x) {
  Tensor y = t.value(x);
  for (auto& v : y.data()) v = std::tanh(v);
  Var self{t.size()};
  return t.push(std::move(y), [=](Tape& tp) {
    const Tensor& yv = tp.value(self);
    const Tensor dy = tp.grad(self);
    Tensor& dx = tp.grad(x);
    for (std::size_t i = 0; i < yv.size(); ++i) dx[i] += dy[i] * (1.0 - yv[i] * yv[i]);
  });
}

Var sigmoid(Tape& t, Var x) {
  Tensor y = t.value(x);
  for (auto& v : y.data()) v = sigmoid(v);
  Var self{t.size()};
  return t.push(std::move(y), [=](Tape& tp) {
    const Tensor& yv = tp.value(self);
    const Tensor dy = tp.grad(self);
    Tensor& dx = tp.grad(x);
    for (std::size_t i = 0; i < yv.size(); ++i) dx[i] += dy[i] * yv[i] * (1.0 - yv[i]);
  });
}

Var add(Tape& t, Var a, Var b) {
  Tensor y = t.value(a);
  const Tensor& bv = t.value(b);
  require(y.same_shape(bv), "add: shape mismatch");
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += bv[i];
  Var self{t.size()};
  return t.push(std::move(y), [=](Tape& tp) {
    const Tensor dy = tp.grad(self);
    for (Var in : {a, b}) {
      Tensor& d = tp.grad(in);
      for (std::size_t i = 0; i < dy.size(); ++i) d[i] += dy[i];
    }
  });
}

Var scale(Tape& t, Var a, double c) {
  Tensor y = t.value(a);
  for (auto& v : y.data()) v *= c;
  Var self{t.size()};
  return t.push(std::move(y), [=](Tape& tp) {
    const Tensor dy = tp.grad(self);
    Tensor& d = tp.grad(a);
    for (std::size_t i = 0; i < dy.size(); ++i) d[i] += c * dy[i];
  });
}

Var concat(Tape& t, std::span<const Var> parts) {
  std::vector<double> out;
  std::vector<std::size_t> sizes;
  for (Var p : parts) {
    const auto d = t.value(p).data();
    out.insert(out.end(), d.begin(), d.end());
    sizes.push_back(d.size());
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  Var self{t.size()};
  return t.push(Tensor::vector(std::move(out)), [=](Tape& tp) {
    const Tensor dy = tp.grad(self);
    std::size_t off = 0;
    for (std::size_t k = 0; k < inputs.size(); ++k) {
      Tensor& d = tp.grad(inputs[k]);
      for (std::size_t i = 0; i < sizes[k]; ++i) d[i] += dy[off + i];
      off += sizes[k];
    }
  });
}

Var row(Tape& t, Var matrix, std::size_t r) {
  const Tensor& m = t.value(matrix);
  require(m.rank() == 2 && r < m.rows(), "row: index out of range");
  const auto src = m.row(r);
  Tensor y = Tensor::vector({src.begin(), src.end()});
  Var self{t.size()};
  return t.push(std::move(y), [=](Tape& tp) {
    const Tensor dy = tp.grad(self);
    auto d = tp.grad(matrix).row(r);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += dy[i];
  });
}

Var gather_rows(Tape& t, std::span<const RowRef> rows) {
  require(!rows.empty(), "gather_rows: no rows");
  const std::size_t d = t.value(rows[0].source).cols();
  Tensor y({rows.size(), d});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Tensor& src = t.value(rows[i].source);
    require(src.cols() == d && rows[i].row < src.rows(), "gather_rows: shape mismatch");
    std::copy_n(src.row(rows[i].row).begin(), d, y.row(i).begin());
  }
  std::vector<RowRef> refs(rows.begin(), rows.end());
  Var self{t.size()};
  return t.push(std::move(y), [=](Tape& tp) {
    const Tensor dy = tp.grad(self);
    for (std::size_t i = 0; i < refs.size(); ++i) {
      auto dst = tp.grad(refs[i].source).row(refs[i].row);
      const auto g = dy.row(i);
      for (std::size_t j = 0; j < d; ++j) dst[j] += g[j];
    }
  });
}

Var lstm(Tape& t, Var inputs, Var wx, Var wh, Var b, bool reverse) {
  const Tensor& X = t.value(inputs);
  const Tensor& Wx = t.value(wx);
  const Tensor& Wh = t.value(wh);
  const Tensor& B = t.value(b);
  const std::size_t h = Wh.cols();
  require(X.rank() == 2 && X.rows() >= 1, "lstm: inputs must be a non-empty matrix");
  require(Wx.rank() == 2 && Wx.rows() == 4 * h && Wx.cols() == X.cols(), "lstm: wx shape");
  require(Wh.rank() == 2 && Wh.rows() == 4 * h, "lstm: wh shape");
  require(B.size() == 4 * h, "lstm: bias shape");

  auto cache = std::make_shared<LstmCache>(lstm_forward_cached(X, Wx, Wh, B, reverse));
  Tensor out = cache->hidden;
  Var self{t.size()};
  return t.push(std::move(out), [=](Tape& tp) {
    const Tensor dH = tp.grad(self);
    lstm_backward(*cache, tp.value(inputs), tp.value(wx), tp.value(wh), dH, tp.grad(inputs),
                  tp.grad(wx), tp.grad(wh), tp.grad(b));
  });
}

Var softmax_cross_entropy(Tape& t, Var logits, std::span<const double> target) {
  const auto res = softmax_cross_entropy(t.value(logits).data(), target);
  auto gradient = std::make_shared<std::vector<double>>(res.gradient);
  Var self{t.size()};
  return t.push(Tensor::vector({res.loss}), [=](Tape& tp) {
    const double g = tp.grad(self)[0];
    Tensor& d = tp.grad(logits);
    for (std::size_t i = 0; i < gradient->size(); ++i) d[i] += g * (*gradient)[i];
  });
}

Var sigmoid_bce(Tape& t, Var logit, double target) {
  const Tensor& z = t.value(logit);
  require(z.size() == 1, "sigmoid_bce: logit must be scalar");
  const double x = z[0];
  const double softplus = std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
  const double loss = softplus - target * x;
  const double dz = sigmoid(x) - target;
  Var self{t.size()};
  return t.push(Tensor::vector({loss}), [=](Tape& tp) {
    tp.grad(logit)[0] += tp.grad(self)[0] * dz;
  });
}

}  // namespace temprel::nn
