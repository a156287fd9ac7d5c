#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "temprel/rng.hpp"
#include "temprel/tape.hpp"
#include "temprel/tensor.hpp"

namespace temprel::nn {

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// Max-shifted softmax.
std::vector<double> softmax(std::span<const double> logits);

struct CrossEntropy {
  double loss = 0.0;
  std::vector<double> gradient;  // d loss / d logits = softmax - target
};

/// Throws std::domain_error on non-finite logits or a target that is not a
/// distribution over the logits.
CrossEntropy softmax_cross_entropy(std::span<const double> logits, std::span<const double> target);
CrossEntropy softmax_cross_entropy(std::span<const double> logits, std::size_t target_index);

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)).
void init_uniform(Parameter& p, std::size_t fan_in, Rng& rng);

// LSTM kernels shared by the tape op and the plain forward pass.
struct LstmCache {
  bool reverse = false;
  Tensor hidden;  // [T x h], realigned to input order
  Tensor cell;    // [T x h]
  Tensor gates;   // [T x 4h], post-activation (i, f, g, o)
};
LstmCache lstm_forward_cached(const Tensor& inputs, const Tensor& wx, const Tensor& wh,
                              const Tensor& b, bool reverse);
void lstm_backward(const LstmCache& cache, const Tensor& inputs, const Tensor& wx,
                   const Tensor& wh, const Tensor& d_hidden, Tensor& d_inputs, Tensor& d_wx,
                   Tensor& d_wh, Tensor& d_b);

struct LstmParams {
  Parameter wx, wh, b;

  LstmParams() = default;
  LstmParams(const std::string& prefix, std::size_t input_dim, std::size_t hidden);
  std::size_t hidden() const { return wh.value.cols(); }
  std::size_t input_dim() const { return wx.value.cols(); }
  void init(Rng& rng);
  std::vector<Parameter*> parameters() { return {&wx, &wh, &b}; }

  Var forward(Tape& t, Var inputs, bool reverse);
};

/// Plain (tape-free) LSTM pass: [T x d] -> [T x h]. Throws on shape mismatch.
Tensor lstm_forward(const LstmParams& params, const Tensor& inputs, bool reverse);

/// One tanh hidden layer followed by a linear output layer.
struct Ffnn {
  Parameter w1, b1, w2, b2;

  Ffnn() = default;
  Ffnn(const std::string& prefix, std::size_t input, std::size_t hidden, std::size_t output);
  std::size_t input_dim() const { return w1.value.cols(); }
  std::size_t output_dim() const { return w2.value.rows(); }
  void init(Rng& rng);
  std::vector<Parameter*> parameters() { return {&w1, &b1, &w2, &b2}; }

  Var forward(Tape& t, Var x);
};

std::vector<double> ffnn_forward(const Ffnn& net, std::span<const double> input);

}  // namespace temprel::nn
