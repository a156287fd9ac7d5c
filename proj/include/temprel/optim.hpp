#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "temprel/tensor.hpp"

namespace temprel::nn {

struct TrainConfig {
  double base_lr = 1e-3;
  int epochs = 20;
  int batch_size = 16;
  std::uint64_t seed = 1;
  double lr_decay = 0.5;
  int lr_period = 10;
  double clip_norm = 5.0;  // <= 0 disables clipping
};

/// Step decay: base_lr * decay^floor(epoch / period), epoch 0-based.
double step_lr(const TrainConfig& config, int epoch);

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with bias correction. Moments are bound to the parameter order given
/// at the first step.
class Adam {
 public:
  explicit Adam(AdamOptions options = {}) : opt_(options) {}

  void step(std::span<Parameter* const> params, double lr);
  std::int64_t steps() const { return t_; }
  const std::vector<Tensor>& first_moments() const { return m_; }
  const std::vector<Tensor>& second_moments() const { return v_; }

 private:
  AdamOptions opt_;
  std::int64_t t_ = 0;
  std::vector<Tensor> m_, v_;
};

void zero_grad(std::span<Parameter* const> params);
double grad_norm(std::span<Parameter* const> params);
/// Rescales gradients so their global L2 norm is at most max_norm. Returns
/// the norm before clipping.
double clip_grad_norm(std::span<Parameter* const> params, double max_norm);

/// Evaluates the loss at the current parameter values. With `with_grad`
/// set, the function must also accumulate d(loss)/d(param) into the
/// parameters' gradients (which grad_check zeroes beforehand).
using LossFunction = std::function<double(bool with_grad)>;

/// Max over all components of |analytic - numeric| / max(1e-8, |analytic| + |numeric|)
/// using central differences of width 2*eps.
double grad_check(const LossFunction& loss, std::span<Parameter* const> params,
                  double eps = 1e-5);

}  // namespace temprel::nn
