#include "temprel/optim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace temprel::nn {

double step_lr(const TrainConfig& config, int epoch) {
  if (epoch < 0) throw std::invalid_argument("step_lr: negative epoch");
  const int period = std::max(config.lr_period, 1);
  return config.base_lr * std::pow(config.lr_decay, epoch / period);
}

void Adam::step(std::span<Parameter* const> params, double lr) {
  if (m_.empty()) {
    for (const Parameter* p : params) {
      m_.emplace_back(p->value.shape());
      v_.emplace_back(p->value.shape());
    }
  }
  if (m_.size() != params.size()) throw std::invalid_argument("Adam: parameter list changed");
  ++t_;
  const double bc1 = 1.0 - std::pow(opt_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(opt_.beta2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto value = params[k]->value.data();
    const auto grad = params[k]->grad.data();
    auto m = m_[k].data();
    auto v = v_[k].data();
    for (std::size_t i = 0; i < value.size(); ++i) {
      m[i] = opt_.beta1 * m[i] + (1.0 - opt_.beta1) * grad[i];
      v[i] = opt_.beta2 * v[i] + (1.0 - opt_.beta2) * grad[i] * grad[i];
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      value[i] -= lr * m_hat / (std::sqrt(v_hat) + opt_.eps);
    }
  }
}

void zero_grad(std::span<Parameter* const> params) {
  for (Parameter* p : params) p->grad.fill(0.0);
}

double grad_norm(std::span<Parameter* const> params) {
  double sq = 0.0;
  for (const Parameter* p : params)
    for (double g : p->grad.data()) sq += g * g;
  return std::sqrt(sq);
}

double clip_grad_norm(std::span<Parameter* const> params, double max_norm) {
  const double norm = grad_norm(params);
  if (max_norm > 0.0 && norm > max_norm) {
    const double s = max_norm / norm;
    for (Parameter* p : params)
      for (double& g : p->grad.data()) g *= s;
  }
  return norm;
}

double grad_check(const LossFunction& loss, std::span<Parameter* const> params, double eps) {
  zero_grad(params);
  loss(true);
  std::vector<Tensor> analytic;
  for (const Parameter* p : params) analytic.push_back(p->grad);

  double worst = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto value = params[k]->value.data();
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double saved = value[i];
      value[i] = saved + eps;
      const double up = loss(false);
      value[i] = saved - eps;
      const double down = loss(false);
      value[i] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double a = analytic[k][i];
      const double rel = std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
      worst = std::max(worst, rel);
    }
  }
  zero_grad(params);
  return worst;
}

}  // namespace temprel::nn
