#include "temprel/layers.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace temprel::nn {

std::vector<double> softmax(std::span<const double> logits) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) z += (p[i] = std::exp(logits[i] - mx));
  for (auto& v : p) v /= z;
  return p;
}

CrossEntropy softmax_cross_entropy(std::span<const double> logits,
                                   std::span<const double> target) {
  if (logits.empty() || logits.size() != target.size())
    throw std::domain_error("cross entropy: logits/target size mismatch");
  double mass = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (!std::isfinite(logits[i])) throw std::domain_error("cross entropy: non-finite logit");
    if (!(target[i] >= 0.0)) throw std::domain_error("cross entropy: negative target mass");
    mass += target[i];
  }
  if (std::abs(mass - 1.0) > 1e-9) throw std::domain_error("cross entropy: target must sum to 1");

  const double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double l : logits) z += std::exp(l - mx);
  const double log_z = mx + std::log(z);
  CrossEntropy out;
  out.gradient.resize(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double log_p = logits[i] - log_z;
    if (target[i] > 0.0) out.loss -= target[i] * log_p;
    out.gradient[i] = std::exp(log_p) - target[i];
  }
  return out;
}

CrossEntropy softmax_cross_entropy(std::span<const double> logits, std::size_t target_index) {
  if (target_index >= logits.size()) throw std::domain_error("cross entropy: target out of range");
  std::vector<double> target(logits.size(), 0.0);
  target[target_index] = 1.0;
  return softmax_cross_entropy(logits, target);
}

void init_uniform(Parameter& p, std::size_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(fan_in, 1)));
  for (auto& v : p.value.data()) v = rng.uniform(-bound, bound);
  p.grad.fill(0.0);
}

LstmCache lstm_forward_cached(const Tensor& X, const Tensor& Wx, const Tensor& Wh,
                              const Tensor& B, bool reverse) {
  const std::size_t T = X.rows(), d = X.cols(), h = Wh.cols(), G = 4 * h;
  LstmCache c;
  c.reverse = reverse;
  c.hidden = Tensor({T, h});
  c.cell = Tensor({T, h});
  c.gates = Tensor({T, G});
  std::vector<double> z(G), h_prev(h, 0.0), c_prev(h, 0.0);
  for (std::size_t s = 0; s < T; ++s) {
    const std::size_t t = reverse ? T - 1 - s : s;
    const auto x = X.row(t);
    for (std::size_t g = 0; g < G; ++g) {
      double acc = B[g];
      const auto wxr = Wx.row(g);
      for (std::size_t i = 0; i < d; ++i) acc += wxr[i] * x[i];
      const auto whr = Wh.row(g);
      for (std::size_t i = 0; i < h; ++i) acc += whr[i] * h_prev[i];
      z[g] = acc;
    }
    auto gates = c.gates.row(t);
    auto hid = c.hidden.row(t);
    auto cel = c.cell.row(t);
    for (std::size_t k = 0; k < h; ++k) {
      const double ig = sigmoid(z[k]);
      const double fg = sigmoid(z[h + k]);
      const double gg = std::tanh(z[2 * h + k]);
      const double og = sigmoid(z[3 * h + k]);
      gates[k] = ig;
      gates[h + k] = fg;
      gates[2 * h + k] = gg;
      gates[3 * h + k] = og;
      cel[k] = fg * c_prev[k] + ig * gg;
      hid[k] = og * std::tanh(cel[k]);
    }
    std::copy(hid.begin(), hid.end(), h_prev.begin());
    std::copy(cel.begin(), cel.end(), c_prev.begin());
  }
  return c;
}

void lstm_backward(const LstmCache& c, const Tensor& X, const Tensor& Wx, const Tensor& Wh,
                   const Tensor& dH, Tensor& dX, Tensor& dWx, Tensor& dWh, Tensor& dB) {
  const std::size_t T = X.rows(), d = X.cols(), h = Wh.cols(), G = 4 * h;
  std::vector<double> dh_next(h, 0.0), dc_next(h, 0.0), dz(G), zeros(h, 0.0);
  for (std::size_t s = T; s-- > 0;) {
    const std::size_t t = c.reverse ? T - 1 - s : s;
    const bool first = (s == 0);
    const std::size_t prev = c.reverse ? t + 1 : t - 1;  // valid only when !first
    const std::span<const double> h_prev = first ? std::span<const double>(zeros) : c.hidden.row(prev);
    const std::span<const double> c_prev = first ? std::span<const double>(zeros) : c.cell.row(prev);
    const auto gates = c.gates.row(t);
    const auto cel = c.cell.row(t);
    const auto dht = dH.row(t);
    for (std::size_t k = 0; k < h; ++k) {
      const double ig = gates[k], fg = gates[h + k], gg = gates[2 * h + k], og = gates[3 * h + k];
      const double tc = std::tanh(cel[k]);
      const double dh = dht[k] + dh_next[k];
      const double dc = dh * og * (1.0 - tc * tc) + dc_next[k];
      dz[k] = dc * gg * ig * (1.0 - ig);
      dz[h + k] = dc * c_prev[k] * fg * (1.0 - fg);
      dz[2 * h + k] = dc * ig * (1.0 - gg * gg);
      dz[3 * h + k] = dh * tc * og * (1.0 - og);
      dc_next[k] = dc * fg;
    }
    const auto x = X.row(t);
    auto dx = dX.row(t);
    std::fill(dh_next.begin(), dh_next.end(), 0.0);
    for (std::size_t g = 0; g < G; ++g) {
      const double dzg = dz[g];
      dB[g] += dzg;
      auto dwx = dWx.row(g);
      const auto wxr = Wx.row(g);
      for (std::size_t i = 0; i < d; ++i) {
        dwx[i] += dzg * x[i];
        dx[i] += wxr[i] * dzg;
      }
      auto dwh = dWh.row(g);
      const auto whr = Wh.row(g);
      for (std::size_t i = 0; i < h; ++i) {
        dwh[i] += dzg * h_prev[i];
        dh_next[i] += whr[i] * dzg;
      }
    }
  }
}

LstmParams::LstmParams(const std::string& prefix, std::size_t input_dim, std::size_t hidden)
    : wx(prefix + ".wx", {4 * hidden, input_dim}),
      wh(prefix + ".wh", {4 * hidden, hidden}),
      b(prefix + ".b", {4 * hidden}) {}

void LstmParams::init(Rng& rng) {
  const std::size_t fan_in = input_dim() + hidden();
  init_uniform(wx, fan_in, rng);
  init_uniform(wh, fan_in, rng);
  init_uniform(b, fan_in, rng);
}

Var LstmParams::forward(Tape& t, Var inputs, bool reverse) {
  return lstm(t, inputs, t.parameter(wx), t.parameter(wh), t.parameter(b), reverse);
}

Tensor lstm_forward(const LstmParams& p, const Tensor& inputs, bool reverse) {
  const std::size_t h = p.wh.value.cols();
  if (inputs.rank() != 2 || inputs.rows() == 0 || inputs.cols() != p.wx.value.cols() ||
      p.wx.value.rows() != 4 * h || p.wh.value.rows() != 4 * h || p.b.value.size() != 4 * h)
    throw std::invalid_argument("lstm_forward: shape mismatch (inputs " + inputs.shape_string() +
                                ", wx " + p.wx.value.shape_string() + ")");
  return lstm_forward_cached(inputs, p.wx.value, p.wh.value, p.b.value, reverse).hidden;
}

Ffnn::Ffnn(const std::string& prefix, std::size_t input, std::size_t hidden, std::size_t output)
    : w1(prefix + ".w1", {hidden, input}),
      b1(prefix + ".b1", {hidden}),
      w2(prefix + ".w2", {output, hidden}),
      b2(prefix + ".b2", {output}) {}

void Ffnn::init(Rng& rng) {
  init_uniform(w1, w1.value.cols(), rng);
  init_uniform(b1, w1.value.cols(), rng);
  init_uniform(w2, w2.value.cols(), rng);
  init_uniform(b2, w2.value.cols(), rng);
}

Var Ffnn::forward(Tape& t, Var x) {
  Var hidden = tanh(t, linear(t, x, t.parameter(w1), t.parameter(b1)));
  return linear(t, hidden, t.parameter(w2), t.parameter(b2));
}

std::vector<double> ffnn_forward(const Ffnn& net, std::span<const double> input) {
  const Tensor& W1 = net.w1.value;
  const Tensor& W2 = net.w2.value;
  if (input.size() != W1.cols() || net.b1.value.size() != W1.rows() ||
      W2.cols() != W1.rows() || net.b2.value.size() != W2.rows())
    throw std::invalid_argument("ffnn_forward: shape mismatch");
  std::vector<double> hidden(W1.rows());
  for (std::size_t o = 0; o < W1.rows(); ++o) {
    const auto r = W1.row(o);
    hidden[o] = std::tanh(std::inner_product(r.begin(), r.end(), input.begin(), net.b1.value[o]));
  }
  std::vector<double> out(W2.rows());
  for (std::size_t o = 0; o < W2.rows(); ++o) {
    const auto r = W2.row(o);
    out[o] = std::inner_product(r.begin(), r.end(), hidden.begin(), net.b2.value[o]);
  }
  return out;
}

}  // namespace temprel::nn
