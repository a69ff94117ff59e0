#include "miccan/attention.hpp"

#include <cmath>

namespace miccan {
namespace {

double sigmoid(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

std::size_t hidden_width(std::size_t channels, std::size_t r) {
  if (r == 0 || channels % r != 0)
    throw InvalidConfig("channel count " + std::to_string(channels) + " is not divisible by reduction ratio " +
                        std::to_string(r));
  return channels / r;
}

void check_weights(std::size_t c, std::size_t hidden, const GateWeights& w) {
  if (w.w1.size() != hidden * c || w.b1.size() != hidden || w.w2.size() != c * hidden || w.b2.size() != c)
    throw InvalidConfig("channel gate parameter dimensions do not match C=" + std::to_string(c) +
                        ", C/r=" + std::to_string(hidden));
}

}  // namespace

std::size_t gate_parameter_count(std::size_t channels, std::size_t reduction_ratio) {
  const std::size_t h = hidden_width(channels, reduction_ratio);
  return channels * h + h + h * channels + channels;
}

std::vector<double> channel_squeeze(const FeatureMapStack& f) {
  std::vector<double> z(f.channels, 0.0);
  const double inv = 1.0 / static_cast<double>(f.plane());
  for (std::size_t c = 0; c < f.channels; ++c) {
    double acc = 0.0;
    for (double v : f.channel(c)) acc += v;
    z[c] = acc * inv;
  }
  return z;
}

FeatureMapStack channel_gate(const FeatureMapStack& f, std::size_t reduction_ratio, const GateWeights& weights,
                             GateTape* tape, std::optional<double> forced_gate) {
  const std::size_t c = f.channels;
  const std::size_t hidden = hidden_width(c, reduction_ratio);
  GateTape local;
  GateTape& t = tape ? *tape : local;
  t.forced = forced_gate.has_value();

  if (forced_gate) {
    t.gate.assign(c, *forced_gate);
  } else {
    check_weights(c, hidden, weights);
    t.pooled = channel_squeeze(f);
    t.hidden_pre.assign(hidden, 0.0);
    for (std::size_t h = 0; h < hidden; ++h) {
      double acc = weights.b1[h];
      for (std::size_t k = 0; k < c; ++k) acc += weights.w1[h * c + k] * t.pooled[k];
      t.hidden_pre[h] = acc;
    }
    t.gate.assign(c, 0.0);
    for (std::size_t k = 0; k < c; ++k) {
      double acc = weights.b2[k];
      for (std::size_t h = 0; h < hidden; ++h) acc += weights.w2[k * hidden + h] * std::max(t.hidden_pre[h], 0.0);
      t.gate[k] = sigmoid(acc);
    }
  }

  FeatureMapStack out(c, f.height, f.width);
  for (std::size_t k = 0; k < c; ++k) {
    const auto src = f.channel(k);
    auto dst = out.channel(k);
    for (std::size_t p = 0; p < src.size(); ++p) dst[p] = t.gate[k] * src[p];
  }
  return out;
}

FeatureMapStack channel_gate_backward(const FeatureMapStack& f, const GateWeights& weights, const GateTape& tape,
                                      const FeatureMapStack& grad_out, const GateGradients& grads) {
  if (!f.same_shape(grad_out)) throw InvalidInput("channel gate gradient shape mismatch");
  const std::size_t c = f.channels;
  FeatureMapStack grad_in(c, f.height, f.width);
  for (std::size_t k = 0; k < c; ++k) {
    const auto g = grad_out.channel(k);
    auto gi = grad_in.channel(k);
    for (std::size_t p = 0; p < g.size(); ++p) gi[p] = tape.gate[k] * g[p];
  }
  if (tape.forced) return grad_in;

  const std::size_t hidden = tape.hidden_pre.size();
  check_weights(c, hidden, weights);

  // d loss / d pre-sigmoid
  std::vector<double> du(c, 0.0);
  for (std::size_t k = 0; k < c; ++k) {
    const auto g = grad_out.channel(k);
    const auto x = f.channel(k);
    double ds = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p) ds += g[p] * x[p];
    du[k] = ds * tape.gate[k] * (1.0 - tape.gate[k]);
  }

  std::vector<double> dh(hidden, 0.0);
  for (std::size_t k = 0; k < c; ++k) {
    grads.b2[k] += du[k];
    for (std::size_t h = 0; h < hidden; ++h) {
      grads.w2[k * hidden + h] += du[k] * std::max(tape.hidden_pre[h], 0.0);
      dh[h] += weights.w2[k * hidden + h] * du[k];
    }
  }
  std::vector<double> dz(c, 0.0);
  for (std::size_t h = 0; h < hidden; ++h) {
    if (!(tape.hidden_pre[h] > 0.0)) continue;
    grads.b1[h] += dh[h];
    for (std::size_t k = 0; k < c; ++k) {
      grads.w1[h * c + k] += dh[h] * tape.pooled[k];
      dz[k] += weights.w1[h * c + k] * dh[h];
    }
  }

  const double inv = 1.0 / static_cast<double>(f.plane());
  for (std::size_t k = 0; k < c; ++k) {
    const double add = dz[k] * inv;
    for (double& v : grad_in.channel(k)) v += add;
  }
  return grad_in;
}

}  // namespace miccan
