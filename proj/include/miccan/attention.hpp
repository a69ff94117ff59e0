#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "miccan/feature_map.hpp"

namespace miccan {

/// Channel-attention gate parameters for one stage with C channels and
/// bottleneck C/r: w1 is (C/r)×C, w2 is C×(C/r), both applied as 1×1
/// convolutions to the pooled channel vector.
struct GateWeights {
  std::span<const double> w1;
  std::span<const double> b1;
  std::span<const double> w2;
  std::span<const double> b2;
};

struct GateGradients {
  std::span<double> w1;
  std::span<double> b1;
  std::span<double> w2;
  std::span<double> b2;
};

/// Intermediate values kept for the backward pass.
struct GateTape {
  std::vector<double> pooled;      ///< z
  std::vector<double> hidden_pre;  ///< W1 z + b1
  std::vector<double> gate;        ///< s
  bool forced = false;
};

std::size_t gate_parameter_count(std::size_t channels, std::size_t reduction_ratio);

/// Global average pooling: z_c = mean of channel c.
std::vector<double> channel_squeeze(const FeatureMapStack& f);

/// out_c = s_c · f_c, s = sigmoid(W2 relu(W1 z + b1) + b2).
/// `forced_gate` replaces s by a constant (ablation hook); the weights are then ignored.
FeatureMapStack channel_gate(const FeatureMapStack& f, std::size_t reduction_ratio, const GateWeights& weights,
                             GateTape* tape = nullptr, std::optional<double> forced_gate = std::nullopt);

/// Accumulates parameter gradients and returns d loss / d f.
FeatureMapStack channel_gate_backward(const FeatureMapStack& f, const GateWeights& weights, const GateTape& tape,
                                      const FeatureMapStack& grad_out, const GateGradients& grads);

}  // namespace miccan
