#pragma once

#include <optional>
#include <string>
#include <vector>

#include "miccan/attention.hpp"
#include "miccan/feature_map.hpp"
#include "miccan/layers.hpp"
#include "miccan/model_config.hpp"
#include "miccan/parameters.hpp"
#include "miccan/rng.hpp"

namespace miccan {

struct ForwardOptions {
  /// Replace every attention gate by this constant (ablation/analysis hook).
  std::optional<double> forced_gate;
};

struct StageTape {
  FeatureMapStack input;
  FeatureMapStack mid;       ///< after the first conv + ReLU
  FeatureMapStack pre_gate;  ///< after the second conv + ReLU
  GateTape gate;
  bool gated = false;
};

struct UcaTape {
  std::vector<StageTape> encoder;
  std::vector<std::vector<std::uint32_t>> pool_argmax;
  StageTape bottleneck;
  std::vector<StageTape> decoder;  ///< indexed by scale
  FeatureMapStack head_input;
};

/// U-net block with channel attention after each decoder stage.
///
/// Parameters live in an external ParameterSet so that a whole cascade shares
/// one container; the block only records indices into it.
class UcaBlock {
 public:
  UcaBlock(const ModelConfig& cfg, ParameterSet& params, const std::string& prefix);

  /// Fan-in scaled uniform initialisation of this block's arrays.
  void initialize(ParameterSet& params, Rng& rng) const;

  /// 2-channel input → 2-channel residual of the same spatial size.
  FeatureMapStack forward(const ParameterSet& params, const FeatureMapStack& x, UcaTape* tape = nullptr,
                          const ForwardOptions& opts = {}) const;
  /// Accumulates parameter gradients and returns d loss / d input.
  FeatureMapStack backward(const ParameterSet& params, const UcaTape& tape, const FeatureMapStack& grad_out,
                           GradientSet& grads) const;

 private:
  struct Conv {
    std::size_t weight = 0;
    std::size_t bias = 0;
    layers::ConvShape shape;
  };
  struct Gate {
    std::size_t w1 = 0, b1 = 0, w2 = 0, b2 = 0;
  };
  struct Stage {
    Conv a;
    Conv b;
    std::optional<Gate> gate;
  };

  static Conv add_conv(ParameterSet& params, const std::string& name, std::size_t in, std::size_t out,
                       std::size_t kernel);
  static Stage add_stage(ParameterSet& params, const std::string& name, std::size_t in, std::size_t out,
                         std::optional<std::size_t> gate_ratio);

  FeatureMapStack stage_forward(const ParameterSet& params, const Stage& st, const FeatureMapStack& x,
                                StageTape* tape, const ForwardOptions& opts) const;
  FeatureMapStack stage_backward(const ParameterSet& params, const Stage& st, const StageTape& tape,
                                 FeatureMapStack grad, GradientSet& grads) const;

  std::size_t reduction_ratio_;
  std::vector<Stage> encoder_;
  Stage bottleneck_;
  std::vector<Stage> decoder_;
  Conv head_;
};

}  // namespace miccan
