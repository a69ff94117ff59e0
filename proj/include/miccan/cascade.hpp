#pragma once

#include <vector>

#include "miccan/complex_image.hpp"
#include "miccan/mask.hpp"
#include "miccan/model_config.hpp"
#include "miccan/parameters.hpp"
#include "miccan/uca.hpp"

namespace miccan {

/// Values retained by a cascade forward pass for backpropagation.
struct CascadeTape {
  SamplingMask mask;
  std::vector<ComplexImage> block_inputs;  ///< x_{n-1}^dc for n = 1..N
  std::vector<UcaTape> blocks;
};

/// N reconstruction blocks interleaved with data-consistency layers:
///   x_n = UCA_n(x_{n-1}^dc) + x_{n-1}^dc,   x_n^dc = DC(x_n),
/// with the last residual taken from the zero-filled image when the long
/// skip is enabled.
class CascadeModel {
 public:
  /// Builds the architecture and initialises parameters from cfg.init_seed.
  explicit CascadeModel(const ModelConfig& cfg);
  /// Adopts an existing parameter set; names and shapes must match cfg exactly.
  CascadeModel(const ModelConfig& cfg, ParameterSet params);

  const ModelConfig& config() const noexcept { return cfg_; }
  const ParameterSet& parameters() const noexcept { return params_; }
  ParameterSet& parameters() noexcept { return params_; }

  ComplexImage forward(const KSpaceData& y, const SamplingMask& mask, CascadeTape* tape = nullptr,
                       const ForwardOptions& opts = {}) const;

  /// Backpropagates d loss / d output. Parameter gradients are accumulated
  /// into `grads`; when grad_y is non-null it receives d loss / d y.
  void backward(const CascadeTape& tape, const ComplexImage& grad_out, GradientSet& grads,
                KSpaceData* grad_y = nullptr) const;

  /// Residual of block `block` for a complex input image.
  ComplexImage block_residual(std::size_t block, const ComplexImage& x, const ForwardOptions& opts = {}) const;
  const UcaBlock& block(std::size_t n) const { return blocks_.at(n); }

 private:
  void check_inputs(const KSpaceData& y, const SamplingMask& mask) const;

  ModelConfig cfg_;
  ParameterSet params_;
  std::vector<UcaBlock> blocks_;
};

/// Free-function form of CascadeModel::forward.
ComplexImage cascade_forward(const KSpaceData& y, const SamplingMask& mask, const CascadeModel& model);

/// Residual produced by a single UCA block on a complex image.
ComplexImage uca_forward(const ComplexImage& x_in, const CascadeModel& model, std::size_t block = 0);

/// Closed-form count of attention-gate parameters in a configuration.
std::size_t attention_parameter_count(const ModelConfig& cfg);

}  // namespace miccan
