#include "miccan/cascade.hpp"

#include "miccan/data_consistency.hpp"
#include "miccan/fourier.hpp"
#include "miccan/sampling.hpp"

namespace miccan {
namespace {

std::string block_prefix(std::size_t n) { return "block" + std::to_string(n) + "."; }

}  // namespace

CascadeModel::CascadeModel(const ModelConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  for (std::size_t n = 0; n < cfg_.n_blocks_N; ++n) blocks_.emplace_back(cfg_, params_, block_prefix(n));
  Rng rng(cfg_.init_seed);
  for (const auto& b : blocks_) b.initialize(params_, rng);
}

CascadeModel::CascadeModel(const ModelConfig& cfg, ParameterSet params) : cfg_(cfg) {
  cfg_.validate();
  for (std::size_t n = 0; n < cfg_.n_blocks_N; ++n) blocks_.emplace_back(cfg_, params_, block_prefix(n));
  if (params.size() != params_.size())
    throw InvalidConfig("parameter set has " + std::to_string(params.size()) + " arrays, configuration expects " +
                       std::to_string(params_.size()));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params[i].name != params_[i].name || params[i].dims != params_[i].dims)
      throw InvalidConfig("parameter '" + params[i].name + "' does not match configuration (expected '" +
                         params_[i].name + "')");
  }
  params_ = std::move(params);
}

void CascadeModel::check_inputs(const KSpaceData& y, const SamplingMask& mask) const {
  if (y.height() != mask.height() || y.width() != mask.width())
    throw InvalidInput("measurement and mask shapes differ");
  cfg_.check_image_size(y.height(), y.width());
}

ComplexImage CascadeModel::forward(const KSpaceData& y, const SamplingMask& mask, CascadeTape* tape,
                                   const ForwardOptions& opts) const {
  check_inputs(y, mask);
  const std::size_t n_blocks = blocks_.size();
  if (tape) {
    tape->mask = mask;
    tape->block_inputs.clear();
    tape->blocks.assign(n_blocks, {});
  }
  const ComplexImage x0 = zero_fill(y);
  ComplexImage a = x0;
  for (std::size_t n = 0; n < n_blocks; ++n) {
    const FeatureMapStack r =
        blocks_[n].forward(params_, to_channels(a), tape ? &tape->blocks[n] : nullptr, opts);
    const bool long_skip = cfg_.use_long_skip && n + 1 == n_blocks;
    ComplexImage x = from_channels(r);
    x += long_skip ? x0 : a;
    if (tape) tape->block_inputs.push_back(std::move(a));
    a = data_consistency(x, y, mask, cfg_.dc);
  }
  return a;
}

void CascadeModel::backward(const CascadeTape& tape, const ComplexImage& grad_out, GradientSet& grads,
                            KSpaceData* grad_y) const {
  const std::size_t n_blocks = blocks_.size();
  if (tape.blocks.size() != n_blocks || tape.block_inputs.size() != n_blocks)
    throw InvalidInput("cascade tape does not match the model");
  if (grads.size() != params_.size()) throw InvalidInput("gradient set does not match the model");

  const std::size_t h = grad_out.height(), w = grad_out.width();
  ComplexImage g = grad_out;
  ComplexImage g_x0(h, w);
  if (grad_y) *grad_y = KSpaceData(h, w);

  for (std::size_t n = n_blocks; n-- > 0;) {
    if (grad_y) *grad_y += data_consistency_measurement_vjp(g, tape.mask, cfg_.dc);
    const ComplexImage g_x = data_consistency_jacobian(g, tape.mask, cfg_.dc);
    ComplexImage g_prev = from_channels(blocks_[n].backward(params_, tape.blocks[n], to_channels(g_x), grads));
    if (cfg_.use_long_skip && n + 1 == n_blocks)
      g_x0 += g_x;
    else
      g_prev += g_x;
    g = std::move(g_prev);
  }
  g_x0 += g;
  if (grad_y) *grad_y += fft2c(g_x0);
}

ComplexImage CascadeModel::block_residual(std::size_t block, const ComplexImage& x, const ForwardOptions& opts) const {
  cfg_.check_image_size(x.height(), x.width());
  return from_channels(blocks_.at(block).forward(params_, to_channels(x), nullptr, opts));
}

ComplexImage cascade_forward(const KSpaceData& y, const SamplingMask& mask, const CascadeModel& model) {
  return model.forward(y, mask);
}

ComplexImage uca_forward(const ComplexImage& x_in, const CascadeModel& model, std::size_t block) {
  return model.block_residual(block, x_in);
}

std::size_t attention_parameter_count(const ModelConfig& cfg) {
  if (!cfg.use_attention) return 0;
  std::size_t per_block = 0;
  for (std::size_t s = 0; s < cfg.encoder_depth; ++s)
    per_block += gate_parameter_count(cfg.channels_at(s), cfg.reduction_ratio_r);
  return per_block * cfg.n_blocks_N;
}

}  // namespace miccan
