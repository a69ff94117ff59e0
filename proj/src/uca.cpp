#include "miccan/uca.hpp"

#include <cmath>

namespace miccan {

void ModelConfig::validate() const {
  if (n_blocks_N < 1) throw InvalidConfig("n_blocks_N must be at least 1");
  if (encoder_depth < 1) throw InvalidConfig("encoder_depth must be at least 1");
  if (base_channels < 1) throw InvalidConfig("base_channels must be at least 1");
  if (encoder_depth > 16) throw InvalidConfig("encoder_depth is unreasonably large");
  if (use_attention) {
    if (reduction_ratio_r < 1) throw InvalidConfig("reduction_ratio_r must be positive");
    for (std::size_t s = 0; s < encoder_depth; ++s)
      if (channels_at(s) % reduction_ratio_r != 0)
        throw InvalidConfig("decoder width " + std::to_string(channels_at(s)) +
                            " is not divisible by reduction_ratio_r " + std::to_string(reduction_ratio_r));
  }
  dc.validate();
}

void ModelConfig::check_image_size(std::size_t height, std::size_t width) const {
  const std::size_t f = std::size_t{1} << encoder_depth;
  if (height % f != 0 || width % f != 0)
    throw InvalidInput("image size " + std::to_string(height) + "x" + std::to_string(width) +
                       " is not divisible by 2^encoder_depth = " + std::to_string(f));
}

UcaBlock::Conv UcaBlock::add_conv(ParameterSet& params, const std::string& name, std::size_t in, std::size_t out,
                                  std::size_t kernel) {
  Conv c;
  c.shape = {in, out, kernel};
  const auto k = static_cast<std::uint32_t>(kernel);
  c.weight = params.add(name + ".weight", {static_cast<std::uint32_t>(out), static_cast<std::uint32_t>(in), k, k});
  c.bias = params.add(name + ".bias", {static_cast<std::uint32_t>(out)});
  return c;
}

UcaBlock::Stage UcaBlock::add_stage(ParameterSet& params, const std::string& name, std::size_t in, std::size_t out,
                                    std::optional<std::size_t> gate_ratio) {
  Stage st;
  st.a = add_conv(params, name + ".conv_a", in, out, 3);
  st.b = add_conv(params, name + ".conv_b", out, out, 3);
  if (gate_ratio) {
    const auto c = static_cast<std::uint32_t>(out);
    const auto h = static_cast<std::uint32_t>(out / *gate_ratio);
    Gate g;
    g.w1 = params.add(name + ".gate.w1", {h, c});
    g.b1 = params.add(name + ".gate.b1", {h});
    g.w2 = params.add(name + ".gate.w2", {c, h});
    g.b2 = params.add(name + ".gate.b2", {c});
    st.gate = g;
  }
  return st;
}

UcaBlock::UcaBlock(const ModelConfig& cfg, ParameterSet& params, const std::string& prefix)
    : reduction_ratio_(cfg.reduction_ratio_r) {
  cfg.validate();
  const std::size_t depth = cfg.encoder_depth;
  std::size_t in = 2;
  for (std::size_t s = 0; s < depth; ++s) {
    encoder_.push_back(add_stage(params, prefix + "enc" + std::to_string(s), in, cfg.channels_at(s), std::nullopt));
    in = cfg.channels_at(s);
  }
  bottleneck_ = add_stage(params, prefix + "bottleneck", in, cfg.channels_at(depth), std::nullopt);
  decoder_.resize(depth);
  const std::optional<std::size_t> ratio = cfg.use_attention ? std::optional(cfg.reduction_ratio_r) : std::nullopt;
  for (std::size_t s = depth; s-- > 0;) {
    const std::size_t cin = cfg.channels_at(s + 1) + cfg.channels_at(s);
    decoder_[s] = add_stage(params, prefix + "dec" + std::to_string(s), cin, cfg.channels_at(s), ratio);
  }
  head_ = add_conv(params, prefix + "head", cfg.channels_at(0), 2, 1);
}

void UcaBlock::initialize(ParameterSet& params, Rng& rng) const {
  auto fill = [&](std::size_t idx, double bound) {
    for (double& v : params[idx].values) v = rng.uniform(-bound, bound);
  };
  auto conv = [&](const Conv& c, double gain) {
    fill(c.weight, std::sqrt(gain / static_cast<double>(c.shape.fan_in())));
    for (double& v : params[c.bias].values) v = 0.0;
  };
  auto stage = [&](const Stage& st) {
    conv(st.a, 6.0);
    conv(st.b, 6.0);
    if (st.gate) {
      const auto c = static_cast<double>(params[st.gate->b2].values.size());
      const auto h = static_cast<double>(params[st.gate->b1].values.size());
      fill(st.gate->w1, std::sqrt(3.0 / c));
      fill(st.gate->w2, std::sqrt(3.0 / h));
      for (double& v : params[st.gate->b1].values) v = 0.0;
      for (double& v : params[st.gate->b2].values) v = 0.0;
    }
  };
  for (const auto& st : encoder_) stage(st);
  stage(bottleneck_);
  for (std::size_t s = decoder_.size(); s-- > 0;) stage(decoder_[s]);
  conv(head_, 6.0);
}

namespace {

std::span<const double> view(const ParameterSet& p, std::size_t i) { return p[i].values; }
std::span<double> view(GradientSet& g, std::size_t i) { return g[i]; }

}  // namespace

FeatureMapStack UcaBlock::stage_forward(const ParameterSet& params, const Stage& st, const FeatureMapStack& x,
                                        StageTape* tape, const ForwardOptions& opts) const {
  FeatureMapStack mid = layers::conv2d(x, view(params, st.a.weight), view(params, st.a.bias), st.a.shape);
  layers::relu_inplace(mid);
  FeatureMapStack out = layers::conv2d(mid, view(params, st.b.weight), view(params, st.b.bias), st.b.shape);
  layers::relu_inplace(out);
  FeatureMapStack gated;
  GateTape gtape;
  if (st.gate) {
    const GateWeights w{view(params, st.gate->w1), view(params, st.gate->b1), view(params, st.gate->w2),
                        view(params, st.gate->b2)};
    gated = channel_gate(out, reduction_ratio_, w, &gtape, opts.forced_gate);
  }
  if (tape) {
    tape->input = x;
    tape->mid = std::move(mid);
    tape->gated = st.gate.has_value();
    tape->gate = std::move(gtape);
    if (st.gate) {
      tape->pre_gate = std::move(out);
      return gated;
    }
    tape->pre_gate = out;
    return out;
  }
  return st.gate ? gated : out;
}

FeatureMapStack UcaBlock::stage_backward(const ParameterSet& params, const Stage& st, const StageTape& tape,
                                         FeatureMapStack grad, GradientSet& grads) const {
  if (st.gate) {
    const GateWeights w{view(params, st.gate->w1), view(params, st.gate->b1), view(params, st.gate->w2),
                        view(params, st.gate->b2)};
    const GateGradients g{view(grads, st.gate->w1), view(grads, st.gate->b1), view(grads, st.gate->w2),
                          view(grads, st.gate->b2)};
    grad = channel_gate_backward(tape.pre_gate, w, tape.gate, grad, g);
  }
  layers::relu_backward_inplace(grad, tape.pre_gate);
  FeatureMapStack g_mid = layers::conv2d_backward(tape.mid, grad, view(params, st.b.weight), st.b.shape,
                                                  view(grads, st.b.weight), view(grads, st.b.bias));
  layers::relu_backward_inplace(g_mid, tape.mid);
  return layers::conv2d_backward(tape.input, g_mid, view(params, st.a.weight), st.a.shape, view(grads, st.a.weight),
                                 view(grads, st.a.bias));
}

FeatureMapStack UcaBlock::forward(const ParameterSet& params, const FeatureMapStack& x, UcaTape* tape,
                                  const ForwardOptions& opts) const {
  if (x.channels != 2) throw InvalidInput("UCA block expects a 2-channel input");
  const std::size_t depth = encoder_.size();
  const std::size_t f = std::size_t{1} << depth;
  if (x.height % f != 0 || x.width % f != 0)
    throw InvalidInput("UCA input size must be divisible by 2^encoder_depth");

  UcaTape local;
  UcaTape& t = tape ? *tape : local;
  t.encoder.assign(depth, {});
  t.pool_argmax.assign(depth, {});
  t.decoder.assign(depth, {});

  std::vector<FeatureMapStack> skips(depth);
  FeatureMapStack cur = x;
  for (std::size_t s = 0; s < depth; ++s) {
    skips[s] = stage_forward(params, encoder_[s], cur, &t.encoder[s], opts);
    auto pooled = layers::max_pool2(skips[s]);
    t.pool_argmax[s] = std::move(pooled.argmax);
    cur = std::move(pooled.out);
  }
  cur = stage_forward(params, bottleneck_, cur, &t.bottleneck, opts);
  for (std::size_t s = depth; s-- > 0;) {
    FeatureMapStack cat = layers::concat_channels(layers::upsample2(cur), skips[s]);
    cur = stage_forward(params, decoder_[s], cat, &t.decoder[s], opts);
  }
  FeatureMapStack out = layers::conv2d(cur, view(params, head_.weight), view(params, head_.bias), head_.shape);
  t.head_input = std::move(cur);
  return out;
}

FeatureMapStack UcaBlock::backward(const ParameterSet& params, const UcaTape& tape, const FeatureMapStack& grad_out,
                                   GradientSet& grads) const {
  const std::size_t depth = encoder_.size();
  FeatureMapStack g = layers::conv2d_backward(tape.head_input, grad_out, view(params, head_.weight), head_.shape,
                                              view(grads, head_.weight), view(grads, head_.bias));
  std::vector<FeatureMapStack> g_skip(depth);
  for (std::size_t s = 0; s < depth; ++s) {
    FeatureMapStack g_cat = stage_backward(params, decoder_[s], tape.decoder[s], std::move(g), grads);
    const std::size_t up_channels = g_cat.channels - tape.encoder[s].pre_gate.channels;
    auto [g_up, g_sk] = layers::split_channels(g_cat, up_channels);
    g_skip[s] = std::move(g_sk);
    g = layers::upsample2_backward(g_up);
  }
  g = stage_backward(params, bottleneck_, tape.bottleneck, std::move(g), grads);
  for (std::size_t s = depth; s-- > 0;) {
    const auto& skip = tape.encoder[s].pre_gate;
    FeatureMapStack g_e = layers::max_pool2_backward(g, tape.pool_argmax[s], skip.height, skip.width);
    g_e += g_skip[s];
    g = stage_backward(params, encoder_[s], tape.encoder[s], std::move(g_e), grads);
  }
  return g;
}

}  // namespace miccan
