#include "miccan/losses.hpp"

#include <cmath>

#include "miccan/rng.hpp"

namespace miccan {

namespace {

void check_pair(const ComplexImage& x, const ComplexImage& x_s) {
  if (!x.same_shape(x_s)) throw InvalidInput("loss operands differ in shape");
}

FeatureMapStack as_stack(const RealImage& image) {
  FeatureMapStack f(1, image.height, image.width);
  f.values = image.values;
  return f;
}

}  // namespace

// --- extractors -----------------------------------------------------------

std::vector<FeatureMapStack> IdentityExtractor::extract(const RealImage& image, std::size_t layers) const {
  if (layers != 1) throw InvalidConfig("identity extractor provides exactly one feature layer");
  return {as_stack(image)};
}

RealImage IdentityExtractor::backward(const RealImage& image, std::span<const FeatureMapStack> feature_grads) const {
  if (feature_grads.size() != 1) throw InvalidConfig("identity extractor provides exactly one feature layer");
  RealImage g(image.height, image.width);
  g.values = feature_grads[0].values;
  return g;
}

std::vector<ConvPyramidExtractor::Layer> ConvPyramidExtractor::topology() {
  return {
      {"conv1_1", {1, 8, 3}, false, false},   {"conv1_2", {8, 8, 3}, false, true},
      {"conv2_1", {8, 16, 3}, true, true},    {"conv2_2", {16, 16, 3}, false, true},
      {"conv3_1", {16, 16, 3}, true, true},
  };
}

ConvPyramidExtractor::ConvPyramidExtractor(std::uint64_t seed) : layers_(topology()) {
  Rng rng(seed);
  for (const auto& l : layers_) {
    const auto k = static_cast<std::uint32_t>(l.shape.kernel);
    const std::size_t w = params_.add(std::string(kParameterPrefix) + l.name + ".weight",
                                      {static_cast<std::uint32_t>(l.shape.out_channels),
                                       static_cast<std::uint32_t>(l.shape.in_channels), k, k});
    const double bound = std::sqrt(6.0 / static_cast<double>(l.shape.fan_in()));
    for (double& v : params_[w].values) v = rng.uniform(-bound, bound);
    params_.add(std::string(kParameterPrefix) + l.name + ".bias", {static_cast<std::uint32_t>(l.shape.out_channels)});
  }
  id_ = "pyramid:" + std::to_string(seed);
}

ConvPyramidExtractor::ConvPyramidExtractor(ParameterSet params, std::string id)
    : layers_(topology()), params_(std::move(params)), id_(std::move(id)) {}

ConvPyramidExtractor ConvPyramidExtractor::from_parameters(const ParameterSet& params) {
  ParameterSet own;
  for (const auto& l : topology()) {
    for (const char* suffix : {".weight", ".bias"}) {
      const std::string name = std::string(kParameterPrefix) + l.name + suffix;
      if (!params.contains(name)) throw InvalidInput("extractor parameter '" + name + "' missing");
      const NamedArray& a = params[params.index_of(name)];
      const std::size_t expected = suffix[1] == 'w' ? l.shape.weight_count() : l.shape.out_channels;
      if (a.values.size() != expected) throw InvalidInput("extractor parameter '" + name + "' has the wrong size");
      own.add(a);
    }
  }
  return ConvPyramidExtractor(std::move(own), "pyramid:imported");
}

void ConvPyramidExtractor::check_resolution(std::size_t height, std::size_t width) const {
  if (height < 4 || width < 4 || height % 4 != 0 || width % 4 != 0)
    throw InvalidInput("pyramid extractor needs image sides divisible by 4, got " + std::to_string(height) + "x" +
                       std::to_string(width));
}

std::vector<FeatureMapStack> ConvPyramidExtractor::extract(const RealImage& image, std::size_t layers) const {
  if (layers < 1 || layers > layer_count()) throw InvalidConfig("feature_layers_K out of range for extractor");
  check_resolution(image.height, image.width);
  std::vector<FeatureMapStack> taps;
  FeatureMapStack cur = as_stack(image);
  for (std::size_t l = 0; l < layers_.size() && taps.size() < layers; ++l) {
    const auto& layer = layers_[l];
    if (layer.pool_before) cur = layers::avg_pool2(cur);
    cur = layers::conv2d(cur, params_[2 * l].values, params_[2 * l + 1].values, layer.shape);
    layers::relu_inplace(cur);
    if (layer.tap) taps.push_back(cur);
  }
  return taps;
}

RealImage ConvPyramidExtractor::backward(const RealImage& image, std::span<const FeatureMapStack> feature_grads) const {
  const std::size_t k = feature_grads.size();
  if (k < 1 || k > layer_count()) throw InvalidConfig("feature_layers_K out of range for extractor");
  check_resolution(image.height, image.width);

  std::vector<FeatureMapStack> inputs;
  std::vector<FeatureMapStack> outputs;
  std::size_t n_layers = 0;
  {
    FeatureMapStack cur = as_stack(image);
    std::size_t taps = 0;
    for (std::size_t l = 0; l < layers_.size() && taps < k; ++l, ++n_layers) {
      if (layers_[l].pool_before) cur = layers::avg_pool2(cur);
      inputs.push_back(cur);
      cur = layers::conv2d(cur, params_[2 * l].values, params_[2 * l + 1].values, layers_[l].shape);
      layers::relu_inplace(cur);
      outputs.push_back(cur);
      if (layers_[l].tap) ++taps;
    }
  }

  std::size_t tap = k;
  FeatureMapStack g(outputs.back().channels, outputs.back().height, outputs.back().width);
  for (std::size_t l = n_layers; l-- > 0;) {
    if (layers_[l].tap) {
      --tap;
      if (!feature_grads[tap].same_shape(outputs[l])) throw InvalidInput("feature gradient shape mismatch");
      g += feature_grads[tap];
    }
    layers::relu_backward_inplace(g, outputs[l]);
    std::vector<double> gw(layers_[l].shape.weight_count());
    std::vector<double> gb(layers_[l].shape.out_channels);
    g = layers::conv2d_backward(inputs[l], g, params_[2 * l].values, layers_[l].shape, gw, gb);
    if (layers_[l].pool_before) g = layers::avg_pool2_backward(g);
  }
  RealImage out(image.height, image.width);
  out.values = std::move(g.values);
  return out;
}

std::unique_ptr<FeatureExtractor> make_extractor(const std::string& extractor_id) {
  if (extractor_id == "pyramid") return std::make_unique<ConvPyramidExtractor>();
  if (extractor_id == "identity") return std::make_unique<IdentityExtractor>();
  if (extractor_id.starts_with("pyramid:")) {
    const std::string seed = extractor_id.substr(8);
    try {
      return std::make_unique<ConvPyramidExtractor>(std::stoull(seed));
    } catch (const std::logic_error&) {
      throw InvalidConfig("bad extractor seed in '" + extractor_id + "'");
    }
  }
  throw InvalidConfig("unknown extractor_id '" + extractor_id + "'");
}

// --- losses ---------------------------------------------------------------

void LossConfig::validate() const {
  if (!(lambda_1 >= 0.0) || !(lambda_p >= 0.0)) throw InvalidConfig("loss weights must be non-negative");
  if (!(lambda_1 > 0.0 || lambda_p > 0.0)) throw InvalidConfig("at least one loss weight must be positive");
  if (feature_layers_K < 1) throw InvalidConfig("feature_layers_K must be positive");
}

LossValue l1_loss_grad(const ComplexImage& x, const ComplexImage& x_s) {
  check_pair(x, x_s);
  LossValue r{0.0, ComplexImage(x.height(), x.width())};
  auto term = [&](const std::vector<double>& a, const std::vector<double>& b, std::vector<double>& g) {
    for (std::size_t k = 0; k < a.size(); ++k) {
      const double d = a[k] - b[k];
      r.value += std::abs(d);
      g[k] = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
    }
  };
  term(x.real(), x_s.real(), r.grad.real());
  term(x.imag(), x_s.imag(), r.grad.imag());
  return r;
}

LossValue l2_loss_grad(const ComplexImage& x, const ComplexImage& x_s) {
  check_pair(x, x_s);
  LossValue r{0.0, ComplexImage(x.height(), x.width())};
  auto term = [&](const std::vector<double>& a, const std::vector<double>& b, std::vector<double>& g) {
    for (std::size_t k = 0; k < a.size(); ++k) {
      const double d = a[k] - b[k];
      r.value += d * d;
      g[k] = 2.0 * d;
    }
  };
  term(x.real(), x_s.real(), r.grad.real());
  term(x.imag(), x_s.imag(), r.grad.imag());
  return r;
}

LossValue perceptual_loss_grad(const ComplexImage& x, const ComplexImage& x_s, const FeatureExtractor& ext,
                               std::size_t K) {
  check_pair(x, x_s);
  ext.check_resolution(x.height(), x.width());
  const RealImage m = magnitude(x);
  const auto fx = ext.extract(m, K);
  const auto fs = ext.extract(magnitude(x_s), K);

  LossValue r{0.0, ComplexImage(x.height(), x.width())};
  std::vector<FeatureMapStack> dfeat;
  dfeat.reserve(K);
  for (std::size_t k = 0; k < K; ++k) {
    FeatureMapStack d = fx[k];
    for (std::size_t i = 0; i < d.values.size(); ++i) {
      const double diff = fx[k].values[i] - fs[k].values[i];
      r.value += diff * diff;
      d.values[i] = 2.0 * diff;
    }
    dfeat.push_back(std::move(d));
  }
  const RealImage gm = ext.backward(m, dfeat);
  for (std::size_t i = 0; i < m.values.size(); ++i) {
    if (m.values[i] == 0.0) continue;
    r.grad.real()[i] = gm.values[i] * x.real()[i] / m.values[i];
    r.grad.imag()[i] = gm.values[i] * x.imag()[i] / m.values[i];
  }
  return r;
}

LossValue combined_loss_grad(const ComplexImage& x, const ComplexImage& x_s, const LossConfig& cfg,
                             const FeatureExtractor& ext) {
  cfg.validate();
  LossValue r = l1_loss_grad(x, x_s);
  r.value *= cfg.lambda_1;
  r.grad *= cfg.lambda_1;
  if (cfg.lambda_p != 0.0) {
    LossValue p = perceptual_loss_grad(x, x_s, ext, cfg.feature_layers_K);
    r.value += cfg.lambda_p * p.value;
    p.grad *= cfg.lambda_p;
    r.grad += p.grad;
  }
  return r;
}

double l1_loss(const ComplexImage& x, const ComplexImage& x_s) { return l1_loss_grad(x, x_s).value; }
double l2_loss(const ComplexImage& x, const ComplexImage& x_s) { return l2_loss_grad(x, x_s).value; }

double perceptual_loss(const ComplexImage& x, const ComplexImage& x_s, const FeatureExtractor& ext, std::size_t K) {
  check_pair(x, x_s);
  ext.check_resolution(x.height(), x.width());
  const auto fx = ext.extract(magnitude(x), K);
  const auto fs = ext.extract(magnitude(x_s), K);
  double acc = 0.0;
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t i = 0; i < fx[k].values.size(); ++i) {
      const double d = fx[k].values[i] - fs[k].values[i];
      acc += d * d;
    }
  return acc;
}

double combined_loss(const ComplexImage& x, const ComplexImage& x_s, const LossConfig& cfg,
                     const FeatureExtractor& ext) {
  cfg.validate();
  double v = cfg.lambda_1 * l1_loss(x, x_s);
  if (cfg.lambda_p != 0.0) v += cfg.lambda_p * perceptual_loss(x, x_s, ext, cfg.feature_layers_K);
  return v;
}

LossValue training_loss(LossPreset preset, const ComplexImage& x, const ComplexImage& x_s, const LossConfig& cfg,
                        const FeatureExtractor& ext) {
  return preset == LossPreset::L2 ? l2_loss_grad(x, x_s) : combined_loss_grad(x, x_s, cfg, ext);
}

}  // namespace miccan
