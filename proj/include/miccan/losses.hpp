#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "miccan/complex_image.hpp"
#include "miccan/feature_map.hpp"
#include "miccan/layers.hpp"
#include "miccan/parameters.hpp"

namespace miccan {

/// Fixed (non-trainable) image-to-features map used by the perceptual loss.
class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;

  virtual std::string id() const = 0;
  /// Maximum number of feature layers the extractor can produce.
  virtual std::size_t layer_count() const = 0;
  /// Throws InvalidInput when the resolution is not supported.
  virtual void check_resolution(std::size_t height, std::size_t width) const = 0;

  /// First `layers` feature stacks of a real image.
  virtual std::vector<FeatureMapStack> extract(const RealImage& image, std::size_t layers) const = 0;

  /// d loss / d image given d loss / d feature for each of the first
  /// feature_grads.size() layers.
  virtual RealImage backward(const RealImage& image, std::span<const FeatureMapStack> feature_grads) const = 0;
};

/// Features are the image itself (one layer).
class IdentityExtractor final : public FeatureExtractor {
 public:
  std::string id() const override { return "identity"; }
  std::size_t layer_count() const override { return 1; }
  void check_resolution(std::size_t, std::size_t) const override {}
  std::vector<FeatureMapStack> extract(const RealImage& image, std::size_t layers) const override;
  RealImage backward(const RealImage& image, std::span<const FeatureMapStack> feature_grads) const override;
};

/// Built-in deterministic extractor: a small VGG-shaped pyramid
///   conv1_1(1→8) conv1_2(8→8) | pool | conv2_1(8→16) conv2_2(16→16) | pool | conv3_1(16→16)
/// with 3×3 kernels and ReLU, tapped at relu1_2, relu2_1, relu2_2, relu3_1.
/// Weights come from a seeded generator or from an imported parameter set.
class ConvPyramidExtractor final : public FeatureExtractor {
 public:
  static constexpr std::uint64_t kDefaultSeed = 0x5EED'F00D'CAFEull;
  static constexpr const char* kParameterPrefix = "extractor.";

  explicit ConvPyramidExtractor(std::uint64_t seed = kDefaultSeed);
  /// Imports weights named "extractor.<layer>.weight/bias"; other arrays are ignored.
  static ConvPyramidExtractor from_parameters(const ParameterSet& params);

  std::string id() const override { return id_; }
  std::size_t layer_count() const override { return 4; }
  void check_resolution(std::size_t height, std::size_t width) const override;
  std::vector<FeatureMapStack> extract(const RealImage& image, std::size_t layers) const override;
  RealImage backward(const RealImage& image, std::span<const FeatureMapStack> feature_grads) const override;

  const ParameterSet& parameters() const noexcept { return params_; }

 private:
  struct Layer {
    std::string name;
    layers::ConvShape shape;
    bool pool_before = false;
    bool tap = false;
  };
  static std::vector<Layer> topology();
  ConvPyramidExtractor(ParameterSet params, std::string id);

  std::vector<Layer> layers_;
  ParameterSet params_;
  std::string id_;
};

/// Returns the extractor named by `extractor_id` ("pyramid", "identity").
std::unique_ptr<FeatureExtractor> make_extractor(const std::string& extractor_id);

enum class LossPreset { L2, COMBINED };

struct LossConfig {
  double lambda_1 = 10.0;
  double lambda_p = 0.5;
  std::size_t feature_layers_K = 4;
  std::string extractor_id = "pyramid";

  void validate() const;
  bool operator==(const LossConfig&) const = default;
};

/// Loss value with its gradient with respect to the reconstruction.
struct LossValue {
  double value = 0.0;
  ComplexImage grad;
};

/// Σ |x − x_s| over both planes.
double l1_loss(const ComplexImage& x, const ComplexImage& x_s);
/// Σ (x − x_s)² over both planes.
double l2_loss(const ComplexImage& x, const ComplexImage& x_s);
/// Σ_k ‖φ_k(|x|) − φ_k(|x_s|)‖², k = 1..K.
double perceptual_loss(const ComplexImage& x, const ComplexImage& x_s, const FeatureExtractor& ext, std::size_t K);
/// λ1·l1 + λp·perceptual.
double combined_loss(const ComplexImage& x, const ComplexImage& x_s, const LossConfig& cfg,
                     const FeatureExtractor& ext);

LossValue l1_loss_grad(const ComplexImage& x, const ComplexImage& x_s);
LossValue l2_loss_grad(const ComplexImage& x, const ComplexImage& x_s);
LossValue perceptual_loss_grad(const ComplexImage& x, const ComplexImage& x_s, const FeatureExtractor& ext,
                               std::size_t K);
LossValue combined_loss_grad(const ComplexImage& x, const ComplexImage& x_s, const LossConfig& cfg,
                             const FeatureExtractor& ext);

/// Training objective selected by `preset`.
LossValue training_loss(LossPreset preset, const ComplexImage& x, const ComplexImage& x_s, const LossConfig& cfg,
                        const FeatureExtractor& ext);

}  // namespace miccan
