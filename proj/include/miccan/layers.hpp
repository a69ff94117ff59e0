#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "miccan/feature_map.hpp"

namespace miccan::layers {

/// Square same-padded convolution, stride 1. Weights are laid out
/// [out][in][ky][kx]; kernel must be odd.
struct ConvShape {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel = 3;

  std::size_t weight_count() const noexcept { return out_channels * in_channels * kernel * kernel; }
  std::size_t fan_in() const noexcept { return in_channels * kernel * kernel; }
};

FeatureMapStack conv2d(const FeatureMapStack& in, std::span<const double> weight, std::span<const double> bias,
                       const ConvShape& shape);

/// Accumulates into grad_weight/grad_bias and returns the input gradient
/// (empty when want_input_grad is false).
FeatureMapStack conv2d_backward(const FeatureMapStack& in, const FeatureMapStack& grad_out,
                                std::span<const double> weight, const ConvShape& shape,
                                std::span<double> grad_weight, std::span<double> grad_bias,
                                bool want_input_grad = true);

void relu_inplace(FeatureMapStack& maps);
/// grad *= [activated > 0]
void relu_backward_inplace(FeatureMapStack& grad, const FeatureMapStack& activated);

struct MaxPoolResult {
  FeatureMapStack out;
  std::vector<std::uint32_t> argmax;  ///< flat input index per output element
};
MaxPoolResult max_pool2(const FeatureMapStack& in);
FeatureMapStack max_pool2_backward(const FeatureMapStack& grad_out, std::span<const std::uint32_t> argmax,
                                   std::size_t in_height, std::size_t in_width);

FeatureMapStack avg_pool2(const FeatureMapStack& in);
FeatureMapStack avg_pool2_backward(const FeatureMapStack& grad_out);

/// Nearest-neighbour 2x upsampling.
FeatureMapStack upsample2(const FeatureMapStack& in);
FeatureMapStack upsample2_backward(const FeatureMapStack& grad_out);

FeatureMapStack concat_channels(const FeatureMapStack& a, const FeatureMapStack& b);
std::pair<FeatureMapStack, FeatureMapStack> split_channels(const FeatureMapStack& g, std::size_t first_channels);

}  // namespace miccan::layers
