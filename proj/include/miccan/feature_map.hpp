#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "miccan/complex_image.hpp"

namespace miccan {

/// C×H×W real activations, channel-major.
struct FeatureMapStack {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> values;

  FeatureMapStack() = default;
  FeatureMapStack(std::size_t c, std::size_t h, std::size_t w, double fill = 0.0)
      : channels(c), height(h), width(w), values(c * h * w, fill) {}

  std::size_t plane() const noexcept { return height * width; }
  std::span<double> channel(std::size_t c) { return {values.data() + c * plane(), plane()}; }
  std::span<const double> channel(std::size_t c) const { return {values.data() + c * plane(), plane()}; }
  double& operator()(std::size_t c, std::size_t i, std::size_t j) { return values[(c * height + i) * width + j]; }
  double operator()(std::size_t c, std::size_t i, std::size_t j) const {
    return values[(c * height + i) * width + j];
  }
  bool same_shape(const FeatureMapStack& o) const noexcept {
    return channels == o.channels && height == o.height && width == o.width;
  }
  FeatureMapStack& operator+=(const FeatureMapStack& o);
  bool operator==(const FeatureMapStack&) const = default;
};

/// Complex image as two channels (real, imaginary).
FeatureMapStack to_channels(const ComplexImage& image);
ComplexImage from_channels(const FeatureMapStack& maps);

}  // namespace miccan
