#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "miccan/complex_image.hpp"

namespace miccan {

/// Orthogonal separable 2-D wavelet transform with periodic boundaries,
/// Mallat layout (approximation band in the top-left corner).
/// Uses the 8-tap Daubechies filter with four vanishing moments (db4).
class Db4Wavelet2D {
 public:
  static constexpr std::size_t kTaps = 8;

  explicit Db4Wavelet2D(std::size_t levels = 3) : levels_(levels) {}

  std::size_t levels() const noexcept { return levels_; }
  /// Throws InvalidInput unless both sides are powers of two with at least `levels` halvings.
  void check_size(std::size_t height, std::size_t width) const;

  void forward(std::span<double> data, std::size_t height, std::size_t width) const;
  void inverse(std::span<double> data, std::size_t height, std::size_t width) const;

  /// Applied to real and imaginary planes independently.
  ComplexImage forward(const ComplexImage& image) const;
  ComplexImage inverse(const ComplexImage& coeffs) const;

  static const std::array<double, kTaps>& lowpass();

 private:
  std::size_t levels_;
};

}  // namespace miccan
