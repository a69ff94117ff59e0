#include "miccan/wavelet.hpp"

#include <bit>

namespace miccan {
namespace {

// db4 reconstruction low-pass filter.
constexpr std::array<double, Db4Wavelet2D::kTaps> kLow = {
    0.23037781330889650,  0.71484657055291565,  0.63088076792985891,  -0.027983769416859854,
    -0.18703481171909308, 0.030841381835560764, 0.032883011666885200, -0.010597401785069032,
};

constexpr std::array<double, Db4Wavelet2D::kTaps> make_high() {
  std::array<double, Db4Wavelet2D::kTaps> g{};
  for (std::size_t k = 0; k < Db4Wavelet2D::kTaps; ++k)
    g[k] = ((k % 2 == 0) ? 1.0 : -1.0) * kLow[Db4Wavelet2D::kTaps - 1 - k];
  return g;
}
constexpr auto kHigh = make_high();
// Filter alignment; matches the usual periodization convention.
constexpr std::size_t kOffset = 3;

// One analysis level on n samples at the given stride.
void analyze(double* data, std::size_t n, std::size_t stride, std::vector<double>& tmp) {
  tmp.assign(n, 0.0);
  const std::size_t half = n / 2;
  for (std::size_t i = 0; i < half; ++i) {
    double a = 0.0, d = 0.0;
    for (std::size_t k = 0; k < Db4Wavelet2D::kTaps; ++k) {
      const double x = data[((2 * i + k + Db4Wavelet2D::kTaps * n - kOffset) % n) * stride];
      a += kLow[k] * x;
      d += kHigh[k] * x;
    }
    tmp[i] = a;
    tmp[half + i] = d;
  }
  for (std::size_t i = 0; i < n; ++i) data[i * stride] = tmp[i];
}

// Transpose of analyze.
void synthesize(double* data, std::size_t n, std::size_t stride, std::vector<double>& tmp) {
  tmp.assign(n, 0.0);
  const std::size_t half = n / 2;
  for (std::size_t i = 0; i < half; ++i) {
    const double a = data[i * stride];
    const double d = data[(half + i) * stride];
    for (std::size_t k = 0; k < Db4Wavelet2D::kTaps; ++k)
      tmp[(2 * i + k + Db4Wavelet2D::kTaps * n - kOffset) % n] += kLow[k] * a + kHigh[k] * d;
  }
  for (std::size_t i = 0; i < n; ++i) data[i * stride] = tmp[i];
}

}  // namespace

const std::array<double, Db4Wavelet2D::kTaps>& Db4Wavelet2D::lowpass() { return kLow; }

void Db4Wavelet2D::check_size(std::size_t height, std::size_t width) const {
  if (!std::has_single_bit(height) || !std::has_single_bit(width))
    throw InvalidInput("wavelet transform needs power-of-two image sides, got " + std::to_string(height) + "x" +
                       std::to_string(width));
  if ((height >> levels_) == 0 || (width >> levels_) == 0 || height < (std::size_t{2} << (levels_ - 1)) ||
      width < (std::size_t{2} << (levels_ - 1)))
    throw InvalidInput("image too small for the requested number of wavelet levels");
}

void Db4Wavelet2D::forward(std::span<double> data, std::size_t height, std::size_t width) const {
  check_size(height, width);
  std::vector<double> tmp;
  std::size_t h = height, w = width;
  for (std::size_t l = 0; l < levels_; ++l, h /= 2, w /= 2) {
    for (std::size_t i = 0; i < h; ++i) analyze(data.data() + i * width, w, 1, tmp);
    for (std::size_t j = 0; j < w; ++j) analyze(data.data() + j, h, width, tmp);
  }
}

void Db4Wavelet2D::inverse(std::span<double> data, std::size_t height, std::size_t width) const {
  check_size(height, width);
  std::vector<double> tmp;
  for (std::size_t l = levels_; l-- > 0;) {
    const std::size_t h = height >> l, w = width >> l;
    for (std::size_t j = 0; j < w; ++j) synthesize(data.data() + j, h, width, tmp);
    for (std::size_t i = 0; i < h; ++i) synthesize(data.data() + i * width, w, 1, tmp);
  }
}

ComplexImage Db4Wavelet2D::forward(const ComplexImage& image) const {
  ComplexImage c = image;
  forward(c.real(), c.height(), c.width());
  forward(c.imag(), c.height(), c.width());
  return c;
}

ComplexImage Db4Wavelet2D::inverse(const ComplexImage& coeffs) const {
  ComplexImage x = coeffs;
  inverse(x.real(), x.height(), x.width());
  inverse(x.imag(), x.height(), x.width());
  return x;
}

}  // namespace miccan
