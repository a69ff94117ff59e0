#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "miccan/errors.hpp"

namespace miccan {

/// H×W complex array stored as two real planes, row-major.
///
/// The tag parameter separates image-domain data from k-space data at the
/// type level; both share storage and arithmetic.
template <class Tag>
class ComplexPlanes {
 public:
  ComplexPlanes() = default;
  ComplexPlanes(std::size_t height, std::size_t width)
      : height_(height), width_(width), real_(height * width, 0.0), imag_(height * width, 0.0) {
    if (height == 0 || width == 0) throw InvalidInput("complex array dimensions must be positive");
  }
  ComplexPlanes(std::size_t height, std::size_t width, std::vector<double> real, std::vector<double> imag)
      : height_(height), width_(width), real_(std::move(real)), imag_(std::move(imag)) {
    if (height == 0 || width == 0) throw InvalidInput("complex array dimensions must be positive");
    if (real_.size() != height * width || imag_.size() != height * width)
      throw InvalidInput("plane size does not match dimensions");
  }

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t size() const noexcept { return real_.size(); }
  bool empty() const noexcept { return real_.empty(); }

  std::vector<double>& real() noexcept { return real_; }
  std::vector<double>& imag() noexcept { return imag_; }
  const std::vector<double>& real() const noexcept { return real_; }
  const std::vector<double>& imag() const noexcept { return imag_; }

  std::complex<double> at(std::size_t i, std::size_t j) const {
    const std::size_t k = i * width_ + j;
    return {real_[k], imag_[k]};
  }
  void set(std::size_t i, std::size_t j, std::complex<double> v) {
    const std::size_t k = i * width_ + j;
    real_[k] = v.real();
    imag_[k] = v.imag();
  }

  template <class Other>
  bool same_shape(const ComplexPlanes<Other>& o) const noexcept {
    return height_ == o.height() && width_ == o.width();
  }

  bool all_finite() const noexcept {
    for (std::size_t k = 0; k < real_.size(); ++k)
      if (!std::isfinite(real_[k]) || !std::isfinite(imag_[k])) return false;
    return true;
  }

  ComplexPlanes& operator+=(const ComplexPlanes& o) {
    check_same(o);
    for (std::size_t k = 0; k < real_.size(); ++k) {
      real_[k] += o.real_[k];
      imag_[k] += o.imag_[k];
    }
    return *this;
  }
  ComplexPlanes& operator-=(const ComplexPlanes& o) {
    check_same(o);
    for (std::size_t k = 0; k < real_.size(); ++k) {
      real_[k] -= o.real_[k];
      imag_[k] -= o.imag_[k];
    }
    return *this;
  }
  ComplexPlanes& operator*=(double s) noexcept {
    for (std::size_t k = 0; k < real_.size(); ++k) {
      real_[k] *= s;
      imag_[k] *= s;
    }
    return *this;
  }

  friend ComplexPlanes operator+(ComplexPlanes a, const ComplexPlanes& b) { return a += b; }
  friend ComplexPlanes operator-(ComplexPlanes a, const ComplexPlanes& b) { return a -= b; }
  friend ComplexPlanes operator*(double s, ComplexPlanes a) { return a *= s; }

  bool operator==(const ComplexPlanes&) const = default;

 private:
  void check_same(const ComplexPlanes& o) const {
    if (!same_shape(o)) throw InvalidInput("complex array shape mismatch");
  }

  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<double> real_;
  std::vector<double> imag_;
};

struct ImageDomain {};
struct FourierDomain {};

using ComplexImage = ComplexPlanes<ImageDomain>;
using KSpaceData = ComplexPlanes<FourierDomain>;

/// Real-valued H×W image (magnitudes, error maps).
struct RealImage {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> values;

  RealImage() = default;
  RealImage(std::size_t h, std::size_t w, double fill = 0.0) : height(h), width(w), values(h * w, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return values[i * width + j]; }
  double operator()(std::size_t i, std::size_t j) const { return values[i * width + j]; }
  bool operator==(const RealImage&) const = default;
};

/// Real inner product of two complex arrays viewed as R^{2HW}: Re<a, b>.
template <class Tag>
double real_inner(const ComplexPlanes<Tag>& a, const ComplexPlanes<Tag>& b) {
  if (!a.same_shape(b)) throw InvalidInput("inner product shape mismatch");
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += a.real()[k] * b.real()[k] + a.imag()[k] * b.imag()[k];
  return acc;
}

template <class Tag>
double l2_norm(const ComplexPlanes<Tag>& a) {
  return std::sqrt(real_inner(a, a));
}

template <class Tag>
double max_abs_diff(const ComplexPlanes<Tag>& a, const ComplexPlanes<Tag>& b) {
  if (!a.same_shape(b)) throw InvalidInput("shape mismatch");
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    m = std::max(m, std::abs(a.real()[k] - b.real()[k]));
    m = std::max(m, std::abs(a.imag()[k] - b.imag()[k]));
  }
  return m;
}

/// Pixelwise modulus.
template <class Tag>
RealImage magnitude(const ComplexPlanes<Tag>& a) {
  RealImage out(a.height(), a.width());
  for (std::size_t k = 0; k < a.size(); ++k) out.values[k] = std::hypot(a.real()[k], a.imag()[k]);
  return out;
}

}  // namespace miccan
