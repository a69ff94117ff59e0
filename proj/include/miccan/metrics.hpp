#pragma once

#include "miccan/complex_image.hpp"

namespace miccan {

struct MetricReport {
  double nrmse = 0.0;
  double psnr = 0.0;  ///< dB; +inf for identical images
  double ssim = 0.0;
};

/// PSNR written to files when the in-memory value is +inf.
inline constexpr double kPsnrSentinel = 99.0;

/// ‖x − ref‖₂ / ‖ref‖₂. Throws UndefinedMetric when ‖ref‖₂ = 0.
double nrmse(const RealImage& x, const RealImage& ref);

/// 10·log10(range² / MSE); +inf when MSE = 0.
double psnr(const RealImage& x, const RealImage& ref, double data_range = 1.0);

/// Mean SSIM over all positions where an 11×11 Gaussian window (σ = 1.5)
/// fits, with K1 = 0.01, K2 = 0.03.
double ssim(const RealImage& x, const RealImage& ref, double data_range = 1.0);

/// Metrics on magnitude images, both scaled so the reference maximum is 1.
MetricReport compare_images(const ComplexImage& reconstruction, const ComplexImage& reference);

}  // namespace miccan
