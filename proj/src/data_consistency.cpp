#include "miccan/data_consistency.hpp"

#include <cmath>

#include "miccan/fourier.hpp"

namespace miccan {

void DCConfig::validate() const {
  if (std::isnan(noise_level_v) || noise_level_v < 0.0)
    throw InvalidConfig("data-consistency noise level v must be non-negative");
}

double DCConfig::retained_weight() const noexcept { return is_noiseless() ? 0.0 : 1.0 / (1.0 + noise_level_v); }

double DCConfig::measured_weight() const noexcept {
  return is_noiseless() ? 1.0 : noise_level_v / (1.0 + noise_level_v);
}

namespace {

void check_shapes(const ComplexImage& x, const SamplingMask& mask) {
  if (x.height() != mask.height() || x.width() != mask.width())
    throw InvalidInput("data consistency: image and mask shapes differ");
}

}  // namespace

ComplexImage data_consistency(const ComplexImage& x_n, const KSpaceData& y, const SamplingMask& mask,
                              const DCConfig& cfg) {
  cfg.validate();
  check_shapes(x_n, mask);
  if (!x_n.same_shape(y)) throw InvalidInput("data consistency: image and k-space shapes differ");

  KSpaceData spec = fft2c(x_n);
  const auto& grid = mask.grid();
  if (cfg.is_noiseless()) {
    for (std::size_t k = 0; k < grid.size(); ++k) {
      if (!grid[k]) continue;
      spec.real()[k] = y.real()[k];
      spec.imag()[k] = y.imag()[k];
    }
  } else {
    const double v = cfg.noise_level_v;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      if (!grid[k]) continue;
      spec.real()[k] = (spec.real()[k] + v * y.real()[k]) / (1.0 + v);
      spec.imag()[k] = (spec.imag()[k] + v * y.imag()[k]) / (1.0 + v);
    }
  }
  return ifft2c(spec);
}

ComplexImage data_consistency_jacobian(const ComplexImage& direction, const SamplingMask& mask, const DCConfig& cfg) {
  cfg.validate();
  check_shapes(direction, mask);
  KSpaceData spec = fft2c(direction);
  const double keep = cfg.retained_weight();
  const auto& grid = mask.grid();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!grid[k]) continue;
    spec.real()[k] *= keep;
    spec.imag()[k] *= keep;
  }
  return ifft2c(spec);
}

KSpaceData data_consistency_measurement_vjp(const ComplexImage& grad_out, const SamplingMask& mask,
                                            const DCConfig& cfg) {
  cfg.validate();
  check_shapes(grad_out, mask);
  KSpaceData spec = fft2c(grad_out);
  apply_mask(spec, mask);
  spec *= cfg.measured_weight();
  return spec;
}

}  // namespace miccan
