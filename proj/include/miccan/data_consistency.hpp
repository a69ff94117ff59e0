#pragma once

#include <limits>

#include "miccan/complex_image.hpp"
#include "miccan/mask.hpp"

namespace miccan {

/// Noise level v of the data-fidelity blend. Infinity selects exact
/// replacement of sampled k-space values.
struct DCConfig {
  double noise_level_v = std::numeric_limits<double>::infinity();

  static DCConfig noiseless() { return {}; }
  static DCConfig with_noise(double v) { return DCConfig{v}; }

  bool is_noiseless() const noexcept { return noise_level_v == std::numeric_limits<double>::infinity(); }
  /// Throws InvalidConfig for negative or NaN v.
  void validate() const;

  /// Weight kept from the current spectrum at sampled positions: 1/(1+v), 0 when noiseless.
  double retained_weight() const noexcept;
  /// Weight given to the measurement at sampled positions: v/(1+v), 1 when noiseless.
  double measured_weight() const noexcept;

  bool operator==(const DCConfig&) const = default;
};

/// x_dc = ifft2c(τ(fft2c(x_n))) where τ blends measured values in at sampled positions.
ComplexImage data_consistency(const ComplexImage& x_n, const KSpaceData& y, const SamplingMask& mask,
                              const DCConfig& cfg);

/// Linear part of DC in x_n, ifft2c(D fft2c(g)) with D diagonal and real.
/// The map is self-adjoint, so this serves as both the Jacobian-vector and
/// vector-Jacobian product with respect to x_n.
ComplexImage data_consistency_jacobian(const ComplexImage& direction, const SamplingMask& mask, const DCConfig& cfg);

/// Vector-Jacobian product of DC with respect to the measurement y.
KSpaceData data_consistency_measurement_vjp(const ComplexImage& grad_out, const SamplingMask& mask,
                                            const DCConfig& cfg);

}  // namespace miccan
