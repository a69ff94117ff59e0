#pragma once

#include <cstddef>
#include <cstdint>

#include "miccan/complex_image.hpp"
#include "miccan/mask.hpp"

namespace miccan {

/// Parameters of the variable-density Cartesian mask generator.
struct MaskSpec {
  double rate = 0.125;          ///< fraction of rows sampled, in (0, 1]
  std::size_t center_lines = 8;  ///< fully sampled low-frequency rows
  std::uint64_t seed = 0;
  double sigma_fraction = 0.15;  ///< Gaussian std of the row density, as a fraction of H

  /// Number of rows a mask of height `height` will contain.
  std::size_t rows_for(std::size_t height) const;
  /// Throws InvalidConfig / InfeasibleSpec when the spec cannot be realized.
  void validate(std::size_t height) const;
  bool operator==(const MaskSpec&) const = default;
};

/// First row of the forced low-frequency block.
std::size_t center_block_start(std::size_t height, std::size_t center_lines);

/// Draws a mask: the center block is always included, the remaining rows are
/// drawn without replacement with probability proportional to a zero-mean
/// Gaussian of their signed distance from row H/2.
SamplingMask generate_mask(const MaskSpec& spec, std::size_t height, std::size_t width);

/// Measurement y = mask ⊙ fft2c(ground_truth).
KSpaceData simulate_acquisition(const ComplexImage& ground_truth, const SamplingMask& mask);

/// x0 = ifft2c(y).
ComplexImage zero_fill(const KSpaceData& y);

}  // namespace miccan
