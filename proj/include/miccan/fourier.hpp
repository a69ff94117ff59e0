#pragma once

#include "miccan/complex_image.hpp"
#include "miccan/mask.hpp"

namespace miccan {

/// Centered orthonormal 2-D DFT. The DC bin lands at (H/2, W/2) (floor).
KSpaceData fft2c(const ComplexImage& image);

/// Exact inverse of fft2c.
ComplexImage ifft2c(const KSpaceData& kspace);

/// mask ⊙ fft2c(image).
KSpaceData forward_undersampled(const ComplexImage& image, const SamplingMask& mask);

/// Zeroes every unsampled position in place.
void apply_mask(KSpaceData& kspace, const SamplingMask& mask);

}  // namespace miccan
