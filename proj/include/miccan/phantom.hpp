#pragma once

#include <cstddef>

#include "miccan/complex_image.hpp"
#include "miccan/rng.hpp"

namespace miccan {

/// Piecewise-smooth random phantom: an outer body ellipse and several
/// overlapping inner ellipses, each with a linear intensity ramp. Real-valued,
/// scaled so the maximum is exactly 1.
ComplexImage random_ellipse_phantom(std::size_t size, Rng& rng);

/// Modified Shepp–Logan head phantom (piecewise constant, values in [0, 1]).
ComplexImage shepp_logan_phantom(std::size_t size);

}  // namespace miccan
