#include "doctest.h"
#include "miccan/data_consistency.hpp"
#include "miccan/fourier.hpp"
#include "miccan/sampling.hpp"
#include "support.hpp"

using namespace miccan;
using namespace testing;

TEST_CASE("noiseless DC restores measured values") {
  Rng rng(1);
  for (int t = 0; t < 20; ++t) {
    const ComplexImage x = random_image(rng, 8, 12);
    const SamplingMask m = random_mask(rng, 8, 12);
    const KSpaceData y = forward_undersampled(random_image(rng, 8, 12), m);
    const ComplexImage out = data_consistency(x, y, m, DCConfig::noiseless());
    const KSpaceData k = fft2c(out);
    const KSpaceData kx = fft2c(x);
    for (std::size_t i = 0; i < 8; ++i)
      for (std::size_t j = 0; j < 12; ++j) {
        if (m.sampled(i, j)) CHECK(std::abs(k.at(i, j) - y.at(i, j)) < 1e-9);
        else CHECK(std::abs(k.at(i, j) - kx.at(i, j)) < 1e-9);
      }
    CHECK(max_abs_diff(data_consistency(out, y, m, {}), out) < 1e-9);
  }
}

TEST_CASE("v = 0 leaves the input unchanged and consistent inputs are fixed points") {
  Rng rng(2);
  const ComplexImage x = random_image(rng, 8, 8);
  const SamplingMask m = random_mask(rng, 8, 8);
  const KSpaceData y = forward_undersampled(random_image(rng, 8, 8), m);
  CHECK(max_abs_diff(data_consistency(x, y, m, DCConfig::with_noise(0.0)), x) < 1e-10);
  const ComplexImage x0 = zero_fill(y);
  CHECK(max_abs_diff(data_consistency(x0, y, m, {}), x0) < 1e-10);
}

TEST_CASE("finite noise level blends on the segment") {
  Rng rng(3);
  const ComplexImage x = random_image(rng, 8, 8);
  const SamplingMask m = random_mask(rng, 8, 8, 0.6);
  const KSpaceData y = forward_undersampled(random_image(rng, 8, 8), m);
  for (double v : {0.25, 1.0, 7.5}) {
    const KSpaceData k = fft2c(data_consistency(x, y, m, DCConfig::with_noise(v)));
    const KSpaceData kx = fft2c(x);
    for (std::size_t i = 0; i < 8; ++i)
      for (std::size_t j = 0; j < 8; ++j) {
        if (!m.sampled(i, j)) continue;
        const auto expect = (kx.at(i, j) + v * y.at(i, j)) / (1.0 + v);
        CHECK(std::abs(k.at(i, j) - expect) < 1e-10);
        // On the segment: distances add up.
        const double d1 = std::abs(k.at(i, j) - kx.at(i, j)), d2 = std::abs(k.at(i, j) - y.at(i, j));
        CHECK(std::abs(d1 + d2 - std::abs(kx.at(i, j) - y.at(i, j))) < 1e-9);
      }
  }
}

TEST_CASE("DC is affine in its image argument") {
  Rng rng(4);
  const SamplingMask m = random_mask(rng, 8, 8);
  const KSpaceData y = forward_undersampled(random_image(rng, 8, 8), m);
  const ComplexImage a = random_image(rng, 8, 8), b = random_image(rng, 8, 8);
  for (const DCConfig cfg : {DCConfig::noiseless(), DCConfig::with_noise(2.0)}) {
    const ComplexImage zero = data_consistency(ComplexImage(8, 8), y, m, cfg);
    const ComplexImage lhs = data_consistency(1.5 * a + (-0.5) * b, y, m, cfg) - zero;
    const ComplexImage rhs =
        1.5 * (data_consistency(a, y, m, cfg) - zero) + (-0.5) * (data_consistency(b, y, m, cfg) - zero);
    CHECK(max_abs_diff(lhs, rhs) < 1e-9);
  }
}

TEST_CASE("DC derivatives match finite differences") {
  Rng rng(5);
  for (const DCConfig cfg : {DCConfig::noiseless(), DCConfig::with_noise(0.0), DCConfig::with_noise(3.0)}) {
    const SamplingMask m = random_mask(rng, 8, 8);
    KSpaceData y = forward_undersampled(random_image(rng, 8, 8), m);
    ComplexImage x = random_image(rng, 8, 8);
    const ComplexImage dir = random_image(rng, 8, 8);
    const double h = 1e-6;
    const ComplexImage fd =
        (1.0 / (2.0 * h)) * (data_consistency(x + h * dir, y, m, cfg) - data_consistency(x + (-h) * dir, y, m, cfg));
    const ComplexImage jvp = data_consistency_jacobian(dir, m, cfg);
    CHECK(l2_norm(fd - jvp) / l2_norm(jvp) <= 1e-4);

    // Scalar loss <w, DC(x, y)>: gradient with respect to y.
    const ComplexImage w = random_image(rng, 8, 8);
    auto loss = [&] { return real_inner(w, data_consistency(x, y, m, cfg)); };
    const KSpaceData gy = data_consistency_measurement_vjp(w, m, cfg);
    const auto nr = numeric_gradient(y.real(), loss);
    const auto ni = numeric_gradient(y.imag(), loss);
    for (std::size_t k = 0; k < y.size(); ++k) {
      CHECK(rel_err(gy.real()[k], nr[k], 1e-6) <= 1e-4);
      CHECK(rel_err(gy.imag()[k], ni[k], 1e-6) <= 1e-4);
    }
  }
}

TEST_CASE("DC errors") {
  Rng rng(6);
  const ComplexImage x = random_image(rng, 8, 8);
  CHECK_THROWS_AS(data_consistency(x, KSpaceData(8, 6), SamplingMask::full(8, 8), {}), InvalidInput);
  CHECK_THROWS_AS(data_consistency(x, KSpaceData(8, 8), SamplingMask::full(8, 6), {}), InvalidInput);
  CHECK_THROWS_AS(data_consistency(x, KSpaceData(8, 8), SamplingMask::full(8, 8), DCConfig::with_noise(-1.0)),
                  InvalidConfig);
}
