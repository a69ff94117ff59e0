#include <set>

#include "doctest.h"
#include "miccan/fourier.hpp"
#include "miccan/metrics.hpp"
#include "miccan/phantom.hpp"
#include "miccan/sampling.hpp"
#include "support.hpp"

using namespace miccan;
using namespace testing;

TEST_CASE("mask at the default rate keeps sixteen rows including the centre block") {
  MaskSpec spec;
  spec.seed = 42;
  const SamplingMask m = generate_mask(spec, 128, 128);
  CHECK(m.rows_sampled().size() == 16);
  for (std::size_t r = 60; r <= 67; ++r) CHECK(m.row_sampled(r));
  for (std::size_t i = 0; i < 128; ++i)
    for (std::size_t j = 0; j < 128; ++j) CHECK(m.sampled(i, j) == m.row_sampled(i));
  CHECK(1.0 / spec.rate == doctest::Approx(8.0));
}

TEST_CASE("row count is exact across rates and heights") {
  for (std::size_t h : {8u, 16u, 33u, 64u, 100u, 128u})
    for (double rate : {0.125, 0.2, 0.33, 0.5, 0.77, 1.0}) {
      MaskSpec spec;
      spec.rate = rate;
      spec.seed = h * 31;
      if (static_cast<std::size_t>(std::llround(rate * static_cast<double>(h))) < spec.center_lines) {
        CHECK_THROWS_AS(generate_mask(spec, h, 4), InfeasibleSpec);
        continue;
      }
      const SamplingMask m = generate_mask(spec, h, 4);
      CHECK(m.rows_sampled().size() == static_cast<std::size_t>(std::llround(rate * static_cast<double>(h))));
      const std::size_t c0 = center_block_start(h, 8);
      CHECK(c0 == h / 2 - 4);
      for (std::size_t r = c0; r < c0 + 8; ++r) CHECK(m.row_sampled(r));
    }
}

TEST_CASE("full rate samples every row") {
  for (std::uint64_t seed : {0ull, 1ull, 99ull}) {
    MaskSpec spec{1.0, 8, seed, 0.15};
    CHECK(generate_mask(spec, 32, 32) == SamplingMask::full(32, 32));
  }
}

TEST_CASE("mask determinism and seed sensitivity") {
  MaskSpec spec;
  spec.rate = 0.25;
  spec.seed = 7;
  CHECK(generate_mask(spec, 64, 64) == generate_mask(spec, 64, 64));
  std::set<std::vector<std::size_t>> distinct;
  const SamplingMask ref = generate_mask(spec, 64, 64);
  int differing = 0;
  for (std::uint64_t s = 100; s < 200; ++s) {
    spec.seed = s;
    const SamplingMask m = generate_mask(spec, 64, 64);
    distinct.insert(m.rows_sampled());
    if (m != ref) ++differing;
  }
  CHECK(differing >= 95);
  CHECK(distinct.size() >= 90);
}

TEST_CASE("row draws concentrate near the centre") {
  // Over many seeds the outer quarter of rows should be drawn far less often
  // than the rows just outside the forced block.
  std::vector<int> hits(64, 0);
  MaskSpec spec;
  spec.rate = 0.25;
  for (std::uint64_t s = 0; s < 400; ++s) {
    spec.seed = s;
    const SamplingMask m = generate_mask(spec, 64, 8);
    for (std::size_t r : m.rows_sampled()) ++hits[r];
  }
  int inner = 0, outer = 0;
  for (std::size_t r = 20; r < 28; ++r) inner += hits[r];
  for (std::size_t r = 0; r < 8; ++r) outer += hits[r];
  CHECK(inner > 3 * outer);
}

TEST_CASE("mask spec validation") {
  MaskSpec spec;
  spec.rate = 0.05;
  CHECK_THROWS_AS(generate_mask(spec, 64, 64), InfeasibleSpec);
  spec.rate = 0.0;
  CHECK_THROWS(generate_mask(spec, 64, 64));
  spec.rate = 1.5;
  CHECK_THROWS(generate_mask(spec, 64, 64));
  spec.rate = 0.5;
  spec.sigma_fraction = 0.0;
  CHECK_THROWS(generate_mask(spec, 64, 64));
}

TEST_CASE("acquisition simulation and zero filling") {
  Rng rng(4);
  const ComplexImage x = random_ellipse_phantom(32, rng);
  CHECK(simulate_acquisition(x, SamplingMask::full(32, 32)) == fft2c(x));
  CHECK(max_abs_diff(zero_fill(simulate_acquisition(x, SamplingMask::full(32, 32))), x) < 1e-10);
  CHECK(simulate_acquisition(ComplexImage(64, 64), generate_mask({}, 64, 64)) == KSpaceData(64, 64));
  CHECK(zero_fill(KSpaceData(8, 8)) == ComplexImage(8, 8));
  CHECK_THROWS_AS(simulate_acquisition(x, SamplingMask::full(16, 32)), InvalidInput);
}

TEST_CASE("zero filling degrades with stronger undersampling") {
  Rng rng(21);
  const ComplexImage x = random_ellipse_phantom(64, rng);
  MaskSpec lo, hi;
  lo.rate = 0.125;
  hi.rate = 0.5;
  lo.seed = hi.seed = 5;
  const double p_lo = compare_images(zero_fill(simulate_acquisition(x, generate_mask(lo, 64, 64))), x).psnr;
  const double p_hi = compare_images(zero_fill(simulate_acquisition(x, generate_mask(hi, 64, 64))), x).psnr;
  CHECK(p_lo < p_hi);
}

TEST_CASE("masks reject partial rows") {
  std::vector<std::uint8_t> g(16, 0);
  g[5] = 1;
  CHECK_THROWS_AS(SamplingMask::from_grid(4, 4, g), InvalidInput);
  g.assign(16, 0);
  for (int j = 0; j < 4; ++j) g[4 + j] = 1;
  CHECK(SamplingMask::from_grid(4, 4, g).rows_sampled() == std::vector<std::size_t>{1});
}
