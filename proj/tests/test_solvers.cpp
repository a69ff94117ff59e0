#include "doctest.h"
#include "miccan/fourier.hpp"
#include "miccan/metrics.hpp"
#include "miccan/phantom.hpp"
#include "miccan/sampling.hpp"
#include "miccan/solvers.hpp"
#include "miccan/wavelet.hpp"
#include "support.hpp"

using namespace miccan;
using namespace testing;

TEST_CASE("db4 filter is orthonormal with four vanishing moments") {
  const auto& h = Db4Wavelet2D::lowpass();
  double sum = 0.0, sq = 0.0;
  for (double v : h) {
    sum += v;
    sq += v * v;
  }
  CHECK(sum == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(sq == doctest::Approx(1.0).epsilon(1e-14));
  for (std::size_t shift = 2; shift < 8; shift += 2) {
    double acc = 0.0;
    for (std::size_t k = 0; k + shift < 8; ++k) acc += h[k] * h[k + shift];
    CHECK(std::abs(acc) < 1e-14);
  }
  for (int p = 0; p < 4; ++p) {
    double m = 0.0;
    for (std::size_t k = 0; k < 8; ++k) m += ((k % 2) ? -1.0 : 1.0) * h[7 - k] * std::pow(double(k), p);
    CHECK(std::abs(m) < 1e-10);
  }
}

TEST_CASE("wavelet transform matches reference coefficients") {
  // Values from an independent periodized db4 implementation (3 levels, Mallat layout).
  const std::size_t n = 16;
  std::vector<double> x(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      x[i * n + j] = std::sin(0.3 * i + 0.05 * j * j) + 0.25 * std::cos(0.7 * j - 0.2 * i);
  Db4Wavelet2D(3).forward(x, n, n);
  const std::vector<std::tuple<int, int, double>> ref = {
      {0, 0, 2.8208125098064305},      {1, 1, 0.8789399849293895},     {0, 3, -1.5467316447623558},
      {2, 5, -1.4302527636398576},     {5, 2, -0.1443452645046538},    {7, 7, 1.221627687540288},
      {3, 12, 0.3421415324058417},     {12, 3, 0.002377195823485113},  {9, 14, -0.0005622393131377357},
      {15, 15, 0.05755773512369936},
  };
  for (auto [i, j, v] : ref) CHECK(x[i * n + j] == doctest::Approx(v).epsilon(1e-12));
}

TEST_CASE("wavelet roundtrip and energy") {
  Rng rng(1);
  const Db4Wavelet2D w(3);
  for (auto [h, wd] : {std::pair{16, 16}, {32, 64}, {64, 64}}) {
    const ComplexImage x = random_image(rng, h, wd);
    const ComplexImage c = w.forward(x);
    CHECK(std::abs(l2_norm(c) - l2_norm(x)) < 1e-10);
    CHECK(max_abs_diff(w.inverse(c), x) < 1e-12);
  }
  CHECK_THROWS_AS(w.check_size(48, 64), InvalidInput);
  CHECK_THROWS_AS(w.check_size(4, 4), InvalidInput);
}

TEST_CASE("soft threshold closed form") {
  Rng rng(2);
  for (int t = 0; t < 200; ++t) {
    const std::complex<double> v(rng.normal(), rng.normal());
    const double tau = rng.uniform(0.0, 1.5);
    const auto s = soft_threshold(v, tau);
    CHECK(std::abs(s) == doctest::Approx(std::max(std::abs(v) - tau, 0.0)).epsilon(1e-12));
    if (std::abs(s) > 0.0) CHECK(std::abs(std::arg(s) - std::arg(v)) < 1e-12);
  }
  CHECK(soft_threshold(std::complex<double>(-2.0, 0.0), 0.5) == std::complex<double>(-1.5, 0.0));
}

TEST_CASE("unregularized solvers recover the truth from full data") {
  Rng rng(3);
  const ComplexImage x = random_ellipse_phantom(32, rng);
  const SamplingMask full = SamplingMask::full(32, 32);
  const KSpaceData y = simulate_acquisition(x, full);
  for (SolverConfig cfg : {SolverConfig::wavelet_default(), SolverConfig::tv_default()}) {
    cfg.reg_weight = 0.0;
    CHECK(max_abs_diff(solve_classical(y, full, cfg), x) < 1e-6);
  }
}

TEST_CASE("TV keeps a constant image constant") {
  ComplexImage x(32, 32);
  for (double& v : x.real()) v = 0.6;
  MaskSpec spec;
  spec.rate = 0.33;
  const SamplingMask m = generate_mask(spec, 32, 32);
  const ComplexImage out = solve_tv(simulate_acquisition(x, m), m, SolverConfig::tv_default());
  CHECK(max_abs_diff(out, x) < 1e-6);
}

TEST_CASE("solver traces, determinism and fixed points") {
  const ComplexImage x = shepp_logan_phantom(64);
  MaskSpec spec;
  spec.rate = 0.33;
  const SamplingMask m = generate_mask(spec, 64, 64);
  const KSpaceData y = simulate_acquisition(x, m);
  const double zf = compare_images(zero_fill(y), x).psnr;
  for (const SolverConfig& cfg : {SolverConfig::wavelet_default(), SolverConfig::tv_default()}) {
    const SolverTrace tr = cfg.regularizer == Regularizer::TV ? solve_tv_traced(y, m, cfg)
                                                              : solve_wavelet_l1_traced(y, m, cfg);
    for (std::size_t k = 1; k < tr.objective.size(); ++k) CHECK(tr.objective[k] <= tr.objective[k - 1]);
    CHECK(tr.converged);
    CHECK(tr.relative_change.back() < cfg.tol);
    CHECK(compare_images(tr.image, x).psnr >= zf + 1.0);
    CHECK(solve_classical(y, m, cfg) == tr.image);

    if (cfg.regularizer == Regularizer::TV) {
      REQUIRE(tr.raw_objective.size() == tr.objective.size());
      double best = tr.raw_objective[0];
      for (std::size_t k = 0; k < tr.objective.size(); ++k) {
        best = std::min(best, tr.raw_objective[k]);
        CHECK(tr.objective[k] == best);
      }
      CHECK(tv_objective(tr.image, y, m, cfg.reg_weight) == tr.objective.back());
    } else {
      SolverConfig one = cfg;
      one.max_iters = 1;
      const SolverTrace again = solve_wavelet_l1_traced(y, m, one, &tr.image);
      CHECK(l2_norm(again.image - tr.image) / l2_norm(tr.image) < 10.0 * cfg.tol);
      CHECK(wavelet_l1_objective(tr.image, y, m, cfg.reg_weight) == tr.objective.back());
    }
  }
}

TEST_CASE("solver errors") {
  const SamplingMask m = SamplingMask::full(48, 48);
  CHECK_THROWS_AS(solve_wavelet_l1(KSpaceData(48, 48), m, SolverConfig::wavelet_default()), InvalidInput);
  SolverConfig bad = SolverConfig::tv_default();
  bad.tol = 0.0;
  CHECK_THROWS_AS(bad.validate(), InvalidConfig);
  bad = SolverConfig::tv_default();
  bad.max_iters = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidConfig);
  CHECK_THROWS_AS(solve_tv(KSpaceData(8, 8), SamplingMask::full(8, 4), SolverConfig::tv_default()), InvalidInput);
}
