#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

#include "miccan/complex_image.hpp"
#include "miccan/mask.hpp"
#include "miccan/rng.hpp"

namespace testing {

using namespace miccan;

inline ComplexImage random_image(Rng& rng, std::size_t h, std::size_t w, double scale = 1.0) {
  ComplexImage x(h, w);
  for (std::size_t k = 0; k < x.size(); ++k) {
    x.real()[k] = scale * rng.normal();
    x.imag()[k] = scale * rng.normal();
  }
  return x;
}

inline KSpaceData random_kspace(Rng& rng, std::size_t h, std::size_t w) {
  KSpaceData y(h, w);
  for (std::size_t k = 0; k < y.size(); ++k) {
    y.real()[k] = rng.normal();
    y.imag()[k] = rng.normal();
  }
  return y;
}

/// Random Cartesian mask with each row kept with probability p (at least one row).
inline SamplingMask random_mask(Rng& rng, std::size_t h, std::size_t w, double p = 0.4) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < h; ++i)
    if (rng.uniform() < p) rows.push_back(i);
  if (rows.empty()) rows.push_back(h / 2);
  return SamplingMask(h, w, rows);
}

/// |a − b| / max(|a|, |b|, floor).
inline double rel_err(double a, double b, double floor = 1e-8) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

/// Naive centered orthonormal DFT, written straight from the definition.
inline KSpaceData naive_dft(const ComplexImage& x) {
  const std::size_t h = x.height(), w = x.width();
  const long ch = static_cast<long>(h / 2), cw = static_cast<long>(w / 2);
  KSpaceData out(h, w);
  for (std::size_t u = 0; u < h; ++u)
    for (std::size_t v = 0; v < w; ++v) {
      std::complex<double> acc = 0.0;
      for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j < w; ++j) {
          const double ph = -2.0 * std::numbers::pi *
                            (static_cast<double>((static_cast<long>(u) - ch) * (static_cast<long>(i) - ch)) / h +
                             static_cast<double>((static_cast<long>(v) - cw) * (static_cast<long>(j) - cw)) / w);
          acc += x.at(i, j) * std::polar(1.0, ph);
        }
      out.set(u, v, acc / std::sqrt(static_cast<double>(h * w)));
    }
  return out;
}

/// Central difference of f along every scalar of `values`.
inline std::vector<double> numeric_gradient(std::vector<double>& values, const std::function<double()>& f,
                                            double step = 1e-6) {
  std::vector<double> g(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    const double keep = values[k];
    values[k] = keep + step;
    const double up = f();
    values[k] = keep - step;
    const double down = f();
    values[k] = keep;
    g[k] = (up - down) / (2.0 * step);
  }
  return g;
}

}  // namespace testing
