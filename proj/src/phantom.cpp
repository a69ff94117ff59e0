#include "miccan/phantom.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace miccan {
namespace {

struct Ellipse {
  double cx, cy, a, b, angle;
};

bool inside(const Ellipse& e, double x, double y) {
  const double c = std::cos(e.angle), s = std::sin(e.angle);
  const double dx = x - e.cx, dy = y - e.cy;
  const double u = (c * dx + s * dy) / e.a;
  const double v = (-s * dx + c * dy) / e.b;
  return u * u + v * v <= 1.0;
}

// Pixel centre in [-1, 1]², y pointing up.
double coord(std::size_t idx, std::size_t n) {
  return (2.0 * static_cast<double>(idx) + 1.0) / static_cast<double>(n) - 1.0;
}

}  // namespace

ComplexImage random_ellipse_phantom(std::size_t size, Rng& rng) {
  if (size == 0) throw InvalidInput("phantom size must be positive");
  struct Region {
    Ellipse shape;
    double base, gx, gy;
  };
  std::vector<Region> regions;
  regions.push_back({{rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05), rng.uniform(0.7, 0.9),
                      rng.uniform(0.6, 0.85), rng.uniform(-0.3, 0.3)},
                     rng.uniform(0.3, 0.5), rng.uniform(-0.15, 0.15), rng.uniform(-0.15, 0.15)});
  const std::size_t inner = 4 + rng.below(5);
  for (std::size_t k = 0; k < inner; ++k) {
    regions.push_back({{rng.uniform(-0.45, 0.45), rng.uniform(-0.45, 0.45), rng.uniform(0.08, 0.4),
                        rng.uniform(0.08, 0.4), rng.uniform(0.0, std::numbers::pi)},
                       rng.uniform(0.2, 1.0), rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)});
  }

  ComplexImage img(size, size);
  for (std::size_t i = 0; i < size; ++i) {
    const double y = -coord(i, size);
    for (std::size_t j = 0; j < size; ++j) {
      const double x = coord(j, size);
      double v = 0.0;
      for (const auto& r : regions)
        if (inside(r.shape, x, y)) v = r.base + r.gx * (x - r.shape.cx) + r.gy * (y - r.shape.cy);
      img.real()[i * size + j] = std::clamp(v, 0.0, 1.0);
    }
  }
  const double peak = *std::max_element(img.real().begin(), img.real().end());
  if (peak > 0.0)
    for (double& v : img.real()) v /= peak;
  return img;
}

ComplexImage shepp_logan_phantom(std::size_t size) {
  if (size == 0) throw InvalidInput("phantom size must be positive");
  struct Term {
    double value;
    Ellipse shape;
  };
  constexpr double deg = std::numbers::pi / 180.0;
  const std::array<Term, 10> terms = {{
      {1.0, {0.0, 0.0, 0.69, 0.92, 0.0}},
      {-0.8, {0.0, -0.0184, 0.6624, 0.874, 0.0}},
      {-0.2, {0.22, 0.0, 0.11, 0.31, -18.0 * deg}},
      {-0.2, {-0.22, 0.0, 0.16, 0.41, 18.0 * deg}},
      {0.1, {0.0, 0.35, 0.21, 0.25, 0.0}},
      {0.1, {0.0, 0.1, 0.046, 0.046, 0.0}},
      {0.1, {0.0, -0.1, 0.046, 0.046, 0.0}},
      {0.1, {-0.08, -0.605, 0.046, 0.023, 0.0}},
      {0.1, {0.0, -0.606, 0.023, 0.023, 0.0}},
      {0.1, {0.06, -0.605, 0.023, 0.046, 0.0}},
  }};
  ComplexImage img(size, size);
  for (std::size_t i = 0; i < size; ++i) {
    const double y = -coord(i, size);
    for (std::size_t j = 0; j < size; ++j) {
      const double x = coord(j, size);
      double v = 0.0;
      for (const auto& t : terms)
        if (inside(t.shape, x, y)) v += t.value;
      img.real()[i * size + j] = std::clamp(v, 0.0, 1.0);
    }
  }
  return img;
}

}  // namespace miccan
