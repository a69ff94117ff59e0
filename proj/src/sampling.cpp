#include "miccan/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "miccan/fourier.hpp"
#include "miccan/rng.hpp"

namespace miccan {

SamplingMask::SamplingMask(std::size_t height, std::size_t width, const std::vector<std::size_t>& rows)
    : height_(height), width_(width), grid_(height * width, 0) {
  if (height == 0 || width == 0) throw InvalidInput("mask dimensions must be positive");
  std::vector<std::uint8_t> seen(height, 0);
  for (std::size_t r : rows) {
    if (r >= height) throw InvalidInput("mask row index out of range");
    seen[r] = 1;
  }
  for (std::size_t r = 0; r < height; ++r) {
    if (!seen[r]) continue;
    rows_.push_back(r);
    std::fill_n(grid_.begin() + static_cast<std::ptrdiff_t>(r * width), width, std::uint8_t{1});
  }
}

SamplingMask SamplingMask::from_grid(std::size_t height, std::size_t width, std::vector<std::uint8_t> grid) {
  if (grid.size() != height * width) throw InvalidInput("mask grid size does not match dimensions");
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < height; ++i) {
    const std::uint8_t first = grid[i * width];
    for (std::size_t j = 0; j < width; ++j) {
      const std::uint8_t v = grid[i * width + j];
      if (v > 1) throw InvalidInput("mask grid entries must be 0 or 1");
      if (v != first) throw InvalidInput("mask row " + std::to_string(i) + " is not uniformly sampled");
    }
    if (first) rows.push_back(i);
  }
  return SamplingMask(height, width, rows);
}

SamplingMask SamplingMask::full(std::size_t height, std::size_t width) {
  std::vector<std::size_t> rows(height);
  for (std::size_t i = 0; i < height; ++i) rows[i] = i;
  return SamplingMask(height, width, rows);
}

SamplingMask SamplingMask::none(std::size_t height, std::size_t width) { return SamplingMask(height, width, {}); }

std::size_t MaskSpec::rows_for(std::size_t height) const {
  return static_cast<std::size_t>(std::llround(rate * static_cast<double>(height)));
}

void MaskSpec::validate(std::size_t height) const {
  if (!(rate > 0.0 && rate <= 1.0)) throw InvalidConfig("mask rate must lie in (0, 1]");
  if (!(sigma_fraction > 0.0) || !std::isfinite(sigma_fraction))
    throw InvalidConfig("mask sigma_fraction must be positive");
  if (center_lines > height) throw InfeasibleSpec("center_lines exceeds mask height");
  if (rows_for(height) < center_lines)
    throw InfeasibleSpec("round(rate * H) = " + std::to_string(rows_for(height)) + " is below center_lines = " +
                         std::to_string(center_lines));
}

std::size_t center_block_start(std::size_t height, std::size_t center_lines) {
  return height / 2 - std::min(height / 2, center_lines / 2);
}

SamplingMask generate_mask(const MaskSpec& spec, std::size_t height, std::size_t width) {
  if (height == 0 || width == 0) throw InvalidInput("mask dimensions must be positive");
  spec.validate(height);

  const std::size_t total = spec.rows_for(height);
  std::vector<std::uint8_t> chosen(height, 0);
  const std::size_t start = center_block_start(height, spec.center_lines);
  for (std::size_t r = start; r < start + spec.center_lines; ++r) chosen[r] = 1;

  const double center = static_cast<double>(height / 2);
  const double sigma = spec.sigma_fraction * static_cast<double>(height);
  std::vector<double> weight(height, 0.0);
  for (std::size_t r = 0; r < height; ++r) {
    if (chosen[r]) continue;
    const double d = static_cast<double>(r) - center;
    weight[r] = std::exp(-0.5 * d * d / (sigma * sigma));
  }

  Rng rng(spec.seed);
  for (std::size_t picked = spec.center_lines; picked < total; ++picked) {
    double mass = 0.0;
    for (std::size_t r = 0; r < height; ++r)
      if (!chosen[r]) mass += weight[r];
    std::size_t pick = height;
    if (mass > 0.0) {
      const double u = rng.uniform() * mass;
      double acc = 0.0;
      for (std::size_t r = 0; r < height; ++r) {
        if (chosen[r]) continue;
        acc += weight[r];
        pick = r;
        if (u < acc) break;
      }
    } else {
      // Every remaining weight underflowed: fall back to a uniform draw.
      std::vector<std::size_t> free_rows;
      for (std::size_t r = 0; r < height; ++r)
        if (!chosen[r]) free_rows.push_back(r);
      pick = free_rows[rng.below(free_rows.size())];
    }
    chosen[pick] = 1;
  }

  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < height; ++r)
    if (chosen[r]) rows.push_back(r);
  return SamplingMask(height, width, rows);
}

KSpaceData simulate_acquisition(const ComplexImage& ground_truth, const SamplingMask& mask) {
  return forward_undersampled(ground_truth, mask);
}

ComplexImage zero_fill(const KSpaceData& y) { return ifft2c(y); }

}  // namespace miccan
