#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "miccan/errors.hpp"

namespace miccan {

/// Cartesian sampling pattern: whole k-space rows (phase-encode lines) are
/// either measured or not. The grid is derived from the row set.
class SamplingMask {
 public:
  SamplingMask() = default;
  SamplingMask(std::size_t height, std::size_t width, const std::vector<std::size_t>& rows);

  /// Builds a mask from an explicit grid; throws if any row is partially sampled.
  static SamplingMask from_grid(std::size_t height, std::size_t width, std::vector<std::uint8_t> grid);
  static SamplingMask full(std::size_t height, std::size_t width);
  static SamplingMask none(std::size_t height, std::size_t width);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  /// Sorted ascending.
  const std::vector<std::size_t>& rows_sampled() const noexcept { return rows_; }
  const std::vector<std::uint8_t>& grid() const noexcept { return grid_; }

  bool sampled(std::size_t i, std::size_t j) const noexcept { return grid_[i * width_ + j] != 0; }
  bool row_sampled(std::size_t i) const noexcept { return grid_[i * width_] != 0; }
  double sampling_rate() const noexcept { return static_cast<double>(rows_.size()) / static_cast<double>(height_); }

  bool operator==(const SamplingMask&) const = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<std::size_t> rows_;
  std::vector<std::uint8_t> grid_;
};

}  // namespace miccan
