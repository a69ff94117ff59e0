#pragma once

#include <cstddef>
#include <cstdint>

#include "miccan/data_consistency.hpp"

namespace miccan {

/// Architecture of the cascade. Each of the n_blocks_N blocks is a U-net with
/// encoder_depth downsampling steps; scale s carries base_channels·2^s
/// channels and the bottleneck sits at scale encoder_depth.
struct ModelConfig {
  std::size_t n_blocks_N = 5;
  std::size_t encoder_depth = 3;
  std::size_t base_channels = 32;
  std::size_t reduction_ratio_r = 8;
  bool use_attention = true;
  bool use_long_skip = true;
  DCConfig dc = DCConfig::noiseless();
  std::uint64_t init_seed = 0;

  std::size_t channels_at(std::size_t scale) const noexcept { return base_channels << scale; }
  /// Throws InvalidConfig when the configuration is inconsistent.
  void validate() const;
  /// Throws InvalidInput unless H and W are divisible by 2^encoder_depth.
  void check_image_size(std::size_t height, std::size_t width) const;

  bool operator==(const ModelConfig&) const = default;
};

}  // namespace miccan
