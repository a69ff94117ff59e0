#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "miccan/complex_image.hpp"
#include "miccan/mask.hpp"
#include "miccan/model_config.hpp"
#include "miccan/parameters.hpp"

namespace miccan::io {

// Array container: "MICV", u8 version = 1, u8 dtype (0 = f64, 1 = c128 as
// interleaved f64 pairs), u32 H, u32 W, row-major payload. Little-endian.
inline constexpr std::uint8_t kArrayVersion = 1;
enum class DType : std::uint8_t { F64 = 0, C128 = 1 };

struct ArrayContainer {
  DType dtype = DType::F64;
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::vector<double> real;
  std::vector<double> imag;  ///< empty for F64

  bool operator==(const ArrayContainer&) const = default;
};

std::vector<std::uint8_t> encode_array(const ArrayContainer& a);
ArrayContainer decode_array(std::span<const std::uint8_t> bytes);

ArrayContainer to_container(const RealImage& image);
template <class Tag>
ArrayContainer to_container(const ComplexPlanes<Tag>& a) {
  return {DType::C128, static_cast<std::uint32_t>(a.height()), static_cast<std::uint32_t>(a.width()), a.real(),
          a.imag()};
}
/// F64 containers become complex arrays with a zero imaginary plane.
template <class Tag>
ComplexPlanes<Tag> to_complex(const ArrayContainer& a) {
  std::vector<double> imag = a.dtype == DType::C128 ? a.imag : std::vector<double>(a.real.size(), 0.0);
  return ComplexPlanes<Tag>(a.height, a.width, a.real, std::move(imag));
}

void write_array(const std::filesystem::path& path, const ArrayContainer& a);
ArrayContainer read_array(const std::filesystem::path& path);
ComplexImage read_image(const std::filesystem::path& path);
KSpaceData read_kspace(const std::filesystem::path& path);

// Mask file: "MICM", u8 version = 1, u32 H, u32 W, H×W bytes of 0/1.
inline constexpr std::uint8_t kMaskVersion = 1;
std::vector<std::uint8_t> encode_mask(const SamplingMask& mask);
SamplingMask decode_mask(std::span<const std::uint8_t> bytes);
void write_mask(const std::filesystem::path& path, const SamplingMask& mask);
SamplingMask read_mask(const std::filesystem::path& path);

// Checkpoint: "MICC", u8 version, model config block, u32 array count, then
// per array: u16 name length, UTF-8 name, u8 dtype tag (0 = f64), u32 rank,
// rank × u32 dims, f64 payload.
inline constexpr std::uint8_t kCheckpointVersion = 1;
struct Checkpoint {
  ModelConfig config;
  ParameterSet params;

  bool operator==(const Checkpoint&) const = default;
};
std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace miccan::io
