#include "miccan/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <string>

namespace miccan::io {
namespace {

class ByteWriter {
 public:
  void bytes(std::string_view s) { out_.insert(out_.end(), s.begin(), s.end()); }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) { uint(v, 2); }
  void u32(std::uint32_t v) { uint(v, 4); }
  void u64(std::uint64_t v) { uint(v, 8); }
  void f64(double v) { uint(std::bit_cast<std::uint64_t>(v), 8); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  void uint(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> out_;
};

class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> in, const char* what) : in_(in), what_(what) {}
  void magic(std::string_view m) {
    need(m.size());
    if (std::memcmp(in_.data() + pos_, m.data(), m.size()) != 0)
      throw FormatError(std::string(what_) + ": bad magic bytes (expected \"" + std::string(m) + "\")");
    pos_ += m.size();
  }
  std::uint8_t u8() { return static_cast<std::uint8_t>(uint(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(uint(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(uint(4)); }
  std::uint64_t u64() { return uint(8); }
  double f64() { return std::bit_cast<double>(uint(8)); }
  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::span<const std::uint8_t> raw(std::size_t n) {
    need(n);
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return in_.size() - pos_; }
  void finish() const {
    if (pos_ != in_.size()) throw FormatError(std::string(what_) + ": trailing bytes after payload");
  }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw FormatError(std::string(what_) + ": truncated data");
  }
  std::uint64_t uint(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(in_[pos_ + static_cast<std::size_t>(i)]) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
  const char* what_;
};

}  // namespace

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open '" + path.string() + "' for reading");
  std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return data;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw FormatError("cannot open '" + path.string() + "' for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw FormatError("write to '" + path.string() + "' failed");
}

// --- arrays -----------------------------------------------------------------

std::vector<std::uint8_t> encode_array(const ArrayContainer& a) {
  const std::size_t n = static_cast<std::size_t>(a.height) * a.width;
  if (a.real.size() != n || (a.dtype == DType::C128 && a.imag.size() != n))
    throw InvalidInput("array container payload does not match its dimensions");
  ByteWriter w;
  w.bytes("MICV");
  w.u8(kArrayVersion);
  w.u8(static_cast<std::uint8_t>(a.dtype));
  w.u32(a.height);
  w.u32(a.width);
  for (std::size_t k = 0; k < n; ++k) {
    w.f64(a.real[k]);
    if (a.dtype == DType::C128) w.f64(a.imag[k]);
  }
  return w.take();
}

ArrayContainer decode_array(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "array container");
  r.magic("MICV");
  if (const auto v = r.u8(); v != kArrayVersion)
    throw FormatError("array container: unsupported version " + std::to_string(v));
  const std::uint8_t tag = r.u8();
  if (tag > 1) throw FormatError("array container: unknown dtype tag " + std::to_string(tag));
  ArrayContainer a;
  a.dtype = static_cast<DType>(tag);
  a.height = r.u32();
  a.width = r.u32();
  if (a.height == 0 || a.width == 0) throw FormatError("array container: zero dimension");
  const std::size_t n = static_cast<std::size_t>(a.height) * a.width;
  const std::size_t per = a.dtype == DType::C128 ? 16 : 8;
  if (r.remaining() != n * per) throw FormatError("array container: payload size does not match header");
  a.real.resize(n);
  if (a.dtype == DType::C128) a.imag.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    a.real[k] = r.f64();
    if (a.dtype == DType::C128) a.imag[k] = r.f64();
  }
  r.finish();
  return a;
}

ArrayContainer to_container(const RealImage& image) {
  return {DType::F64, static_cast<std::uint32_t>(image.height), static_cast<std::uint32_t>(image.width),
          image.values, {}};
}

void write_array(const std::filesystem::path& path, const ArrayContainer& a) { write_file(path, encode_array(a)); }

ArrayContainer read_array(const std::filesystem::path& path) {
  try {
    return decode_array(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

ComplexImage read_image(const std::filesystem::path& path) { return to_complex<ImageDomain>(read_array(path)); }
KSpaceData read_kspace(const std::filesystem::path& path) { return to_complex<FourierDomain>(read_array(path)); }

// --- masks ------------------------------------------------------------------

std::vector<std::uint8_t> encode_mask(const SamplingMask& mask) {
  ByteWriter w;
  w.bytes("MICM");
  w.u8(kMaskVersion);
  w.u32(static_cast<std::uint32_t>(mask.height()));
  w.u32(static_cast<std::uint32_t>(mask.width()));
  for (std::uint8_t v : mask.grid()) w.u8(v);
  return w.take();
}

SamplingMask decode_mask(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "mask file");
  r.magic("MICM");
  if (const auto v = r.u8(); v != kMaskVersion) throw FormatError("mask file: unsupported version " + std::to_string(v));
  const std::uint32_t h = r.u32();
  const std::uint32_t w = r.u32();
  if (h == 0 || w == 0) throw FormatError("mask file: zero dimension");
  const std::size_t n = static_cast<std::size_t>(h) * w;
  if (r.remaining() != n) throw FormatError("mask file: payload size does not match header");
  const auto raw = r.raw(n);
  try {
    return SamplingMask::from_grid(h, w, {raw.begin(), raw.end()});
  } catch (const InvalidInput& e) {
    throw FormatError(std::string("mask file: ") + e.what());
  }
}

void write_mask(const std::filesystem::path& path, const SamplingMask& mask) { write_file(path, encode_mask(mask)); }

SamplingMask read_mask(const std::filesystem::path& path) {
  try {
    return decode_mask(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

// --- checkpoints ------------------------------------------------------------

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  const ModelConfig& c = ckpt.config;
  ByteWriter w;
  w.bytes("MICC");
  w.u8(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(c.n_blocks_N));
  w.u32(static_cast<std::uint32_t>(c.encoder_depth));
  w.u32(static_cast<std::uint32_t>(c.base_channels));
  w.u32(static_cast<std::uint32_t>(c.reduction_ratio_r));
  w.u8(c.use_attention ? 1 : 0);
  w.u8(c.use_long_skip ? 1 : 0);
  w.f64(c.dc.noise_level_v);
  w.u64(c.init_seed);
  w.u32(static_cast<std::uint32_t>(ckpt.params.size()));
  for (const NamedArray& a : ckpt.params.arrays()) {
    if (a.name.size() > 0xFFFF) throw InvalidInput("parameter name too long");
    w.u16(static_cast<std::uint16_t>(a.name.size()));
    w.bytes(a.name);
    w.u8(0);
    w.u32(static_cast<std::uint32_t>(a.dims.size()));
    for (std::uint32_t d : a.dims) w.u32(d);
    for (double v : a.values) w.f64(v);
  }
  return w.take();
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "checkpoint");
  r.magic("MICC");
  if (const auto v = r.u8(); v != kCheckpointVersion)
    throw FormatError("checkpoint: unsupported version " + std::to_string(v));
  Checkpoint ck;
  ModelConfig& c = ck.config;
  c.n_blocks_N = r.u32();
  c.encoder_depth = r.u32();
  c.base_channels = r.u32();
  c.reduction_ratio_r = r.u32();
  const auto attn = r.u8();
  const auto skip = r.u8();
  if (attn > 1 || skip > 1) throw FormatError("checkpoint: boolean flag out of range");
  c.use_attention = attn == 1;
  c.use_long_skip = skip == 1;
  c.dc.noise_level_v = r.f64();
  c.init_seed = r.u64();
  const std::uint32_t count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedArray a;
    a.name = r.str(r.u16());
    if (const auto tag = r.u8(); tag != 0)
      throw FormatError("checkpoint: array '" + a.name + "' has unsupported dtype tag " + std::to_string(tag));
    const std::uint32_t rank = r.u32();
    if (rank > 8) throw FormatError("checkpoint: array '" + a.name + "' has implausible rank");
    std::size_t n = 1;
    for (std::uint32_t d = 0; d < rank; ++d) {
      a.dims.push_back(r.u32());
      n *= a.dims.back();
    }
    if (r.remaining() < n * 8) throw FormatError("checkpoint: truncated payload for '" + a.name + "'");
    a.values.resize(n);
    for (double& v : a.values) v = r.f64();
    try {
      ck.params.add(std::move(a));
    } catch (const InvalidInput& e) {
      throw FormatError(std::string("checkpoint: ") + e.what());
    }
  }
  r.finish();
  return ck;
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  write_file(path, encode_checkpoint(ckpt));
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  try {
    return decode_checkpoint(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace miccan::io
