#include "miccan/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <fstream>
#include <cmath>
#include <map>

#include "json.hpp"
#include "miccan/io.hpp"
#include "miccan/phantom.hpp"
#include "miccan/rng.hpp"

namespace miccan {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(Split s) {
  switch (s) {
    case Split::TRAIN: return "train";
    case Split::VAL: return "val";
    case Split::TEST: return "test";
  }
  return "?";
}

Split parse_split(const std::string& s) {
  if (s == "train") return Split::TRAIN;
  if (s == "val") return Split::VAL;
  if (s == "test") return Split::TEST;
  throw InvalidInput("unknown split '" + s + "'");
}

std::vector<ManifestEntry> DatasetManifest::entries_in(Split s) const {
  std::vector<ManifestEntry> out;
  for (const auto& e : entries)
    if (e.split == s) out.push_back(e);
  return out;
}

void DatasetManifest::validate() const {
  std::map<std::string, Split> owner;
  for (const auto& e : entries) {
    for (const auto* p : {&e.image, &e.mask, &e.kspace}) {
      const auto [it, fresh] = owner.emplace(*p, e.split);
      if (!fresh && it->second != e.split)
        throw InvalidInput("path '" + *p + "' appears in both " + to_string(it->second) + " and " +
                           to_string(e.split) + " splits");
    }
  }
}

SplitCounts split_counts(std::size_t count) {
  SplitCounts c;
  c.train = count * 70 / 100;
  c.val = count * 10 / 100;
  c.test = count - c.train - c.val;
  return c;
}

namespace {

Split split_for(std::size_t index, const SplitCounts& c) {
  if (index < c.train) return Split::TRAIN;
  if (index < c.train + c.val) return Split::VAL;
  return Split::TEST;
}

std::string numbered(const char* stem, std::size_t i, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%04zu%s", stem, i, ext);
  return buf;
}

// Writes the image, its mask and the simulated k-space; returns the entry.
ManifestEntry write_sample(const fs::path& root, std::size_t index, Split split, const ComplexImage& truth,
                           bool real_valued, const MaskSpec& spec) {
  ManifestEntry e;
  e.split = split;
  e.image = "images/" + numbered("img", index, ".micv");
  e.mask = "masks/" + numbered("mask", index, ".micm");
  e.kspace = "kspace/" + numbered("ksp", index, ".micv");

  const SamplingMask mask = generate_mask(spec, truth.height(), truth.width());
  const KSpaceData y = simulate_acquisition(truth, mask);
  if (real_valued) {
    RealImage r(truth.height(), truth.width());
    r.values = truth.real();
    io::write_array(root / e.image, io::to_container(r));
  } else {
    io::write_array(root / e.image, io::to_container(truth));
  }
  io::write_mask(root / e.mask, mask);
  io::write_array(root / e.kspace, io::to_container(y));
  return e;
}

}  // namespace

std::uint64_t image_seed(std::uint64_t seed, std::size_t index) { return derive_seed(derive_seed(seed, 0), index); }
std::uint64_t mask_seed(std::uint64_t seed, std::size_t index) { return derive_seed(derive_seed(seed, 1), index); }

void write_manifest(const DatasetManifest& m) {
  m.validate();
  json j;
  j["format"] = "miccan-dataset";
  j["version"] = 1;
  j["source"] = m.source == DataSource::PHANTOM ? "PHANTOM" : "USER";
  j["seed"] = m.seed;
  j["mask_spec"] = {{"rate", m.mask_spec.rate},
                    {"center_lines", m.mask_spec.center_lines},
                    {"sigma_fraction", m.mask_spec.sigma_fraction}};
  json entries = json::array();
  for (const auto& e : m.entries)
    entries.push_back({{"split", to_string(e.split)}, {"image", e.image}, {"mask", e.mask}, {"kspace", e.kspace}});
  j["entries"] = std::move(entries);
  fs::create_directories(m.root);
  std::ofstream f(m.root / "manifest.json", std::ios::trunc);
  if (!f) throw FormatError("cannot write manifest in '" + m.root.string() + "'");
  f << j.dump(2) << '\n';
}

DatasetManifest load_manifest(const fs::path& dir) {
  const fs::path file = fs::is_directory(dir) ? dir / "manifest.json" : dir;
  std::ifstream f(file);
  if (!f) throw FormatError("cannot open manifest '" + file.string() + "'");
  DatasetManifest m;
  m.root = file.parent_path();
  try {
    const json j = json::parse(f);
    m.source = j.at("source").get<std::string>() == "USER" ? DataSource::USER : DataSource::PHANTOM;
    m.seed = j.at("seed").get<std::uint64_t>();
    const auto& ms = j.at("mask_spec");
    m.mask_spec.rate = ms.at("rate").get<double>();
    m.mask_spec.center_lines = ms.at("center_lines").get<std::size_t>();
    m.mask_spec.sigma_fraction = ms.at("sigma_fraction").get<double>();
    for (const auto& e : j.at("entries")) {
      m.entries.push_back({parse_split(e.at("split").get<std::string>()), e.at("image").get<std::string>(),
                           e.at("mask").get<std::string>(), e.at("kspace").get<std::string>()});
    }
  } catch (const json::exception& e) {
    throw FormatError("malformed manifest '" + file.string() + "': " + e.what());
  }
  m.validate();
  return m;
}

std::vector<Sample> load_split(const DatasetManifest& m, Split s) {
  std::vector<Sample> out;
  for (const auto& e : m.entries_in(s)) {
    Sample smp;
    smp.name = fs::path(e.image).stem().string();
    smp.truth = io::read_image(m.root / e.image);
    smp.mask = io::read_mask(m.root / e.mask);
    smp.measurement = io::read_kspace(m.root / e.kspace);
    if (!smp.truth.same_shape(smp.measurement) || smp.truth.height() != smp.mask.height() ||
        smp.truth.width() != smp.mask.width())
      throw InvalidInput("entry '" + e.image + "': image, mask and k-space shapes disagree");
    out.push_back(std::move(smp));
  }
  return out;
}

DatasetManifest generate_phantom_dataset(std::size_t count, std::size_t size, std::uint64_t seed,
                                         const fs::path& out_dir, MaskSpec mask_spec) {
  if (size < 32 || !std::has_single_bit(size)) throw InvalidInput("phantom size must be a power of two >= 32");
  if (count == 0) throw InvalidInput("phantom count must be positive");
  mask_spec.validate(size);

  DatasetManifest m;
  m.source = DataSource::PHANTOM;
  m.root = out_dir;
  m.seed = seed;
  m.mask_spec = mask_spec;
  const SplitCounts counts = split_counts(count);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng(image_seed(seed, i));
    const ComplexImage truth = random_ellipse_phantom(size, rng);
    MaskSpec spec = mask_spec;
    spec.seed = mask_seed(seed, i);
    m.entries.push_back(write_sample(out_dir, i, split_for(i, counts), truth, true, spec));
  }
  write_manifest(m);
  return m;
}

DatasetManifest ingest_dataset(const fs::path& in_dir, const MaskSpec& mask_spec, std::uint64_t seed,
                               const fs::path& out_dir) {
  if (!fs::is_directory(in_dir)) throw IngestionError("input directory '" + in_dir.string() + "' does not exist");
  std::vector<fs::path> files;
  for (const auto& de : fs::directory_iterator(in_dir))
    if (de.is_regular_file() && de.path().extension() == ".micv") files.push_back(de.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw IngestionError("no .micv images found in '" + in_dir.string() + "' (empty manifest)");

  DatasetManifest m;
  m.source = DataSource::USER;
  m.root = out_dir;
  m.seed = seed;
  m.mask_spec = mask_spec;
  const SplitCounts counts = split_counts(files.size());
  for (std::size_t i = 0; i < files.size(); ++i) {
    ComplexImage img;
    try {
      img = io::read_image(files[i]);
    } catch (const Error& e) {
      throw IngestionError("cannot ingest '" + files[i].string() + "': " + e.what());
    }
    double peak = 0.0;
    for (std::size_t k = 0; k < img.size(); ++k) peak = std::max(peak, std::hypot(img.real()[k], img.imag()[k]));
    if (peak > 0.0) img *= 1.0 / peak;
    MaskSpec spec = mask_spec;
    spec.seed = mask_seed(seed, i);
    try {
      m.entries.push_back(write_sample(out_dir, i, split_for(i, counts), img, false, spec));
    } catch (const InfeasibleSpec& e) {
      throw IngestionError("cannot ingest '" + files[i].string() + "': " + e.what());
    }
  }
  write_manifest(m);
  return m;
}

}  // namespace miccan
