#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "miccan/complex_image.hpp"
#include "miccan/mask.hpp"
#include "miccan/sampling.hpp"

namespace miccan {

enum class Split { TRAIN, VAL, TEST };
enum class DataSource { PHANTOM, USER };

std::string to_string(Split s);
Split parse_split(const std::string& s);

struct ManifestEntry {
  Split split = Split::TRAIN;
  std::string image;  ///< paths relative to the manifest directory
  std::string mask;
  std::string kspace;
};

/// On-disk dataset description, stored as <root>/manifest.json.
struct DatasetManifest {
  DataSource source = DataSource::PHANTOM;
  std::filesystem::path root;
  std::uint64_t seed = 0;
  MaskSpec mask_spec;
  std::vector<ManifestEntry> entries;

  std::vector<ManifestEntry> entries_in(Split s) const;
  /// Throws InvalidInput when a path appears in more than one split.
  void validate() const;
};

struct SplitCounts {
  std::size_t train = 0, val = 0, test = 0;
};
/// 70/10/20 by index (floor for train and val, remainder to test).
SplitCounts split_counts(std::size_t count);

/// A fully loaded example: ground truth, its mask and the simulated measurement.
struct Sample {
  std::string name;
  ComplexImage truth;
  SamplingMask mask;
  KSpaceData measurement;
};

void write_manifest(const DatasetManifest& m);
DatasetManifest load_manifest(const std::filesystem::path& dir);
/// Loads every entry of a split; checks that the three arrays agree in shape.
std::vector<Sample> load_split(const DatasetManifest& m, Split s);

/// Per-image seeds used by generation and ingestion.
std::uint64_t image_seed(std::uint64_t seed, std::size_t index);
std::uint64_t mask_seed(std::uint64_t seed, std::size_t index);

/// Writes `count` random ellipse phantoms with masks and simulated k-space.
DatasetManifest generate_phantom_dataset(std::size_t count, std::size_t size, std::uint64_t seed,
                                         const std::filesystem::path& out_dir, MaskSpec mask_spec = {});

/// Reads every *.micv image in `in_dir` (sorted by file name), normalises its
/// magnitude to a maximum of 1, simulates an acquisition and writes a dataset.
DatasetManifest ingest_dataset(const std::filesystem::path& in_dir, const MaskSpec& mask_spec, std::uint64_t seed,
                               const std::filesystem::path& out_dir);

}  // namespace miccan
