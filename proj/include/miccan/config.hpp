#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "miccan/losses.hpp"
#include "miccan/model_config.hpp"
#include "miccan/sampling.hpp"
#include "miccan/solvers.hpp"
#include "miccan/training.hpp"

namespace miccan {

/// Everything a CLI run can be configured with.
struct RunConfig {
  ModelConfig model;
  LossConfig loss;
  TrainConfig train;
  MaskSpec mask;
  SolverConfig wavelet = SolverConfig::wavelet_default();
  SolverConfig tv = SolverConfig::tv_default();

  bool operator==(const RunConfig&) const = default;
};

using KeyValues = std::map<std::string, std::string>;

/// Parses flat `key = value` text. '#' starts a comment; blank lines are
/// ignored. Duplicate keys and lines without '=' are rejected.
KeyValues parse_key_values(std::string_view text);

/// Applies keys on top of `base`. A `preset` key, if present, is applied
/// first. Unknown keys and unparsable values throw InvalidConfig.
RunConfig apply_config(RunConfig base, const KeyValues& kv);
RunConfig load_config_file(const std::filesystem::path& path, RunConfig base = {});

/// Presets: "mrn5", "miccan-a", "miccan-b", "miccan-c".
RunConfig preset(const std::string& name);

/// Full key = value listing; apply_config(RunConfig{}, parse(text)) round-trips.
std::string to_config_text(const RunConfig& cfg);

/// 64-bit FNV-1a of to_config_text, as 16 hex digits.
std::string config_fingerprint(const RunConfig& cfg);

std::string to_string(Optimizer o);
std::string to_string(LossPreset p);

}  // namespace miccan
