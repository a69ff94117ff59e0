#include "miccan/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <vector>

namespace miccan {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw InvalidConfig("invalid value '" + value + "' for key '" + key + "'");
}

double parse_double(const std::string& key, const std::string& v) {
  if (v == "inf" || v == "noiseless") return std::numeric_limits<double>::infinity();
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v);
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const bool hex = v.size() > 2 && v[0] == '0' && (v[1] == 'x' || v[1] == 'X');
  const char* first = v.data() + (hex ? 2 : 0);
  const auto [p, ec] = std::from_chars(first, v.data() + v.size(), out, hex ? 16 : 10);
  if (ec != std::errc() || p != v.data() + v.size() || first == v.data() + v.size()) bad_value(key, v);
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad_value(key, v);
}

std::string fmt(double d) {
  if (std::isinf(d)) return d > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, d);
  return std::string(buf, p);
}

std::string fmt(bool b) { return b ? "true" : "false"; }

struct Field {
  const char* key;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define MICCAN_SIZE(k, member)                                                                     \
  Field{k, [](RunConfig& c, const std::string& key, const std::string& v) {                        \
          c.member = static_cast<std::size_t>(parse_u64(key, v));                                   \
        },                                                                                          \
        [](const RunConfig& c) { return std::to_string(c.member); }}
#define MICCAN_U64(k, member)                                                                                      \
  Field{k, [](RunConfig& c, const std::string& key, const std::string& v) { c.member = parse_u64(key, v); },       \
        [](const RunConfig& c) { return std::to_string(c.member); }}
#define MICCAN_DOUBLE(k, member)                                                                                   \
  Field{k, [](RunConfig& c, const std::string& key, const std::string& v) { c.member = parse_double(key, v); },    \
        [](const RunConfig& c) { return fmt(c.member); }}
#define MICCAN_BOOL(k, member)                                                                                     \
  Field{k, [](RunConfig& c, const std::string& key, const std::string& v) { c.member = parse_bool(key, v); },      \
        [](const RunConfig& c) { return fmt(c.member); }}

const std::vector<Field>& fields() {
  static const std::vector<Field> f = {
      MICCAN_SIZE("n_blocks_N", model.n_blocks_N),
      MICCAN_SIZE("encoder_depth", model.encoder_depth),
      MICCAN_SIZE("base_channels", model.base_channels),
      MICCAN_SIZE("reduction_ratio_r", model.reduction_ratio_r),
      MICCAN_BOOL("use_attention", model.use_attention),
      MICCAN_BOOL("use_long_skip", model.use_long_skip),
      MICCAN_DOUBLE("noise_level_v", model.dc.noise_level_v),
      MICCAN_U64("init_seed", model.init_seed),
      MICCAN_DOUBLE("lambda_1", loss.lambda_1),
      MICCAN_DOUBLE("lambda_p", loss.lambda_p),
      MICCAN_SIZE("feature_layers_K", loss.feature_layers_K),
      Field{"extractor_id", [](RunConfig& c, const std::string&, const std::string& v) { c.loss.extractor_id = v; },
            [](const RunConfig& c) { return c.loss.extractor_id; }},
      MICCAN_DOUBLE("learning_rate", train.learning_rate),
      MICCAN_DOUBLE("lr_decay_factor", train.lr_decay_factor),
      MICCAN_SIZE("lr_decay_every_epochs", train.lr_decay_every_epochs),
      MICCAN_SIZE("batch_size", train.batch_size),
      MICCAN_SIZE("max_epochs", train.max_epochs),
      MICCAN_U64("seed", train.seed),
      Field{"optimizer",
            [](RunConfig& c, const std::string& key, const std::string& v) {
              if (v == "ADAM") c.train.optimizer = Optimizer::ADAM;
              else if (v == "SGD") c.train.optimizer = Optimizer::SGD;
              else bad_value(key, v);
            },
            [](const RunConfig& c) { return to_string(c.train.optimizer); }},
      Field{"loss_preset",
            [](RunConfig& c, const std::string& key, const std::string& v) {
              if (v == "L2") c.train.loss_preset = LossPreset::L2;
              else if (v == "COMBINED") c.train.loss_preset = LossPreset::COMBINED;
              else bad_value(key, v);
            },
            [](const RunConfig& c) { return to_string(c.train.loss_preset); }},
      MICCAN_DOUBLE("rate", mask.rate),
      MICCAN_SIZE("center_lines", mask.center_lines),
      MICCAN_U64("mask_seed", mask.seed),
      MICCAN_DOUBLE("sigma_fraction", mask.sigma_fraction),
      MICCAN_DOUBLE("wavelet.reg_weight", wavelet.reg_weight),
      MICCAN_SIZE("wavelet.max_iters", wavelet.max_iters),
      MICCAN_DOUBLE("wavelet.tol", wavelet.tol),
      MICCAN_DOUBLE("wavelet.step_size", wavelet.step_size),
      MICCAN_DOUBLE("tv.reg_weight", tv.reg_weight),
      MICCAN_SIZE("tv.max_iters", tv.max_iters),
      MICCAN_DOUBLE("tv.tol", tv.tol),
      MICCAN_DOUBLE("tv.step_size", tv.step_size),
  };
  return f;
}

#undef MICCAN_SIZE
#undef MICCAN_U64
#undef MICCAN_DOUBLE
#undef MICCAN_BOOL

}  // namespace

std::string to_string(Optimizer o) { return o == Optimizer::ADAM ? "ADAM" : "SGD"; }
std::string to_string(LossPreset p) { return p == LossPreset::L2 ? "L2" : "COMBINED"; }

KeyValues parse_key_values(std::string_view text) {
  KeyValues kv;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw InvalidConfig("line " + std::to_string(line_no) + ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw InvalidConfig("line " + std::to_string(line_no) + ": empty key");
    if (!kv.emplace(key, value).second)
      throw InvalidConfig("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
  }
  return kv;
}

RunConfig apply_config(RunConfig base, const KeyValues& kv) {
  if (const auto it = kv.find("preset"); it != kv.end()) {
    const RunConfig p = preset(it->second);
    base.model.use_attention = p.model.use_attention;
    base.model.use_long_skip = p.model.use_long_skip;
    base.train.loss_preset = p.train.loss_preset;
  }
  for (const auto& [key, value] : kv) {
    if (key == "preset") continue;
    const auto& f = fields();
    const auto it = std::find_if(f.begin(), f.end(), [&](const Field& x) { return key == x.key; });
    if (it == f.end()) throw InvalidConfig("unknown configuration key '" + key + "'");
    it->set(base, key, value);
  }
  return base;
}

RunConfig load_config_file(const std::filesystem::path& path, RunConfig base) {
  std::ifstream f(path);
  if (!f) throw InvalidConfig("cannot open config file '" + path.string() + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  try {
    return apply_config(std::move(base), parse_key_values(ss.str()));
  } catch (const InvalidConfig& e) {
    throw InvalidConfig(path.string() + ": " + e.what());
  }
}

RunConfig preset(const std::string& name) {
  RunConfig c;
  if (name == "mrn5") {
    c.model.use_attention = false;
    c.model.use_long_skip = false;
    c.train.loss_preset = LossPreset::L2;
  } else if (name == "miccan-a") {
    c.model.use_attention = true;
    c.model.use_long_skip = false;
    c.train.loss_preset = LossPreset::L2;
  } else if (name == "miccan-b") {
    c.model.use_attention = true;
    c.model.use_long_skip = false;
    c.train.loss_preset = LossPreset::COMBINED;
  } else if (name == "miccan-c") {
    c.model.use_attention = true;
    c.model.use_long_skip = true;
    c.train.loss_preset = LossPreset::COMBINED;
  } else {
    throw InvalidConfig("unknown preset '" + name + "' (expected mrn5, miccan-a, miccan-b or miccan-c)");
  }
  return c;
}

std::string to_config_text(const RunConfig& cfg) {
  std::string out;
  for (const auto& f : fields()) out += std::string(f.key) + " = " + f.get(cfg) + "\n";
  return out;
}

std::string config_fingerprint(const RunConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : to_config_text(cfg)) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace miccan
