#pragma once

// Run configuration: every tunable in one place, loadable from a key=value
// file. Precedence is defaults < config file < command-line flags.

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "roadchar/characterize.hpp"
#include "roadchar/depth.hpp"
#include "roadchar/error.hpp"
#include "roadchar/geometry.hpp"

namespace roadchar {

inline constexpr const char* kConfigEnvVar = "ROADCHAR_CONFIG";

struct Config {
  int band_radius = 15;
  RelativeDepthMode rpd_mode = RelativeDepthMode::kDifference;
  double depth_range_mm = kDefaultDepthRangeMm;
  double conf_threshold = 0.25;
  double iou_threshold = 0.50;
  int connectivity = 8;
  double min_valid_fraction = 0.2;
  std::uint64_t seed = 0;
  int percent_decimals = 2;
  int depth_decimals = 4;
  int frame_width = 640;   // used when no image gives the frame size
  int frame_height = 640;
  double zero_fraction_threshold = 1.0;

  CharacterizeConfig characterize() const {
    return {band_radius, min_valid_fraction, rpd_mode};
  }
  Connectivity connectivity_mode() const {
    return connectivity == 4 ? Connectivity::kFour : Connectivity::kEight;
  }

  void validate() const {
    auto bad = [](const std::string& what) { throw Error(ErrorCode::kInvalidArgument, what); };
    if (band_radius < 1) bad("band_radius must be >= 1");
    if (!(depth_range_mm > 0)) bad("depth_range_mm must be > 0");
    if (!(conf_threshold >= 0 && conf_threshold <= 1)) bad("conf_threshold must be in [0,1]");
    if (!(iou_threshold >= 0 && iou_threshold <= 1)) bad("iou_threshold must be in [0,1]");
    if (connectivity != 4 && connectivity != 8) bad("connectivity must be 4 or 8");
    if (!(min_valid_fraction >= 0 && min_valid_fraction <= 1)) bad("min_valid_fraction must be in [0,1]");
    if (percent_decimals < 0 || percent_decimals > 12) bad("percent_decimals must be in [0,12]");
    if (depth_decimals < 0 || depth_decimals > 12) bad("depth_decimals must be in [0,12]");
    if (frame_width <= 0 || frame_height <= 0) bad("frame size must be positive");
    if (!(zero_fraction_threshold > 0 && zero_fraction_threshold <= 1)) bad("zero_fraction_threshold must be in (0,1]");
  }

  friend bool operator==(const Config&, const Config&) = default;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(std::string_view text, std::string_view key) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw Error(ErrorCode::kInvalidArgument,
                "bad value '" + std::string(text) + "' for " + std::string(key));
  }
  return value;
}

}  // namespace detail

/// Applies one key/value pair. Unknown keys are rejected.
inline void set_config_value(Config& c, std::string_view key, std::string_view value) {
  using detail::parse_number;
  if (key == "band_radius") c.band_radius = parse_number<int>(value, key);
  else if (key == "rpd_mode") {
    if (value == "difference") c.rpd_mode = RelativeDepthMode::kDifference;
    else if (value == "ratio") c.rpd_mode = RelativeDepthMode::kRatio;
    else throw Error(ErrorCode::kInvalidArgument, "rpd_mode must be difference or ratio");
  } else if (key == "depth_range_mm") c.depth_range_mm = parse_number<double>(value, key);
  else if (key == "conf_threshold") c.conf_threshold = parse_number<double>(value, key);
  else if (key == "iou_threshold") c.iou_threshold = parse_number<double>(value, key);
  else if (key == "connectivity") c.connectivity = parse_number<int>(value, key);
  else if (key == "min_valid_fraction") c.min_valid_fraction = parse_number<double>(value, key);
  else if (key == "seed") c.seed = parse_number<std::uint64_t>(value, key);
  else if (key == "percent_decimals") c.percent_decimals = parse_number<int>(value, key);
  else if (key == "depth_decimals") c.depth_decimals = parse_number<int>(value, key);
  else if (key == "frame_width") c.frame_width = parse_number<int>(value, key);
  else if (key == "frame_height") c.frame_height = parse_number<int>(value, key);
  else if (key == "zero_fraction_threshold") c.zero_fraction_threshold = parse_number<double>(value, key);
  else throw Error(ErrorCode::kInvalidArgument, "unknown config key '" + std::string(key) + "'");
}

/// Parses `key = value` lines on top of `base`. `#` starts a comment; values
/// may be quoted.
inline Config parse_config(std::string_view text, Config base = {}) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::kInvalidArgument, "config line " + std::to_string(line_no) + ": expected key = value");
    }
    const auto key = detail::trim(line.substr(0, eq));
    auto value = detail::trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    try {
      set_config_value(base, key, value);
    } catch (const Error& e) {
      throw Error(e.code(), "config line " + std::to_string(line_no) + ": " + e.detail());
    }
  }
  base.validate();
  return base;
}

inline Config load_config(const std::filesystem::path& path, Config base = {}) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), base);
}

/// Explicit path wins; otherwise $ROADCHAR_CONFIG; otherwise defaults.
inline Config resolve_config(const std::string& explicit_path) {
  if (!explicit_path.empty()) return load_config(explicit_path);
  if (const char* env = std::getenv(kConfigEnvVar); env && *env) return load_config(env);
  return Config{};
}

inline std::string format_number(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline std::string serialize_config(const Config& c) {
  std::ostringstream out;
  out << "band_radius = " << c.band_radius << '\n'
      << "rpd_mode = " << to_string(c.rpd_mode) << '\n'
      << "depth_range_mm = " << format_number(c.depth_range_mm) << '\n'
      << "conf_threshold = " << format_number(c.conf_threshold) << '\n'
      << "iou_threshold = " << format_number(c.iou_threshold) << '\n'
      << "connectivity = " << c.connectivity << '\n'
      << "min_valid_fraction = " << format_number(c.min_valid_fraction) << '\n'
      << "seed = " << c.seed << '\n'
      << "percent_decimals = " << c.percent_decimals << '\n'
      << "depth_decimals = " << c.depth_decimals << '\n'
      << "frame_width = " << c.frame_width << '\n'
      << "frame_height = " << c.frame_height << '\n'
      << "zero_fraction_threshold = " << format_number(c.zero_fraction_threshold) << '\n';
  return out.str();
}

}  // namespace roadchar
