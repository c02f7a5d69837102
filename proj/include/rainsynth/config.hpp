#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "rainsynth/errors.hpp"
#include "rainsynth/photometric.hpp"
#include "rainsynth/rain_field.hpp"

namespace rainsynth {

/// A synthesis job: inputs, rain model, photometric model, and sampling
/// controls. Loaded from a flat key=value file; unknown keys are rejected.
struct JobConfig {
  std::string scene_name = "scene";
  std::filesystem::path colmap_dir;
  std::filesystem::path background_dir;
  std::filesystem::path output_dir;
  std::uint64_t seed = 0;
  RainParams rain;
  double volume_margin = 1.0;
  Rgb ambient_base = {0.9, 0.9, 0.9};
  double gamma = 0.5;
  std::vector<RainLevel> presets = {RainLevel::Light, RainLevel::Moderate,
                                    RainLevel::Heavy};
  double exposure_s = 1.0 / 60.0;
  double near_m = 0.1;
  Eigen::Vector3d up = {0.0, -1.0, 0.0};
  std::vector<double> frame_times = {0.0};
  Rgb rain_tint = {1.0, 1.0, 1.0};
};

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline double config_double(const std::string& key, const std::string& value) {
  double v{};
  const char* first = value.data();
  const char* last = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last)
    throw ConfigError(key, "expected a number, got '" + value + "'");
  return v;
}

inline std::uint64_t config_u64(const std::string& key,
                                const std::string& value) {
  std::uint64_t v{};
  const char* first = value.data();
  const char* last = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last)
    throw ConfigError(key, "expected an unsigned integer, got '" + value + "'");
  return v;
}

inline std::vector<double> config_double_list(const std::string& key,
                                              const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(config_double(key, trim(item)));
  if (out.empty()) throw ConfigError(key, "expected a comma-separated list");
  return out;
}

inline std::string format_double_cfg(double v) {
  std::array<char, 32> buf;
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

}  // namespace detail

inline JobConfig parse_config(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    const std::string stripped = detail::trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no),
                        "expected key = value");
    const std::string key = detail::trim(stripped.substr(0, eq));
    const std::string value = detail::trim(stripped.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no),
                                       "empty key");
    if (!kv.emplace(key, value).second)
      throw ConfigError(key, "duplicate key");
  }

  JobConfig cfg;
  std::optional<std::string> slot;
  auto take = [&kv, &slot](const char* key) -> std::string* {
    auto it = kv.find(key);
    if (it == kv.end()) return nullptr;
    slot = it->second;
    kv.erase(it);
    return &*slot;
  };

  if (auto* v = take("scene_name")) cfg.scene_name = *v;
  if (auto* v = take("colmap_dir")) cfg.colmap_dir = *v;
  if (auto* v = take("background_dir")) cfg.background_dir = *v;
  if (auto* v = take("output_dir")) cfg.output_dir = *v;
  if (auto* v = take("seed"))
    cfg.seed = detail::config_u64("seed", *v);
  else
    throw ConfigError("seed", "required key missing");
  if (cfg.colmap_dir.empty()) throw ConfigError("colmap_dir", "required key missing");
  if (cfg.background_dir.empty())
    throw ConfigError("background_dir", "required key missing");
  if (cfg.output_dir.empty()) throw ConfigError("output_dir", "required key missing");

  if (auto* v = take("rain_density")) {
    cfg.rain.density = detail::config_double("rain_density", *v);
    if (cfg.rain.density < 0.0)
      throw ConfigError("rain_density", "must be >= 0");
  }
  if (auto* v = take("rain_max_depth")) {
    cfg.rain.max_depth = detail::config_double("rain_max_depth", *v);
    if (!(cfg.rain.max_depth > 0.0))
      throw ConfigError("rain_max_depth", "must be > 0");
  }
  if (auto* v = take("wind_speed")) {
    cfg.rain.wind_speed = detail::config_double("wind_speed", *v);
    if (cfg.rain.wind_speed < 0.0) throw ConfigError("wind_speed", "must be >= 0");
  }
  if (auto* v = take("wind_azimuth"))
    cfg.rain.wind_azimuth = detail::config_double("wind_azimuth", *v);
  if (auto* v = take("max_drops")) {
    cfg.rain.max_drops = detail::config_u64("max_drops", *v);
    if (cfg.rain.max_drops == 0) throw ConfigError("max_drops", "must be > 0");
  }
  if (auto* v = take("drop_scale")) {
    cfg.rain.drop_scale = detail::config_double("drop_scale", *v);
    if (!(cfg.rain.drop_scale > 0.0 && cfg.rain.drop_scale <= 100.0))
      throw ConfigError("drop_scale", "must be in (0, 100]");
  }
  if (auto* v = take("volume_margin")) {
    cfg.volume_margin = detail::config_double("volume_margin", *v);
    if (!(cfg.volume_margin > 0.0))
      throw ConfigError("volume_margin", "must be > 0");
  }
  if (auto* v = take("ambient_base")) {
    const auto vals = detail::config_double_list("ambient_base", *v);
    if (vals.size() != 3) throw ConfigError("ambient_base", "expected 3 values");
    for (int c = 0; c < 3; ++c) {
      if (!(vals[c] > 0.0 && vals[c] <= 1.0))
        throw ConfigError("ambient_base", "components must be in (0, 1]");
      cfg.ambient_base[c] = vals[c];
    }
  }
  if (auto* v = take("gamma")) {
    cfg.gamma = detail::config_double("gamma", *v);
    if (cfg.gamma < 0.0) throw ConfigError("gamma", "must be >= 0");
  }
  if (auto* v = take("presets")) {
    cfg.presets.clear();
    std::stringstream ss(*v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const std::string name = detail::trim(item);
      if (name == "light")
        cfg.presets.push_back(RainLevel::Light);
      else if (name == "moderate")
        cfg.presets.push_back(RainLevel::Moderate);
      else if (name == "heavy")
        cfg.presets.push_back(RainLevel::Heavy);
      else
        throw ConfigError("presets", "unknown level '" + name + "'");
    }
    if (cfg.presets.empty()) throw ConfigError("presets", "must not be empty");
    std::sort(cfg.presets.begin(), cfg.presets.end());
    cfg.presets.erase(std::unique(cfg.presets.begin(), cfg.presets.end()),
                      cfg.presets.end());
  }
  if (auto* v = take("exposure")) {
    cfg.exposure_s = detail::config_double("exposure", *v);
    if (!(cfg.exposure_s > 0.0)) throw ConfigError("exposure", "must be > 0");
  }
  if (auto* v = take("near")) {
    cfg.near_m = detail::config_double("near", *v);
    if (!(cfg.near_m > 0.0)) throw ConfigError("near", "must be > 0");
  }
  if (auto* v = take("up")) {
    const auto vals = detail::config_double_list("up", *v);
    if (vals.size() != 3) throw ConfigError("up", "expected 3 values");
    Eigen::Vector3d u(vals[0], vals[1], vals[2]);
    if (!(u.norm() > 0.0)) throw ConfigError("up", "must be nonzero");
    cfg.up = u.normalized();
  }
  if (auto* v = take("frame_times")) {
    cfg.frame_times = detail::config_double_list("frame_times", *v);
    for (double t : cfg.frame_times)
      if (t < 0.0) throw ConfigError("frame_times", "times must be >= 0");
  }
  if (auto* v = take("rain_tint")) {
    const auto vals = detail::config_double_list("rain_tint", *v);
    if (vals.size() != 3) throw ConfigError("rain_tint", "expected 3 values");
    for (int c = 0; c < 3; ++c) {
      if (!(vals[c] >= 0.0 && vals[c] <= 1.0))
        throw ConfigError("rain_tint", "components must be in [0, 1]");
      cfg.rain_tint[c] = vals[c];
    }
  }

  if (!kv.empty()) throw ConfigError(kv.begin()->first, "unknown key");
  return cfg;
}

inline JobConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  return parse_config(in);
}

/// Renders a config in the same key=value format it is parsed from;
/// load(serialize(load(x))) == load(x).
inline std::string serialize_config(const JobConfig& cfg) {
  std::ostringstream out;
  auto d = detail::format_double_cfg;
  out << "scene_name = " << cfg.scene_name << '\n';
  out << "colmap_dir = " << cfg.colmap_dir.string() << '\n';
  out << "background_dir = " << cfg.background_dir.string() << '\n';
  out << "output_dir = " << cfg.output_dir.string() << '\n';
  out << "seed = " << cfg.seed << '\n';
  out << "rain_density = " << d(cfg.rain.density) << '\n';
  out << "rain_max_depth = " << d(cfg.rain.max_depth) << '\n';
  out << "wind_speed = " << d(cfg.rain.wind_speed) << '\n';
  out << "wind_azimuth = " << d(cfg.rain.wind_azimuth) << '\n';
  out << "max_drops = " << cfg.rain.max_drops << '\n';
  out << "drop_scale = " << d(cfg.rain.drop_scale) << '\n';
  out << "volume_margin = " << d(cfg.volume_margin) << '\n';
  out << "ambient_base = " << d(cfg.ambient_base[0]) << ','
      << d(cfg.ambient_base[1]) << ',' << d(cfg.ambient_base[2]) << '\n';
  out << "gamma = " << d(cfg.gamma) << '\n';
  out << "presets = ";
  for (std::size_t i = 0; i < cfg.presets.size(); ++i) {
    if (i) out << ',';
    out << rain_level_name(cfg.presets[i]);
  }
  out << '\n';
  out << "exposure = " << d(cfg.exposure_s) << '\n';
  out << "near = " << d(cfg.near_m) << '\n';
  out << "up = " << d(cfg.up.x()) << ',' << d(cfg.up.y()) << ','
      << d(cfg.up.z()) << '\n';
  out << "frame_times = ";
  for (std::size_t i = 0; i < cfg.frame_times.size(); ++i) {
    if (i) out << ',';
    out << d(cfg.frame_times[i]);
  }
  out << '\n';
  out << "rain_tint = " << d(cfg.rain_tint[0]) << ',' << d(cfg.rain_tint[1])
      << ',' << d(cfg.rain_tint[2]) << '\n';
  return out.str();
}

}  // namespace rainsynth
