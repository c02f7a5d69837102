#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "rainsynth/config.hpp"
#include "rainsynth/errors.hpp"
#include "rainsynth/version.hpp"

namespace rainsynth {

using Json = nlohmann::ordered_json;

/// One synthesized output: a (view, frame time, preset) triple with the
/// photometric inputs that produced it and digests of the written files.
/// Paths are relative to the manifest's directory.
struct ManifestEntry {
  std::string image_name;
  std::int32_t view_id = 0;
  double elevation = 0.0;  // radians
  double azimuth = 0.0;    // radians
  int frame_index = 0;
  double frame_time = 0.0;
  std::string preset;
  double rain_density = 0.0;
  Rgb ambient_light = {1.0, 1.0, 1.0};
  std::string rainy_path;
  std::string mask_path;
  std::string rainy_digest;
  std::string mask_digest;
};

struct SceneManifest {
  std::string scene_name;
  std::string engine_version = kEngineVersion;
  JobConfig config;  // output_dir is not recorded; paths are relative
  std::vector<ManifestEntry> entries;
};

// The manifest deliberately omits output_dir so reruns into different
// directories stay byte-identical.
inline Json config_to_json(const JobConfig& cfg) {
  Json j;
  j["colmap_dir"] = cfg.colmap_dir.string();
  j["background_dir"] = cfg.background_dir.string();
  j["seed"] = cfg.seed;
  j["rain_density"] = cfg.rain.density;
  j["rain_max_depth"] = cfg.rain.max_depth;
  j["wind_speed"] = cfg.rain.wind_speed;
  j["wind_azimuth"] = cfg.rain.wind_azimuth;
  j["max_drops"] = cfg.rain.max_drops;
  j["drop_scale"] = cfg.rain.drop_scale;
  j["volume_margin"] = cfg.volume_margin;
  j["ambient_base"] = cfg.ambient_base;
  j["gamma"] = cfg.gamma;
  Json presets = Json::array();
  for (RainLevel level : cfg.presets) presets.push_back(rain_level_name(level));
  j["presets"] = std::move(presets);
  j["exposure"] = cfg.exposure_s;
  j["near"] = cfg.near_m;
  j["up"] = {cfg.up.x(), cfg.up.y(), cfg.up.z()};
  j["frame_times"] = cfg.frame_times;
  j["rain_tint"] = cfg.rain_tint;
  return j;
}

inline JobConfig config_from_json(const Json& j) {
  JobConfig cfg;
  cfg.colmap_dir = j.at("colmap_dir").get<std::string>();
  cfg.background_dir = j.at("background_dir").get<std::string>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.rain.density = j.at("rain_density").get<double>();
  cfg.rain.max_depth = j.at("rain_max_depth").get<double>();
  cfg.rain.wind_speed = j.at("wind_speed").get<double>();
  cfg.rain.wind_azimuth = j.at("wind_azimuth").get<double>();
  cfg.rain.max_drops = j.at("max_drops").get<std::uint64_t>();
  cfg.rain.drop_scale = j.at("drop_scale").get<double>();
  cfg.volume_margin = j.at("volume_margin").get<double>();
  cfg.ambient_base = j.at("ambient_base").get<Rgb>();
  cfg.gamma = j.at("gamma").get<double>();
  cfg.presets.clear();
  for (const auto& name : j.at("presets")) {
    const std::string n = name.get<std::string>();
    if (n == "light")
      cfg.presets.push_back(RainLevel::Light);
    else if (n == "moderate")
      cfg.presets.push_back(RainLevel::Moderate);
    else if (n == "heavy")
      cfg.presets.push_back(RainLevel::Heavy);
    else
      throw ManifestError("unknown preset '" + n + "' in manifest");
  }
  cfg.exposure_s = j.at("exposure").get<double>();
  cfg.near_m = j.at("near").get<double>();
  const auto up = j.at("up").get<std::array<double, 3>>();
  cfg.up = {up[0], up[1], up[2]};
  cfg.frame_times = j.at("frame_times").get<std::vector<double>>();
  cfg.rain_tint = j.at("rain_tint").get<Rgb>();
  return cfg;
}

inline Json manifest_to_json(const SceneManifest& manifest) {
  Json j;
  j["scene_name"] = manifest.scene_name;
  j["engine_version"] = manifest.engine_version;
  j["config"] = config_to_json(manifest.config);
  Json entries = Json::array();
  for (const ManifestEntry& e : manifest.entries) {
    Json je;
    je["image_name"] = e.image_name;
    je["view_id"] = e.view_id;
    je["elevation"] = e.elevation;
    je["azimuth"] = e.azimuth;
    je["frame_index"] = e.frame_index;
    je["frame_time"] = e.frame_time;
    je["preset"] = e.preset;
    je["rain_density"] = e.rain_density;
    je["ambient_light"] = e.ambient_light;
    je["rainy_path"] = e.rainy_path;
    je["mask_path"] = e.mask_path;
    je["rainy_digest"] = e.rainy_digest;
    je["mask_digest"] = e.mask_digest;
    entries.push_back(std::move(je));
  }
  j["entries"] = std::move(entries);
  return j;
}

inline SceneManifest manifest_from_json(const Json& j) {
  SceneManifest m;
  m.scene_name = j.at("scene_name").get<std::string>();
  m.engine_version = j.at("engine_version").get<std::string>();
  m.config = config_from_json(j.at("config"));
  for (const auto& je : j.at("entries")) {
    ManifestEntry e;
    e.image_name = je.at("image_name").get<std::string>();
    e.view_id = je.at("view_id").get<std::int32_t>();
    e.elevation = je.at("elevation").get<double>();
    e.azimuth = je.at("azimuth").get<double>();
    e.frame_index = je.at("frame_index").get<int>();
    e.frame_time = je.at("frame_time").get<double>();
    e.preset = je.at("preset").get<std::string>();
    e.rain_density = je.at("rain_density").get<double>();
    e.ambient_light = je.at("ambient_light").get<Rgb>();
    e.rainy_path = je.at("rainy_path").get<std::string>();
    e.mask_path = je.at("mask_path").get<std::string>();
    e.rainy_digest = je.at("rainy_digest").get<std::string>();
    e.mask_digest = je.at("mask_digest").get<std::string>();
    m.entries.push_back(std::move(e));
  }
  return m;
}

inline void write_manifest(const SceneManifest& manifest,
                           const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write manifest " + path.string());
  out << manifest_to_json(manifest).dump(2) << '\n';
}

inline SceneManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ManifestError("manifest missing: " + path.string());
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ManifestError("manifest unreadable: " + std::string(e.what()));
  }
  try {
    return manifest_from_json(j);
  } catch (const Json::exception& e) {
    throw ManifestError("manifest malformed: " + std::string(e.what()));
  }
}

}  // namespace rainsynth
