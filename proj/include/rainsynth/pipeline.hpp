#pragma once

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "rainsynth/colmap.hpp"
#include "rainsynth/config.hpp"
#include "rainsynth/digest.hpp"
#include "rainsynth/log.hpp"
#include "rainsynth/manifest.hpp"
#include "rainsynth/photometric.hpp"
#include "rainsynth/png_io.hpp"
#include "rainsynth/streak_raster.hpp"
#include "rainsynth/visibility.hpp"

namespace rainsynth {

namespace detail {

/// Runs fn(0..n) on a pool of worker threads. The first exception wins and is
/// rethrown on the calling thread after all workers drain.
inline void parallel_for(std::size_t n, int threads,
                         const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  const int workers =
      std::max(1, std::min<int>(threads, static_cast<int>(n)));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n || failed.load()) break;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
        break;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int t = 0; t < workers; ++t) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

inline std::string sanitize_stem(const std::string& name) {
  std::string stem = name;
  if (const auto dot = stem.rfind('.'); dot != std::string::npos)
    stem.erase(dot);
  for (char& c : stem)
    if (c == '/' || c == '\\') c = '_';
  return stem;
}

inline RainPreset preset_for_level(RainLevel level, const JobConfig& cfg) {
  RainPreset preset;
  preset.level = level;
  preset.density = cfg.rain.density * rain_level_multiplier(level);
  preset.light =
      ambient_from_density(cfg.ambient_base, cfg.gamma, preset.density);
  return preset;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// synthesize
// ---------------------------------------------------------------------------

struct SynthesisOutput {
  SceneManifest manifest;
  std::filesystem::path scene_dir;
  std::filesystem::path manifest_path;
};

/// Runs the full synthesis job: COLMAP poses -> viewpoint matrix -> per-view
/// rain masks -> brightness-attenuated composites, for every view x frame
/// time x preset. Outputs are staged in a temporary directory and swapped
/// into place only after the manifest is written, so a failed run leaves no
/// partial scene.
inline SynthesisOutput synthesize(const JobConfig& cfg, int threads = 1) {
  namespace fs = std::filesystem;
  if (threads < 1) throw ParamOutOfRangeError("threads must be >= 1");
  if (!cfg.rain.valid()) throw ParamOutOfRangeError("invalid rain parameters");

  const Reconstruction rec = load_reconstruction(cfg.colmap_dir);
  const ViewpointMatrix vm =
      build_viewpoint_matrix(rec.cameras, rec.images, cfg.up);
  if (vm.entries.empty()) throw EmptyCameraSetError("no views in " +
                                                    cfg.colmap_dir.string());

  struct ViewData {
    Camera camera;
    ImageBuffer background;
    int bit_depth = 8;
    std::string stem;
  };
  std::vector<ViewData> views;
  views.reserve(vm.entries.size());
  std::vector<Camera> cameras;
  for (const ViewpointEntry& entry : vm.entries) {
    ViewData v;
    v.camera = entry.camera;
    const fs::path bg_path = cfg.background_dir / entry.camera.name;
    if (!fs::exists(bg_path))
      throw IoError("background image missing for view '" +
                    entry.camera.name + "': " + bg_path.string());
    v.background = read_png_rgb(bg_path, &v.bit_depth);
    if (v.background.width != entry.camera.intrinsics.width ||
        v.background.height != entry.camera.intrinsics.height)
      throw DimensionMismatchError(
          "background '" + entry.camera.name +
          "' does not match the camera resolution");
    v.stem = detail::sanitize_stem(entry.camera.name);
    cameras.push_back(entry.camera);
    views.push_back(std::move(v));
  }

  const RainVolume volume = volume_from_cameras(
      cameras, cfg.rain.max_depth, cfg.volume_margin, cfg.seed);

  std::vector<RainPreset> presets;
  for (RainLevel level : cfg.presets)
    presets.push_back(detail::preset_for_level(level, cfg));

  struct WorkItem {
    std::size_t view = 0;
    int frame = 0;
    std::size_t preset = 0;
  };
  std::vector<WorkItem> items;
  for (std::size_t v = 0; v < views.size(); ++v)
    for (int f = 0; f < static_cast<int>(cfg.frame_times.size()); ++f)
      for (std::size_t p = 0; p < presets.size(); ++p)
        items.push_back({v, f, p});

  const fs::path staging = cfg.output_dir.string() + ".staging";
  std::error_code ec;
  fs::remove_all(staging, ec);
  fs::create_directories(staging / "rainy");
  fs::create_directories(staging / "masks");

  std::vector<ManifestEntry> entries(items.size());
  try {
    detail::parallel_for(items.size(), threads, [&](std::size_t i) {
      const WorkItem& item = items[i];
      const ViewData& view = views[item.view];
      const RainPreset& preset = presets[item.preset];
      try {
        RainParams params = cfg.rain;
        params.density = preset.density;
        const double t = cfg.frame_times[item.frame];
        const RainMask mask = render_view(params, volume, view.camera, t,
                                          cfg.exposure_s, cfg.near_m, cfg.up);
        const ImageBuffer rainy =
            compose(view.background, mask, preset.light, cfg.rain_tint);

        const std::string base = view.stem + "_t" +
                                 std::to_string(item.frame) + "_" +
                                 rain_level_name(preset.level) + ".png";
        const fs::path rainy_path = staging / "rainy" / base;
        const fs::path mask_path = staging / "masks" / base;
        write_png(rainy_path, rainy, view.bit_depth);
        write_png(mask_path, mask, view.bit_depth);

        ManifestEntry& e = entries[i];
        e.image_name = view.camera.name;
        e.view_id = view.camera.view_id;
        e.elevation = view.camera.angles.elevation;
        e.azimuth = view.camera.angles.azimuth;
        e.frame_index = item.frame;
        e.frame_time = t;
        e.preset = rain_level_name(preset.level);
        e.rain_density = preset.density;
        e.ambient_light = preset.light.value;
        e.rainy_path = "rainy/" + base;
        e.mask_path = "masks/" + base;
        e.rainy_digest = sha256_hex_file(rainy_path);
        e.mask_digest = sha256_hex_file(mask_path);
      } catch (const std::exception& ex) {
        throw Error("view '" + view.camera.name + "' frame " +
                    std::to_string(item.frame) + " preset " +
                    rain_level_name(preset.level) + ": " + ex.what());
      }
    });
  } catch (...) {
    fs::remove_all(staging, ec);
    throw;
  }

  SynthesisOutput out;
  out.manifest.scene_name = cfg.scene_name;
  out.manifest.engine_version = kEngineVersion;
  out.manifest.config = cfg;
  out.manifest.entries = std::move(entries);
  write_manifest(out.manifest, staging / "manifest.json");

  fs::remove_all(cfg.output_dir, ec);
  fs::rename(staging, cfg.output_dir);
  out.scene_dir = cfg.output_dir;
  out.manifest_path = cfg.output_dir / "manifest.json";
  log_info("synthesized " + std::to_string(out.manifest.entries.size()) +
           " outputs into " + out.scene_dir.string());
  return out;
}

// ---------------------------------------------------------------------------
// enhance
// ---------------------------------------------------------------------------

struct EnhanceOptions {
  int steps = kDefaultCurveSteps;
  double lr = kDefaultLearningRate;
  int iters = kDefaultFitIterations;
  // Exactly one of the two must be set.
  std::optional<std::filesystem::path> reference_dir;
  std::optional<double> target_exposure;
};

/// Fits and applies the recursive enhancement to every PNG in a directory.
/// Writes enhanced images plus an enhance_params.json record to out_dir and
/// returns the record.
inline Json enhance_images(const std::filesystem::path& in_dir,
                           const EnhanceOptions& opts,
                           const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  if (opts.steps < 1) throw ParamOutOfRangeError("steps must be >= 1");
  if (!(opts.lr >= 0.0)) throw ParamOutOfRangeError("lr must be >= 0");
  if (opts.iters < 1) throw ParamOutOfRangeError("iters must be >= 1");
  if (opts.reference_dir.has_value() == opts.target_exposure.has_value())
    throw ParamOutOfRangeError(
        "exactly one of reference_dir / target_exposure must be given");
  if (opts.target_exposure &&
      !(*opts.target_exposure > 0.0 && *opts.target_exposure < 1.0))
    throw ParamOutOfRangeError("target exposure must be in (0, 1)");

  std::vector<fs::path> inputs;
  if (!fs::is_directory(in_dir))
    throw IoError("input directory missing: " + in_dir.string());
  for (const auto& entry : fs::directory_iterator(in_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".png")
      inputs.push_back(entry.path());
  std::sort(inputs.begin(), inputs.end());
  if (inputs.empty()) throw IoError("no PNG inputs in " + in_dir.string());

  fs::create_directories(out_dir);

  Json record;
  record["engine_version"] = kEngineVersion;
  record["mode"] = opts.reference_dir ? "reference" : "exposure";
  if (opts.target_exposure) record["target_exposure"] = *opts.target_exposure;
  record["steps"] = opts.steps;
  record["lr"] = opts.lr;
  record["iters"] = opts.iters;
  Json images = Json::array();

  for (const fs::path& input : inputs) {
    int bit_depth = 8;
    const ImageBuffer image = read_png_rgb(input, &bit_depth);
    Objective objective;
    if (opts.reference_dir) {
      const fs::path ref_path = *opts.reference_dir / input.filename();
      if (!fs::exists(ref_path))
        throw IoError("reference image missing: " + ref_path.string());
      objective = MseToReference{read_png_rgb(ref_path)};
    } else {
      objective = ExposureTarget{*opts.target_exposure, kDefaultExposurePatch};
    }
    const FitResult fit =
        fit_params(image, objective, opts.steps, opts.lr, opts.iters);
    const EnhancementTrace trace = enhance(image, fit.params);
    write_png(out_dir / input.filename(), trace.result(), bit_depth);

    Json ji;
    ji["name"] = input.filename().string();
    ji["initial_loss"] = fit.loss_history.front();
    ji["final_loss"] = fit.loss_history.back();
    Json steps = Json::array();
    for (const Rgb& a : fit.params.steps) steps.push_back(a);
    ji["params"] = std::move(steps);
    images.push_back(std::move(ji));
  }
  record["images"] = std::move(images);

  std::ofstream out(out_dir / "enhance_params.json", std::ios::binary);
  if (!out) throw IoError("cannot write enhance_params.json");
  out << record.dump(2) << '\n';
  return record;
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

struct ValidationReport {
  bool pass = false;
  Json report;
};

namespace detail {

struct PatternStats {
  std::string expected;  // parallel | lambda | v | unclassified | skipped-wind
  std::size_t streaks = 0;
  double agreement = 0.0;   // fraction, sense depends on expected
  double max_angle_deg = 0.0;  // parallel case only
  bool pass = true;
};

/// Classifies streak orientation statistics for one view against the
/// elevation-predicted pattern: parallel when level, divergence (lambda) when
/// looking up, convergence (v) when looking down. Streak directions are
/// oriented image-downward before comparing the horizontal slope sign with
/// the image half.
inline PatternStats classify_streaks(const std::vector<Streak>& streaks,
                                     const Camera& camera, double wind_speed) {
  PatternStats stats;
  const double elev_deg = camera.angles.elevation * 180.0 / std::numbers::pi;
  if (wind_speed > 0.0) {
    stats.expected = "skipped-wind";
    return stats;
  }
  const double cx = camera.intrinsics.cx;
  if (std::abs(elev_deg) <= 0.5) {
    stats.expected = "parallel";
    double max_angle = 0.0;
    std::size_t n = 0;
    for (const Streak& s : streaks) {
      Eigen::Vector2d v = s.p1 - s.p0;
      if (v.norm() == 0.0) continue;
      const double angle =
          std::abs(std::atan2(std::abs(v.x()), std::abs(v.y()))) * 180.0 /
          std::numbers::pi;
      max_angle = std::max(max_angle, angle);
      ++n;
    }
    stats.streaks = n;
    stats.max_angle_deg = max_angle;
    stats.agreement = n == 0 ? 1.0 : (max_angle <= 0.5 ? 1.0 : 0.0);
    stats.pass = max_angle <= 0.5;
    return stats;
  }
  if (std::abs(elev_deg) <= 10.0) {
    stats.expected = "unclassified";
    return stats;
  }
  const bool looking_up = elev_deg > 0.0;
  stats.expected = looking_up ? "lambda" : "v";
  std::size_t agree = 0, total = 0;
  for (const Streak& s : streaks) {
    if (s.length_px() <= 5.0) continue;
    Eigen::Vector2d v = s.p1 - s.p0;
    if (v.y() < 0.0) v = -v;  // orient downward in the image
    const double half = s.mid_px.x() - cx;
    if (v.x() == 0.0 || half == 0.0) continue;
    const bool outward = (v.x() > 0.0) == (half > 0.0);
    // looking up: streaks spread away from the anti-vanishing point above
    // looking down: streaks converge toward the vanishing point below
    if (outward == looking_up) ++agree;
    ++total;
  }
  stats.streaks = total;
  stats.agreement =
      total == 0 ? 1.0 : static_cast<double>(agree) / static_cast<double>(total);
  stats.pass = total == 0 || stats.agreement >= 0.95;
  return stats;
}

}  // namespace detail

/// Re-checks a synthesized scene against its manifest: digest verification,
/// orphan detection, deterministic re-render spot checks, multi-view
/// reprojection residuals, streak-pattern classification, and preset
/// brightness ordering with histograms. Writes validation_report.json next to
/// the manifest.
inline ValidationReport validate_scene(
    const std::filesystem::path& manifest_path, int recheck_count = 2) {
  namespace fs = std::filesystem;
  const SceneManifest manifest = load_manifest(manifest_path);
  const fs::path scene_dir = manifest_path.parent_path();
  const JobConfig& cfg = manifest.config;

  Json report;
  report["manifest"] = manifest_path.string();
  report["scene_name"] = manifest.scene_name;
  report["engine_version"] = manifest.engine_version;
  bool all_pass = true;

  // (a) digest re-verification + missing files
  {
    Json mismatches = Json::array();
    for (const ManifestEntry& e : manifest.entries) {
      for (const auto& [rel, digest] :
           {std::pair{e.rainy_path, e.rainy_digest},
            std::pair{e.mask_path, e.mask_digest}}) {
        const fs::path path = scene_dir / rel;
        if (!fs::exists(path)) {
          mismatches.push_back({{"path", rel}, {"reason", "missing"}});
          continue;
        }
        if (sha256_hex_file(path) != digest)
          mismatches.push_back({{"path", rel}, {"reason", "digest-mismatch"}});
      }
    }
    const bool pass = mismatches.empty();
    report["digests"] = {{"pass", pass},
                         {"entries", manifest.entries.size()},
                         {"mismatches", std::move(mismatches)}};
    all_pass = all_pass && pass;
  }

  // (b) orphan files not covered by any manifest entry
  {
    std::set<std::string> referenced;
    for (const ManifestEntry& e : manifest.entries) {
      referenced.insert(e.rainy_path);
      referenced.insert(e.mask_path);
    }
    Json orphans = Json::array();
    for (const char* sub : {"rainy", "masks"}) {
      const fs::path dir = scene_dir / sub;
      if (!fs::is_directory(dir)) continue;
      for (const auto& f : fs::directory_iterator(dir)) {
        if (!f.is_regular_file()) continue;
        const std::string rel =
            std::string(sub) + "/" + f.path().filename().string();
        if (!referenced.count(rel)) orphans.push_back(rel);
      }
    }
    const bool pass = orphans.empty();
    report["orphans"] = {{"pass", pass}, {"files", std::move(orphans)}};
    all_pass = all_pass && pass;
  }

  // Geometry shared by the remaining checks.
  const Reconstruction rec = load_reconstruction(cfg.colmap_dir);
  const ViewpointMatrix vm =
      build_viewpoint_matrix(rec.cameras, rec.images, cfg.up);
  std::vector<Camera> cameras;
  std::unordered_map<std::int32_t, const Camera*> camera_by_view;
  for (const ViewpointEntry& entry : vm.entries) {
    cameras.push_back(entry.camera);
  }
  for (const Camera& cam : cameras) camera_by_view.emplace(cam.view_id, &cam);
  const RainVolume volume = volume_from_cameras(
      cameras, cfg.rain.max_depth, cfg.volume_margin, cfg.seed);

  // (c) deterministic re-render spot check
  {
    const std::size_t n = manifest.entries.size();
    const std::size_t k =
        std::min<std::size_t>(std::max(recheck_count, 0), n);
    Json checked = Json::array();
    Json mismatches = Json::array();
    static std::atomic<std::uint64_t> temp_counter{0};
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t idx = j * n / k;
      const ManifestEntry& e = manifest.entries[idx];
      const auto cam_it = camera_by_view.find(e.view_id);
      if (cam_it == camera_by_view.end()) {
        mismatches.push_back({{"path", e.rainy_path},
                              {"reason", "view missing from reconstruction"}});
        continue;
      }
      int bit_depth = 8;
      const ImageBuffer background =
          read_png_rgb(cfg.background_dir / e.image_name, &bit_depth);
      RainParams params = cfg.rain;
      params.density = e.rain_density;
      const RainMask mask =
          render_view(params, volume, *cam_it->second, e.frame_time,
                      cfg.exposure_s, cfg.near_m, cfg.up);
      const ImageBuffer rainy =
          compose(background, mask, AmbientLight{e.ambient_light},
                  cfg.rain_tint);
      const fs::path tmp =
          fs::temp_directory_path() /
          ("rainsynth-recheck-" + std::to_string(::getpid()) + "-" +
           std::to_string(temp_counter.fetch_add(1)) + ".png");
      write_png(tmp, rainy, bit_depth);
      const std::string rainy_digest = sha256_hex_file(tmp);
      write_png(tmp, mask, bit_depth);
      const std::string mask_digest = sha256_hex_file(tmp);
      std::error_code ec;
      fs::remove(tmp, ec);
      if (rainy_digest != e.rainy_digest)
        mismatches.push_back({{"path", e.rainy_path},
                              {"reason", "re-render digest differs"}});
      if (mask_digest != e.mask_digest)
        mismatches.push_back({{"path", e.mask_path},
                              {"reason", "re-render digest differs"}});
      checked.push_back(e.rainy_path);
    }
    const bool pass = mismatches.empty();
    report["rerender"] = {{"pass", pass},
                          {"checked", std::move(checked)},
                          {"mismatches", std::move(mismatches)}};
    all_pass = all_pass && pass;
  }

  // (d) multi-view reprojection residuals of streak midpoints
  {
    constexpr std::size_t kMaxDropsChecked = 5000;
    std::set<std::pair<double, double>> combos;  // (frame_time, density)
    for (const ManifestEntry& e : manifest.entries)
      combos.insert({e.frame_time, e.rain_density});
    double max_residual = 0.0;
    double sum_residual = 0.0;
    std::size_t pairs = 0;
    for (const auto& [t, density] : combos) {
      RainParams params = cfg.rain;
      params.density = density;
      std::vector<Raindrop> drops = sample_drops(params, volume, cfg.up, t);
      if (drops.size() > kMaxDropsChecked) drops.resize(kMaxDropsChecked);
      std::vector<std::pair<const Camera*, Streak>> visible;
      for (const Raindrop& drop : drops) {
        visible.clear();
        for (const Camera& cam : cameras) {
          if (auto s = streak_for_drop(drop, cam, cfg.exposure_s, cfg.near_m,
                                       params.max_depth))
            visible.emplace_back(&cam, *s);
        }
        for (std::size_t a = 0; a < visible.size(); ++a) {
          for (std::size_t b = a + 1; b < visible.size(); ++b) {
            const Eigen::Vector3d world = backproject(
                visible[a].second.mid_px, visible[a].second.depth_m,
                *visible[a].first);
            const auto proj = project(world, *visible[b].first);
            if (!proj) continue;
            const double r =
                (proj->pixel - visible[b].second.mid_px).norm();
            max_residual = std::max(max_residual, r);
            sum_residual += r;
            ++pairs;
          }
        }
      }
    }
    const bool pass = pairs == 0 || max_residual < 1e-4;
    report["reprojection"] = {
        {"pass", pass},
        {"pairs", pairs},
        {"max_residual_px", max_residual},
        {"mean_residual_px", pairs ? sum_residual / pairs : 0.0}};
    all_pass = all_pass && pass;
  }

  // (e) streak orientation vs elevation per entry
  {
    constexpr std::size_t kMaxDropsChecked = 20000;
    Json views = Json::array();
    bool pass = true;
    for (const ManifestEntry& e : manifest.entries) {
      const auto cam_it = camera_by_view.find(e.view_id);
      if (cam_it == camera_by_view.end()) continue;
      const Camera& cam = *cam_it->second;
      RainParams params = cfg.rain;
      params.density = e.rain_density;
      std::vector<Raindrop> drops =
          sample_drops(params, volume, cfg.up, e.frame_time);
      if (drops.size() > kMaxDropsChecked) drops.resize(kMaxDropsChecked);
      std::vector<Streak> streaks;
      for (const Raindrop& drop : drops)
        if (auto s = streak_for_drop(drop, cam, cfg.exposure_s, cfg.near_m,
                                     params.max_depth))
          streaks.push_back(*s);
      const detail::PatternStats stats =
          detail::classify_streaks(streaks, cam, cfg.rain.wind_speed);
      views.push_back({{"rainy_path", e.rainy_path},
                       {"elevation_deg",
                        cam.angles.elevation * 180.0 / std::numbers::pi},
                       {"expected", stats.expected},
                       {"streaks", stats.streaks},
                       {"agreement", stats.agreement},
                       {"max_angle_deg", stats.max_angle_deg},
                       {"pass", stats.pass}});
      pass = pass && stats.pass;
    }
    report["streak_pattern"] = {{"pass", pass}, {"views", std::move(views)}};
    all_pass = all_pass && pass;
  }

  // (f) preset brightness ordering + histograms
  {
    constexpr int kHistogramBins = 32;
    std::map<std::string, std::vector<std::uint64_t>> histograms;
    std::map<std::string, double> luma_sum;
    std::map<std::string, std::uint64_t> pixel_counts;
    bool conserve = true;
    for (const ManifestEntry& e : manifest.entries) {
      const fs::path path = scene_dir / e.rainy_path;
      if (!fs::exists(path)) continue;
      const ImageBuffer img = read_png_rgb(path);
      const auto hist = brightness_histogram(img, kHistogramBins);
      auto& acc = histograms[e.preset];
      if (acc.empty()) acc.assign(kHistogramBins, 0);
      std::uint64_t total = 0;
      for (int b = 0; b < kHistogramBins; ++b) {
        acc[b] += hist[b];
        total += hist[b];
      }
      if (total != img.pixel_count()) conserve = false;
      luma_sum[e.preset] += mean_luma(img) * img.pixel_count();
      pixel_counts[e.preset] += img.pixel_count();
    }
    Json presets = Json::array();
    std::vector<double> ordered_means;
    for (const char* name : {"light", "moderate", "heavy"}) {
      if (!histograms.count(name)) continue;
      const auto& hist = histograms[name];
      double weighted = 0.0;
      std::uint64_t total = 0;
      for (int b = 0; b < kHistogramBins; ++b) {
        weighted += hist[b] * ((b + 0.5) / kHistogramBins);
        total += hist[b];
      }
      const double hist_mean = total ? weighted / total : 0.0;
      const double direct_mean =
          pixel_counts[name] ? luma_sum[name] / pixel_counts[name] : 0.0;
      ordered_means.push_back(hist_mean);
      presets.push_back({{"preset", name},
                         {"mean_luma", direct_mean},
                         {"histogram_mean", hist_mean},
                         {"pixels", total},
                         {"histogram", hist}});
    }
    bool ordered = true;
    for (std::size_t i = 1; i < ordered_means.size(); ++i)
      if (!(ordered_means[i] < ordered_means[i - 1])) ordered = false;
    const bool pass = ordered && conserve;
    report["brightness"] = {{"pass", pass},
                            {"ordered", ordered},
                            {"pixel_count_conserved", conserve},
                            {"histogram_bins", kHistogramBins},
                            {"presets", std::move(presets)}};
    all_pass = all_pass && pass;
  }

  report["pass"] = all_pass;

  {
    std::ofstream out(scene_dir / "validation_report.json", std::ios::binary);
    if (out) out << report.dump(2) << '\n';
  }

  ValidationReport result;
  result.pass = all_pass;
  result.report = std::move(report);
  return result;
}

// ---------------------------------------------------------------------------
// inspect-poses
// ---------------------------------------------------------------------------

struct PoseRow {
  std::int32_t view_id = 0;
  std::string name;
  double elevation_deg = 0.0;
  double azimuth_deg = 0.0;
  int elevation_bucket = 0;
  int azimuth_bucket = 0;
  bool degenerate_azimuth = false;
};

/// One row per image sorted by (elevation, azimuth), with the W x U grid
/// bucket each view falls in.
inline std::vector<PoseRow> inspect_poses(const std::filesystem::path& colmap_dir,
                                          const Eigen::Vector3d& up,
                                          int elevation_bins, int azimuth_bins) {
  const Reconstruction rec = load_reconstruction(colmap_dir);
  const ViewpointMatrix vm = build_viewpoint_matrix(
      rec.cameras, rec.images, up, elevation_bins, azimuth_bins);
  std::vector<PoseRow> rows;
  rows.reserve(vm.entries.size());
  for (const ViewpointEntry& e : vm.entries) {
    PoseRow row;
    row.view_id = e.camera.view_id;
    row.name = e.camera.name;
    row.elevation_deg = e.camera.angles.elevation * 180.0 / std::numbers::pi;
    row.azimuth_deg = e.camera.angles.azimuth * 180.0 / std::numbers::pi;
    row.elevation_bucket = e.elevation_bucket;
    row.azimuth_bucket = e.azimuth_bucket;
    row.degenerate_azimuth = e.camera.angles.degenerate_azimuth;
    rows.push_back(std::move(row));
  }
  std::sort(rows.begin(), rows.end(), [](const PoseRow& a, const PoseRow& b) {
    if (a.elevation_deg != b.elevation_deg)
      return a.elevation_deg < b.elevation_deg;
    if (a.azimuth_deg != b.azimuth_deg) return a.azimuth_deg < b.azimuth_deg;
    return a.view_id < b.view_id;
  });
  return rows;
}

}  // namespace rainsynth
