#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "rainsynth/errors.hpp"
#include "rainsynth/streak_raster.hpp"

namespace rainsynth {

using Rgb = std::array<double, 3>;

/// Per-channel ambient brightness factor, componentwise in (0, 1].
struct AmbientLight {
  Rgb value = {1.0, 1.0, 1.0};
};

/// Normalized RGB raster, row-major, channels interleaved.
struct ImageBuffer {
  int width = 0;
  int height = 0;
  std::vector<double> values;  // size width * height * 3

  static ImageBuffer filled(int w, int h, double v) {
    ImageBuffer img;
    img.width = w;
    img.height = h;
    img.values.assign(std::size_t(w) * h * 3, v);
    return img;
  }

  std::size_t pixel_count() const { return std::size_t(width) * height; }
  double& at(int x, int y, int c) {
    return values[(std::size_t(y) * width + x) * 3 + c];
  }
  double at(int x, int y, int c) const {
    return values[(std::size_t(y) * width + x) * 3 + c];
  }
};

enum class RainLevel { Light, Moderate, Heavy };

inline const char* rain_level_name(RainLevel level) {
  switch (level) {
    case RainLevel::Light: return "light";
    case RainLevel::Moderate: return "moderate";
    case RainLevel::Heavy: return "heavy";
  }
  return "?";
}

/// Density multipliers that separate the three preset levels.
inline double rain_level_multiplier(RainLevel level) {
  switch (level) {
    case RainLevel::Light: return 1.0;
    case RainLevel::Moderate: return 3.0;
    case RainLevel::Heavy: return 6.0;
  }
  return 1.0;
}

struct RainPreset {
  RainLevel level = RainLevel::Light;
  double density = 0.0;
  AmbientLight light;
};

/// Beer-Lambert ambient brightness under rain: L = L0 * exp(-gamma * density),
/// componentwise over channels.
inline AmbientLight ambient_from_density(const Rgb& base, double gamma,
                                         double density) {
  if (gamma < 0.0) throw ParamOutOfRangeError("gamma must be >= 0");
  if (density < 0.0) throw ParamOutOfRangeError("density must be >= 0");
  AmbientLight out;
  const double decay = std::exp(-gamma * density);
  for (int c = 0; c < 3; ++c) {
    if (!(base[c] > 0.0 && base[c] <= 1.0))
      throw ParamOutOfRangeError("ambient base must be in (0, 1]");
    out.value[c] = base[c] * decay;
  }
  return out;
}

/// Rainy-image formation: per pixel and channel,
/// out = clamp(L_c * (B_c + mask * tint_c), 0, 1).
inline ImageBuffer compose(const ImageBuffer& background, const RainMask& mask,
                           const AmbientLight& light, const Rgb& rain_tint) {
  if (background.width != mask.width || background.height != mask.height)
    throw DimensionMismatchError(
        "background " + std::to_string(background.width) + "x" +
        std::to_string(background.height) + " vs mask " +
        std::to_string(mask.width) + "x" + std::to_string(mask.height));
  ImageBuffer out;
  out.width = background.width;
  out.height = background.height;
  out.values.resize(background.values.size());
  const std::size_t n = background.pixel_count();
  for (std::size_t p = 0; p < n; ++p) {
    const double r = mask.values[p];
    for (int c = 0; c < 3; ++c) {
      const double v =
          light.value[c] * (background.values[p * 3 + c] + r * rain_tint[c]);
      out.values[p * 3 + c] = std::clamp(v, 0.0, 1.0);
    }
  }
  return out;
}

/// The legacy additive model (no brightness coupling): out = clamp(B + R).
inline ImageBuffer compose_legacy(const ImageBuffer& background,
                                  const RainMask& mask, const Rgb& rain_tint) {
  return compose(background, mask, AmbientLight{{1.0, 1.0, 1.0}}, rain_tint);
}

/// Density and ambient light for one of the three preset rain levels.
inline RainPreset preset_params(RainLevel level, const Rgb& base, double gamma,
                                double base_density) {
  if (!(base_density > 0.0))
    throw ParamOutOfRangeError("base density must be > 0");
  RainPreset preset;
  preset.level = level;
  preset.density = base_density * rain_level_multiplier(level);
  preset.light = ambient_from_density(base, gamma, preset.density);
  return preset;
}

/// Mean-of-channels luma of one pixel.
inline double pixel_luma(const ImageBuffer& img, std::size_t pixel) {
  return (img.values[pixel * 3] + img.values[pixel * 3 + 1] +
          img.values[pixel * 3 + 2]) /
         3.0;
}

inline double mean_luma(const ImageBuffer& img) {
  double sum = 0.0;
  const std::size_t n = img.pixel_count();
  for (std::size_t p = 0; p < n; ++p) sum += pixel_luma(img, p);
  return n ? sum / static_cast<double>(n) : 0.0;
}

/// Histogram of per-pixel luma over uniform bins spanning [0, 1]. Counts sum
/// to the pixel count; luma 1.0 lands in the last bin.
inline std::vector<std::uint64_t> brightness_histogram(const ImageBuffer& img,
                                                       int bins) {
  if (bins < 2) throw ParamOutOfRangeError("histogram needs at least 2 bins");
  std::vector<std::uint64_t> counts(bins, 0);
  const std::size_t n = img.pixel_count();
  for (std::size_t p = 0; p < n; ++p) {
    const double luma = pixel_luma(img, p);
    const int bin = std::clamp(static_cast<int>(luma * bins), 0, bins - 1);
    ++counts[bin];
  }
  return counts;
}

}  // namespace rainsynth
