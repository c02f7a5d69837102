#include "rainsynth/photometric.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "support/oracles.hpp"

using namespace rainsynth;

namespace {

RainMask uniform_mask(int w, int h, double v) {
  RainMask m;
  m.width = w;
  m.height = h;
  m.values.assign(std::size_t(w) * h, v);
  return m;
}

TEST(Ambient, ZeroDensityIsExactBase) {
  const Rgb base = {0.9, 0.8, 0.7};
  const AmbientLight light = ambient_from_density(base, 0.5, 0.0);
  for (int c = 0; c < 3; ++c) EXPECT_EQ(light.value[c], base[c]);
}

TEST(Ambient, MatchesHighPrecisionExponential) {
  const AmbientLight light = ambient_from_density({1.0, 1.0, 1.0}, 0.2, 5.0);
  const double expected = static_cast<double>(expl(-1.0L));
  for (int c = 0; c < 3; ++c) {
    EXPECT_NEAR(light.value[c], expected, 1e-15);
    EXPECT_NEAR(light.value[c], 0.367879441, 1e-9);
  }
}

TEST(Ambient, ZeroGammaKeepsBase) {
  for (double density : {0.0, 1.0, 123.0}) {
    const AmbientLight light =
        ambient_from_density({0.3, 0.5, 1.0}, 0.0, density);
    EXPECT_EQ(light.value[0], 0.3);
    EXPECT_EQ(light.value[1], 0.5);
    EXPECT_EQ(light.value[2], 1.0);
  }
}

TEST(Ambient, StrictlyDecreasingInDensity) {
  double prev = 2.0;
  for (double density : {0.0, 0.5, 1.0, 2.0, 4.0, 8.0}) {
    const AmbientLight light = ambient_from_density({1.0, 1.0, 1.0}, 0.7,
                                                    density);
    EXPECT_LT(light.value[0], prev);
    prev = light.value[0];
  }
}

TEST(Ambient, RejectsBadArguments) {
  EXPECT_THROW(ambient_from_density({0.0, 1.0, 1.0}, 0.5, 1.0),
               ParamOutOfRangeError);
  EXPECT_THROW(ambient_from_density({1.0, 1.0, 1.1}, 0.5, 1.0),
               ParamOutOfRangeError);
  EXPECT_THROW(ambient_from_density({1.0, 1.0, 1.0}, -0.5, 1.0),
               ParamOutOfRangeError);
}

TEST(Compose, IdentityWhenNoRainAndFullLight) {
  oracle::TestRng rng(3);
  ImageBuffer bg = ImageBuffer::filled(8, 6, 0.0);
  for (double& v : bg.values) v = rng.uniform(0.0, 1.0);
  const ImageBuffer out = compose(bg, uniform_mask(8, 6, 0.0),
                                  AmbientLight{{1, 1, 1}}, {1, 1, 1});
  EXPECT_EQ(out.values, bg.values);  // bit-exact
}

TEST(Compose, ClampsAtOne) {
  const ImageBuffer bg = ImageBuffer::filled(4, 4, 0.9);
  const ImageBuffer out = compose(bg, uniform_mask(4, 4, 0.3),
                                  AmbientLight{{1, 1, 1}}, {1, 1, 1});
  for (double v : out.values) EXPECT_DOUBLE_EQ(v, 1.0);
}

TEST(Compose, HandArithmetic) {
  const ImageBuffer bg = ImageBuffer::filled(2, 2, 0.4);
  const ImageBuffer out = compose(bg, uniform_mask(2, 2, 0.2),
                                  AmbientLight{{0.5, 0.5, 0.5}}, {1, 1, 1});
  for (double v : out.values) EXPECT_NEAR(v, 0.3, 1e-12);
}

TEST(Compose, DimensionMismatchThrows) {
  const ImageBuffer bg = ImageBuffer::filled(4, 4, 0.5);
  EXPECT_THROW(
      compose(bg, uniform_mask(5, 4, 0.0), AmbientLight{{1, 1, 1}}, {1, 1, 1}),
      DimensionMismatchError);
}

TEST(ComposeLegacy, MatchesComposeWithUnitLight) {
  oracle::TestRng rng(17);
  ImageBuffer bg = ImageBuffer::filled(6, 5, 0.0);
  for (double& v : bg.values) v = rng.uniform(0.0, 1.0);
  RainMask mask = uniform_mask(6, 5, 0.0);
  for (double& v : mask.values) v = rng.uniform(0.0, 0.5);
  const ImageBuffer legacy = compose_legacy(bg, mask, {0.9, 0.8, 1.0});
  const ImageBuffer full =
      compose(bg, mask, AmbientLight{{1, 1, 1}}, {0.9, 0.8, 1.0});
  EXPECT_EQ(legacy.values, full.values);
}

TEST(ComposeLegacy, HandArithmetic) {
  const ImageBuffer bg = ImageBuffer::filled(2, 2, 0.5);
  const ImageBuffer out = compose_legacy(bg, uniform_mask(2, 2, 0.25),
                                         {1, 1, 1});
  for (double v : out.values) EXPECT_DOUBLE_EQ(v, 0.75);
}

TEST(Presets, LightLevelValues) {
  const RainPreset light = preset_params(RainLevel::Light, {1, 1, 1}, 1.0, 0.1);
  EXPECT_DOUBLE_EQ(light.density, 0.1);
  EXPECT_NEAR(light.light.value[0], 0.9048, 1e-4);
  EXPECT_NEAR(light.light.value[0], static_cast<double>(expl(-0.1L)), 1e-15);
}

TEST(Presets, DensityAndBrightnessOrdering) {
  const Rgb base = {1, 1, 1};
  const RainPreset l = preset_params(RainLevel::Light, base, 1.0, 0.1);
  const RainPreset m = preset_params(RainLevel::Moderate, base, 1.0, 0.1);
  const RainPreset h = preset_params(RainLevel::Heavy, base, 1.0, 0.1);
  EXPECT_DOUBLE_EQ(m.density, 0.3);
  EXPECT_DOUBLE_EQ(h.density, 0.6);
  EXPECT_GT(h.density, m.density);
  EXPECT_GT(m.density, l.density);
  for (int c = 0; c < 3; ++c) {
    EXPECT_GT(l.light.value[c], m.light.value[c]);
    EXPECT_GT(m.light.value[c], h.light.value[c]);
  }
}

TEST(Presets, ZeroGammaGivesEqualLight) {
  const Rgb base = {0.8, 0.9, 1.0};
  for (RainLevel level :
       {RainLevel::Light, RainLevel::Moderate, RainLevel::Heavy}) {
    const RainPreset p = preset_params(level, base, 0.0, 0.1);
    for (int c = 0; c < 3; ++c) EXPECT_EQ(p.light.value[c], base[c]);
  }
}

TEST(Compose, MeanLumaNonIncreasingInDensity) {
  oracle::TestRng rng(29);
  ImageBuffer bg = ImageBuffer::filled(16, 16, 0.0);
  for (double& v : bg.values) v = rng.uniform(0.1, 0.9);
  RainMask mask = uniform_mask(16, 16, 0.0);
  for (double& v : mask.values) v = rng.uniform(0.0, 0.2);
  double prev = 2.0;
  for (double density : {0.0, 0.3, 0.9, 2.7}) {
    const AmbientLight light =
        ambient_from_density({1, 1, 1}, 0.5, density);
    const double luma = mean_luma(compose(bg, mask, light, {1, 1, 1}));
    EXPECT_LE(luma, prev);
    prev = luma;
  }
}

TEST(Histogram, ConstantImageFallsInOneBin) {
  const ImageBuffer img = ImageBuffer::filled(10, 10, 0.5);
  const auto hist = brightness_histogram(img, 10);
  for (int b = 0; b < 10; ++b)
    EXPECT_EQ(hist[b], b == 5 ? 100u : 0u) << "bin " << b;
}

TEST(Histogram, CountsConservePixels) {
  oracle::TestRng rng(31);
  ImageBuffer img = ImageBuffer::filled(33, 17, 0.0);
  for (double& v : img.values) v = rng.uniform(0.0, 1.0);
  const auto hist = brightness_histogram(img, 7);
  std::uint64_t total = 0;
  for (auto c : hist) total += c;
  EXPECT_EQ(total, img.pixel_count());
}

TEST(Histogram, HalfDarkHalfBrightSplitsEvenly) {
  ImageBuffer img = ImageBuffer::filled(10, 10, 0.0);
  for (int y = 5; y < 10; ++y)
    for (int x = 0; x < 10; ++x)
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = 1.0;
  const auto hist = brightness_histogram(img, 2);
  EXPECT_EQ(hist[0], 50u);
  EXPECT_EQ(hist[1], 50u);  // luma 1.0 clamps into the top bin
}

TEST(Histogram, RejectsFewBins) {
  EXPECT_THROW(brightness_histogram(ImageBuffer::filled(2, 2, 0.5), 1),
               ParamOutOfRangeError);
}

}  // namespace
