#include "stck/scenegen.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace stck;

TEST(Generate, DeterministicInSeed) {
  const SceneConfig cfg = preset_random(42);
  auto [frames_a, gt_a] = generate(cfg);
  auto [frames_b, gt_b] = generate(cfg);
  ASSERT_EQ(frames_a.size(), frames_b.size());
  for (std::size_t t = 0; t < frames_a.size(); ++t)
    ASSERT_EQ(frames_a[t].pixels.data, frames_b[t].pixels.data) << "frame " << t;
  ASSERT_EQ(gt_a.frames.size(), gt_b.frames.size());
  for (std::size_t t = 0; t < gt_a.frames.size(); ++t) {
    ASSERT_EQ(gt_a.frames[t].size(), gt_b.frames[t].size());
    for (std::size_t i = 0; i < gt_a.frames[t].size(); ++i) {
      EXPECT_EQ(gt_a.frames[t][i].id, gt_b.frames[t][i].id);
      EXPECT_EQ(gt_a.frames[t][i].left, gt_b.frames[t][i].left);
      EXPECT_EQ(gt_a.frames[t][i].top, gt_b.frames[t][i].top);
    }
  }
}

TEST(Generate, StaticPresetKeepsBoxConstant) {
  auto [frames, gt] = generate(preset_static(5));
  ASSERT_FALSE(gt.frames.empty());
  const GtBox first = gt.frames[0][0];
  for (const auto& frame_boxes : gt.frames) {
    ASSERT_EQ(frame_boxes.size(), 1u);
    EXPECT_DOUBLE_EQ(frame_boxes[0].left, first.left);
    EXPECT_DOUBLE_EQ(frame_boxes[0].top, first.top);
    EXPECT_DOUBLE_EQ(frame_boxes[0].width, first.width);
    EXPECT_DOUBLE_EQ(frame_boxes[0].height, first.height);
  }
}

TEST(Generate, CrossingPresetPathsIntersect) {
  for (std::uint64_t seed : {1ull, 7ull, 23ull}) {
    auto [frames, gt] = generate(preset_crossing(seed));
    double min_dist = 1e9;
    std::size_t min_t = 0;
    for (std::size_t t = 0; t < gt.frames.size(); ++t) {
      if (gt.frames[t].size() != 2) continue;
      const auto& a = gt.frames[t][0];
      const auto& b = gt.frames[t][1];
      const double d = std::hypot((a.left + a.width / 2) - (b.left + b.width / 2),
                                  (a.top + a.height / 2) - (b.top + b.height / 2));
      if (d < min_dist) {
        min_dist = d;
        min_t = t;
      }
    }
    EXPECT_LT(min_dist, 8.0) << "seed " << seed;
    EXPECT_GT(min_t, 0u);
    EXPECT_LT(min_t, gt.frames.size() - 1);
  }
}

TEST(Generate, BoxesStayInsideImage) {
  for (std::uint64_t seed : {3ull, 9ull}) {
    const SceneConfig cfg = preset_random(seed);
    auto [frames, gt] = generate(cfg);
    for (const auto& frame_boxes : gt.frames) {
      for (const GtBox& b : frame_boxes) {
        EXPECT_GE(b.left, 0.0);
        EXPECT_GE(b.top, 0.0);
        EXPECT_LE(b.left + b.width, cfg.width);
        EXPECT_LE(b.top + b.height, cfg.height);
        EXPECT_GE(b.width, 0.0);
      }
    }
  }
}

TEST(Generate, InfeasibleConfigThrows) {
  SceneConfig cfg;
  cfg.min_size = 200.0;  // larger than the frame
  cfg.max_size = 220.0;
  EXPECT_THROW(generate(cfg), std::invalid_argument);

  SceneConfig tiny;
  tiny.min_size = 4.0;  // below the 8 px floor
  tiny.max_size = 6.0;
  EXPECT_THROW(generate(tiny), std::invalid_argument);

  SceneConfig fast;
  fast.min_speed = 20.0;  // would cross the frame in under 10 frames
  fast.max_speed = 30.0;
  EXPECT_THROW(generate(fast), std::invalid_argument);
}

TEST(Generate, UniformColorPreset) {
  const SceneConfig cfg = preset_crossing(3, /*uniform_color=*/true);
  ASSERT_EQ(cfg.objects.size(), 2u);
  EXPECT_EQ(cfg.objects[0].color, cfg.objects[1].color);
  EXPECT_EQ(cfg.objects[0].width, cfg.objects[1].width);
  auto [frames, gt] = generate(cfg);
  EXPECT_EQ(frames.size(), static_cast<std::size_t>(cfg.length));
}

TEST(SceneJson, RoundTrip) {
  SceneConfig cfg = preset_crossing(11);
  cfg.noise_sigma = 0.05;
  const std::string text = scene_config_to_json(cfg);
  const SceneConfig back = scene_config_from_json(text);
  EXPECT_EQ(back.width, cfg.width);
  EXPECT_EQ(back.length, cfg.length);
  EXPECT_EQ(back.seed, cfg.seed);
  EXPECT_EQ(back.noise_sigma, cfg.noise_sigma);
  ASSERT_EQ(back.objects.size(), cfg.objects.size());
  for (std::size_t i = 0; i < cfg.objects.size(); ++i) {
    EXPECT_EQ(back.objects[i].x, cfg.objects[i].x);
    EXPECT_EQ(back.objects[i].vx, cfg.objects[i].vx);
    EXPECT_EQ(back.objects[i].shape, cfg.objects[i].shape);
  }
  // Same config -> identical scenes.
  auto [fa, ga] = generate(cfg);
  auto [fb, gb] = generate(back);
  for (std::size_t t = 0; t < fa.size(); ++t) EXPECT_EQ(fa[t].pixels.data, fb[t].pixels.data);
}

TEST(SceneJson, PresetKeyExpands) {
  const SceneConfig cfg = scene_config_from_json(R"({"preset":"crossing","seed":9})");
  EXPECT_EQ(cfg.objects.size(), 2u);
  EXPECT_EQ(cfg.seed, 9u);
  const SceneConfig uni =
      scene_config_from_json(R"({"preset":"crossing","seed":9,"uniform_color":true})");
  EXPECT_TRUE(uni.uniform_color);
  EXPECT_THROW(scene_config_from_json(R"({"preset":"bogus"})"), std::invalid_argument);
}
