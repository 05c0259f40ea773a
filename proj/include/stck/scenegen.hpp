#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "stck/nets.hpp"
#include "stck/tensor.hpp"

namespace stck {

struct GtBox {
  std::int64_t id = 0;
  double left = 0.0, top = 0.0, width = 0.0, height = 0.0;  // pixels, clamped to frame
  bool visible = true;  // false once the center leaves the frame
};

struct GroundTruth {
  // frames[t] lists the objects alive at frame t (0-based).
  std::vector<std::vector<GtBox>> frames;
};

// Explicit object script; used by the presets and available in scene JSON.
struct ObjectSpec {
  std::string shape = "disc";  // "disc" | "rectangle"
  double width = 16.0, height = 16.0;  // pixels
  std::array<double, 3> color{0.9, 0.2, 0.2};
  double x = 64.0, y = 64.0;  // center at spawn, pixels
  double vx = 0.0, vy = 0.0;  // pixels/frame
  int spawn = 0;              // first frame (0-based)
  int despawn = -1;           // one past last frame; -1 = sequence end
};

struct SceneConfig {
  int width = 128, height = 128;
  int length = 40;
  int min_objects = 2, max_objects = 4;
  std::string shape = "mixed";  // "disc" | "rectangle" | "mixed"
  double min_size = 10.0, max_size = 22.0;    // pixels
  double min_speed = 0.5, max_speed = 2.0;    // pixels/frame
  bool uniform_color = false;
  std::array<double, 3> color{0.85, 0.85, 0.85};  // used when uniform_color
  int spawn_min = 0, spawn_max = 0;
  int despawn_min = -1, despawn_max = -1;  // -1 = sequence end
  double noise_sigma = 0.02;
  bool bounce = true;
  std::uint64_t seed = 1;
  std::vector<ObjectSpec> objects;  // when non-empty, overrides sampling
};

SceneConfig scene_config_from_json(const std::string& json_text);
SceneConfig scene_config_from_file(const std::string& path);
std::string scene_config_to_json(const SceneConfig& cfg);

// Deterministic in the config (seed included). Objects move at constant
// velocity, optionally bouncing off walls; distinct palette colors unless
// uniform_color is set; additive Gaussian pixel noise.
std::pair<std::vector<Frame>, GroundTruth> generate(const SceneConfig& cfg);

// Presets. The crossing preset scripts two objects whose paths intersect
// (center distance < 8 px at an interior frame).
SceneConfig preset_static(std::uint64_t seed);
SceneConfig preset_crossing(std::uint64_t seed, bool uniform_color = false);
SceneConfig preset_random(std::uint64_t seed);

const std::array<std::array<double, 3>, 12>& object_palette();

}  // namespace stck
