#include "stck/scenegen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "stck/rng.hpp"

namespace stck {

namespace {

using nlohmann::json;

struct LiveObject {
  ObjectSpec spec;
  double x = 0.0, y = 0.0;    // center at current frame
  double vx = 0.0, vy = 0.0;
  std::int64_t id = 0;
};

void validate(const SceneConfig& cfg) {
  if (cfg.width < 16 || cfg.height < 16 || cfg.width % 4 != 0 || cfg.height % 4 != 0)
    throw std::invalid_argument("scene: frame size must be multiples of 4, >= 16");
  if (cfg.length < 2) throw std::invalid_argument("scene: length must be >= 2");
  if (cfg.objects.empty()) {
    if (cfg.min_objects < 1 || cfg.max_objects < cfg.min_objects)
      throw std::invalid_argument("scene: bad object count range");
    if (cfg.min_size < 8.0)
      throw std::invalid_argument("scene: object sizes must be >= 8 px");
    if (cfg.max_size < cfg.min_size) throw std::invalid_argument("scene: bad size range");
    if (cfg.max_size >= std::min(cfg.width, cfg.height))
      throw std::invalid_argument("scene: objects larger than the frame");
    const double speed_cap = std::min(cfg.width, cfg.height) / 10.0;
    if (cfg.min_speed < 0.0 || cfg.max_speed < cfg.min_speed || cfg.max_speed > speed_cap)
      throw std::invalid_argument("scene: speeds must stay within frame-size/10 px/frame");
  } else {
    for (const ObjectSpec& o : cfg.objects) {
      if (o.width < 8.0 || o.height < 8.0)
        throw std::invalid_argument("scene: object sizes must be >= 8 px");
      if (o.width >= cfg.width || o.height >= cfg.height)
        throw std::invalid_argument("scene: object larger than the frame");
      if (o.shape != "disc" && o.shape != "rectangle")
        throw std::invalid_argument("scene: unknown shape " + o.shape);
      const double speed_cap = std::min(cfg.width, cfg.height) / 10.0;
      if (std::hypot(o.vx, o.vy) > speed_cap)
        throw std::invalid_argument("scene: object speed exceeds frame-size/10 px/frame");
    }
  }
  if (cfg.noise_sigma < 0.0) throw std::invalid_argument("scene: negative noise sigma");
}

std::vector<ObjectSpec> sample_objects(const SceneConfig& cfg, Rng& rng) {
  const int count = rng.uniform_int(cfg.min_objects, cfg.max_objects);
  std::vector<ObjectSpec> specs;
  specs.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    ObjectSpec o;
    if (cfg.shape == "mixed") {
      o.shape = (i % 2 == 0) ? "disc" : "rectangle";
    } else {
      o.shape = cfg.shape;
    }
    o.width = rng.uniform(cfg.min_size, cfg.max_size);
    o.height = o.shape == "disc" ? o.width : rng.uniform(cfg.min_size, cfg.max_size);
    o.color = cfg.uniform_color ? cfg.color : object_palette()[static_cast<std::size_t>(i) % 12];
    const double mx = o.width / 2.0 + 2.0, my = o.height / 2.0 + 2.0;
    o.x = rng.uniform(mx, cfg.width - mx);
    o.y = rng.uniform(my, cfg.height - my);
    const double speed = rng.uniform(cfg.min_speed, cfg.max_speed);
    const double angle = rng.uniform(0.0, 6.283185307179586);
    o.vx = speed * std::cos(angle);
    o.vy = speed * std::sin(angle);
    o.spawn = rng.uniform_int(cfg.spawn_min, std::max(cfg.spawn_min, cfg.spawn_max));
    const int dmin = cfg.despawn_min < 0 ? cfg.length : cfg.despawn_min;
    const int dmax = cfg.despawn_max < 0 ? cfg.length : cfg.despawn_max;
    o.despawn = rng.uniform_int(dmin, std::max(dmin, dmax));
    specs.push_back(std::move(o));
  }
  return specs;
}

void draw_object(Frame& frame, const LiveObject& obj) {
  const double hw = obj.spec.width / 2.0, hh = obj.spec.height / 2.0;
  const int x0 = std::max(0, static_cast<int>(std::floor(obj.x - hw)));
  const int x1 = std::min(frame.width - 1, static_cast<int>(std::ceil(obj.x + hw)));
  const int y0 = std::max(0, static_cast<int>(std::floor(obj.y - hh)));
  const int y1 = std::min(frame.height - 1, static_cast<int>(std::ceil(obj.y + hh)));
  const bool disc = obj.spec.shape == "disc";
  const double r = hw;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double dx = x + 0.5 - obj.x, dy = y + 0.5 - obj.y;
      bool inside;
      if (disc) {
        inside = dx * dx + dy * dy <= r * r;
      } else {
        inside = std::abs(dx) <= hw && std::abs(dy) <= hh;
      }
      if (!inside) continue;
      for (int c = 0; c < 3; ++c) frame.pixels.at(c, y, x) = obj.spec.color[static_cast<std::size_t>(c)];
    }
  }
}

}  // namespace

const std::array<std::array<double, 3>, 12>& object_palette() {
  static const std::array<std::array<double, 3>, 12> palette = {{
      {0.90, 0.10, 0.10},
      {0.10, 0.75, 0.10},
      {0.15, 0.25, 0.95},
      {0.95, 0.85, 0.10},
      {0.85, 0.15, 0.85},
      {0.10, 0.85, 0.85},
      {0.95, 0.55, 0.10},
      {0.55, 0.10, 0.85},
      {0.55, 0.85, 0.25},
      {0.80, 0.45, 0.45},
      {0.45, 0.60, 0.80},
      {0.95, 0.95, 0.85},
  }};
  return palette;
}

std::pair<std::vector<Frame>, GroundTruth> generate(const SceneConfig& cfg) {
  validate(cfg);
  Rng rng(cfg.seed);
  std::vector<ObjectSpec> specs = cfg.objects.empty() ? sample_objects(cfg, rng) : cfg.objects;
  for (ObjectSpec& o : specs) {
    if (o.despawn < 0) o.despawn = cfg.length;
    if (cfg.uniform_color && !cfg.objects.empty()) o.color = cfg.color;
  }

  std::vector<LiveObject> objects;
  objects.reserve(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    LiveObject lo;
    lo.spec = specs[i];
    lo.x = specs[i].x;
    lo.y = specs[i].y;
    lo.vx = specs[i].vx;
    lo.vy = specs[i].vy;
    lo.id = static_cast<std::int64_t>(i) + 1;
    objects.push_back(std::move(lo));
  }

  std::vector<Frame> frames;
  GroundTruth gt;
  frames.reserve(static_cast<std::size_t>(cfg.length));
  gt.frames.resize(static_cast<std::size_t>(cfg.length));

  for (int t = 0; t < cfg.length; ++t) {
    Frame frame = make_frame(cfg.width, cfg.height, t + 1);
    std::fill(frame.pixels.data.begin(), frame.pixels.data.end(), 0.1);

    for (LiveObject& obj : objects) {
      if (t < obj.spec.spawn || t >= obj.spec.despawn) continue;
      draw_object(frame, obj);

      GtBox box;
      box.id = obj.id;
      const double hw = obj.spec.width / 2.0, hh = obj.spec.height / 2.0;
      const double left = std::clamp(obj.x - hw, 0.0, static_cast<double>(cfg.width));
      const double right = std::clamp(obj.x + hw, 0.0, static_cast<double>(cfg.width));
      const double top = std::clamp(obj.y - hh, 0.0, static_cast<double>(cfg.height));
      const double bottom = std::clamp(obj.y + hh, 0.0, static_cast<double>(cfg.height));
      box.left = left;
      box.top = top;
      box.width = right - left;
      box.height = bottom - top;
      box.visible = obj.x >= 0.0 && obj.x < cfg.width && obj.y >= 0.0 && obj.y < cfg.height;
      gt.frames[static_cast<std::size_t>(t)].push_back(box);
    }

    if (cfg.noise_sigma > 0.0) {
      Rng noise(cfg.seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(t + 1)));
      for (double& v : frame.pixels.data)
        v = std::clamp(v + noise.normal(0.0, cfg.noise_sigma), 0.0, 1.0);
    }
    frames.push_back(std::move(frame));

    // Advance to the next frame.
    for (LiveObject& obj : objects) {
      if (t < obj.spec.spawn || t >= obj.spec.despawn) continue;
      obj.x += obj.vx;
      obj.y += obj.vy;
      if (cfg.bounce) {
        const double hw = obj.spec.width / 2.0, hh = obj.spec.height / 2.0;
        if (obj.x - hw < 0.0) {
          obj.x = 2.0 * hw - obj.x;
          obj.vx = -obj.vx;
        } else if (obj.x + hw > cfg.width) {
          obj.x = 2.0 * (cfg.width - hw) - obj.x;
          obj.vx = -obj.vx;
        }
        if (obj.y - hh < 0.0) {
          obj.y = 2.0 * hh - obj.y;
          obj.vy = -obj.vy;
        } else if (obj.y + hh > cfg.height) {
          obj.y = 2.0 * (cfg.height - hh) - obj.y;
          obj.vy = -obj.vy;
        }
      }
    }
  }
  return {std::move(frames), std::move(gt)};
}

// --- presets -----------------------------------------------------------------

SceneConfig preset_static(std::uint64_t seed) {
  SceneConfig cfg;
  cfg.seed = seed;
  cfg.length = 30;
  ObjectSpec o;
  o.shape = "rectangle";
  o.width = 18.0;
  o.height = 14.0;
  o.color = object_palette()[0];
  o.x = 52.0;
  o.y = 70.0;
  cfg.objects.push_back(o);
  return cfg;
}

SceneConfig preset_crossing(std::uint64_t seed, bool uniform_color) {
  SceneConfig cfg;
  cfg.seed = seed;
  cfg.length = 40;
  cfg.uniform_color = uniform_color;
  cfg.color = {0.85, 0.85, 0.85};

  Rng rng(seed);
  const double cx = cfg.width / 2.0, cy = cfg.height / 2.0;
  const double t_star = cfg.length / 2.0;
  // Anti-symmetric vertical offset keeps the minimum center distance below
  // 2*|dy| < 8 px while the paths still cross mid-sequence.
  const double dy = rng.uniform(-3.0, 3.0);
  const double vy = rng.uniform(0.4, 0.7) * (rng.uniform() < 0.5 ? 1.0 : -1.0);
  const double vx = rng.uniform(1.4, 1.8);

  ObjectSpec a;
  a.shape = "disc";
  a.width = a.height = 14.0;
  a.color = uniform_color ? cfg.color : object_palette()[0];
  a.vx = vx;
  a.vy = vy;
  a.x = cx - t_star * vx;
  a.y = cy + dy - t_star * vy;

  ObjectSpec b;
  b.shape = "disc";
  b.width = b.height = uniform_color ? 14.0 : 16.0;
  b.color = uniform_color ? cfg.color : object_palette()[2];
  b.vx = -vx;
  b.vy = -vy;
  b.x = cx + t_star * vx;
  b.y = cy - dy + t_star * vy;

  cfg.objects = {a, b};
  return cfg;
}

SceneConfig preset_random(std::uint64_t seed) {
  SceneConfig cfg;
  cfg.seed = seed;
  return cfg;
}

// --- JSON ----------------------------------------------------------------------

SceneConfig scene_config_from_json(const std::string& json_text) {
  json j = json::parse(json_text);
  SceneConfig cfg;
  if (j.contains("preset")) {
    const std::string preset = j.at("preset").get<std::string>();
    const std::uint64_t seed = j.value("seed", cfg.seed);
    if (preset == "static") {
      cfg = preset_static(seed);
    } else if (preset == "crossing") {
      cfg = preset_crossing(seed, j.value("uniform_color", false));
    } else if (preset == "random") {
      cfg = preset_random(seed);
    } else {
      throw std::invalid_argument("scene: unknown preset " + preset);
    }
  }
  cfg.width = j.value("width", cfg.width);
  cfg.height = j.value("height", cfg.height);
  cfg.length = j.value("length", cfg.length);
  cfg.min_objects = j.value("min_objects", cfg.min_objects);
  cfg.max_objects = j.value("max_objects", cfg.max_objects);
  cfg.shape = j.value("shape", cfg.shape);
  cfg.min_size = j.value("min_size", cfg.min_size);
  cfg.max_size = j.value("max_size", cfg.max_size);
  cfg.min_speed = j.value("min_speed", cfg.min_speed);
  cfg.max_speed = j.value("max_speed", cfg.max_speed);
  cfg.uniform_color = j.value("uniform_color", cfg.uniform_color);
  if (j.contains("color")) {
    auto c = j.at("color");
    for (int i = 0; i < 3; ++i) cfg.color[static_cast<std::size_t>(i)] = c.at(i).get<double>();
  }
  cfg.spawn_min = j.value("spawn_min", cfg.spawn_min);
  cfg.spawn_max = j.value("spawn_max", cfg.spawn_max);
  cfg.despawn_min = j.value("despawn_min", cfg.despawn_min);
  cfg.despawn_max = j.value("despawn_max", cfg.despawn_max);
  cfg.noise_sigma = j.value("noise_sigma", cfg.noise_sigma);
  cfg.bounce = j.value("bounce", cfg.bounce);
  cfg.seed = j.value("seed", cfg.seed);
  if (j.contains("objects")) {
    for (const auto& jo : j.at("objects")) {
      ObjectSpec o;
      o.shape = jo.value("shape", o.shape);
      o.width = jo.value("width", o.width);
      o.height = jo.value("height", o.height);
      if (jo.contains("color")) {
        auto c = jo.at("color");
        for (int i = 0; i < 3; ++i) o.color[static_cast<std::size_t>(i)] = c.at(i).get<double>();
      }
      o.x = jo.value("x", o.x);
      o.y = jo.value("y", o.y);
      o.vx = jo.value("vx", o.vx);
      o.vy = jo.value("vy", o.vy);
      o.spawn = jo.value("spawn", o.spawn);
      o.despawn = jo.value("despawn", o.despawn);
      cfg.objects.push_back(std::move(o));
    }
  }
  return cfg;
}

SceneConfig scene_config_from_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open scene config " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return scene_config_from_json(ss.str());
}

std::string scene_config_to_json(const SceneConfig& cfg) {
  json j;
  j["width"] = cfg.width;
  j["height"] = cfg.height;
  j["length"] = cfg.length;
  j["min_objects"] = cfg.min_objects;
  j["max_objects"] = cfg.max_objects;
  j["shape"] = cfg.shape;
  j["min_size"] = cfg.min_size;
  j["max_size"] = cfg.max_size;
  j["min_speed"] = cfg.min_speed;
  j["max_speed"] = cfg.max_speed;
  j["uniform_color"] = cfg.uniform_color;
  j["color"] = cfg.color;
  j["spawn_min"] = cfg.spawn_min;
  j["spawn_max"] = cfg.spawn_max;
  j["despawn_min"] = cfg.despawn_min;
  j["despawn_max"] = cfg.despawn_max;
  j["noise_sigma"] = cfg.noise_sigma;
  j["bounce"] = cfg.bounce;
  j["seed"] = cfg.seed;
  if (!cfg.objects.empty()) {
    json arr = json::array();
    for (const ObjectSpec& o : cfg.objects) {
      json jo;
      jo["shape"] = o.shape;
      jo["width"] = o.width;
      jo["height"] = o.height;
      jo["color"] = o.color;
      jo["x"] = o.x;
      jo["y"] = o.y;
      jo["vx"] = o.vx;
      jo["vy"] = o.vy;
      jo["spawn"] = o.spawn;
      jo["despawn"] = o.despawn;
      arr.push_back(jo);
    }
    j["objects"] = arr;
  }
  return j.dump(2) + "\n";
}

}  // namespace stck
