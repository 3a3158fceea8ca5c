#include "smot/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace smot {

namespace {

// mt19937_64 is bit-stable across platforms; the mappings below avoid the
// implementation-defined std distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(uniform() * (hi - lo + 1));
  }
  double gauss() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform(), u2 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    spare_ = mag * std::sin(2.0 * M_PI * u2);
    have_spare_ = true;
    return mag * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Value-noise background: a coarse random lattice interpolated bilinearly,
// with static distractor shapes baked in.
std::vector<float> make_texture(const SynthConfig& cfg) {
  Rng rng(cfg.texture_seed);
  const int step = 16;
  const int gw = cfg.width / step + 2;
  const int gh = cfg.height / step + 2;
  std::vector<float> grid(static_cast<std::size_t>(gw) * gh);
  for (float& v : grid) v = static_cast<float>(rng.uniform(70.0, 170.0));

  std::vector<float> tex(static_cast<std::size_t>(cfg.width) * cfg.height);
  for (int y = 0; y < cfg.height; ++y) {
    const double fy = static_cast<double>(y) / step;
    const int gy = static_cast<int>(fy);
    const double wy = fy - gy;
    for (int x = 0; x < cfg.width; ++x) {
      const double fx = static_cast<double>(x) / step;
      const int gx = static_cast<int>(fx);
      const double wx = fx - gx;
      const double v =
          (1 - wy) * ((1 - wx) * grid[gy * gw + gx] + wx * grid[gy * gw + gx + 1]) +
          wy * ((1 - wx) * grid[(gy + 1) * gw + gx] + wx * grid[(gy + 1) * gw + gx + 1]);
      tex[static_cast<std::size_t>(y) * cfg.width + x] = static_cast<float>(v);
    }
  }

  for (int d = 0; d < cfg.distractor_count; ++d) {
    const double cx = rng.uniform(20.0, cfg.width - 20.0);
    const double cy = rng.uniform(20.0, cfg.height - 20.0);
    const double rx = rng.uniform(3.0, 14.0);
    const double ry = rng.uniform(3.0, 14.0);
    const double delta = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(40.0, 90.0);
    const int x0 = std::max(0, static_cast<int>(cx - rx) - 1);
    const int x1 = std::min(cfg.width - 1, static_cast<int>(cx + rx) + 1);
    const int y0 = std::max(0, static_cast<int>(cy - ry) - 1);
    const int y1 = std::min(cfg.height - 1, static_cast<int>(cy + ry) + 1);
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        const double dx = (x + 0.5 - cx) / rx;
        const double dy = (y + 0.5 - cy) / ry;
        if (dx * dx + dy * dy <= 1.0) {
          float& px = tex[static_cast<std::size_t>(y) * cfg.width + x];
          px = std::clamp(px + static_cast<float>(delta), 0.0f, 255.0f);
        }
      }
  }
  return tex;
}

struct Mover {
  int id = 0;
  double rx = 0.0, ry = 0.0;  // ellipse radii
  double x = 0.0, y = 0.0;    // center
  double vx = 0.0, vy = 0.0;
  double jx = 0.0, jy = 0.0;  // bounded random-walk jitter
  double color_r = 0.0, color_g = 0.0, color_b = 0.0;
  bool blur = false;
};

constexpr int kBlurSamples = 5;
constexpr double kExposure = 0.5;  // fraction of the frame interval

// Sub-positions smearing the mover along its velocity over the exposure.
std::vector<std::pair<double, double>> sub_positions(const Mover& m) {
  if (!m.blur)
    return {{m.x + m.jx, m.y + m.jy}};
  std::vector<std::pair<double, double>> out;
  out.reserve(kBlurSamples);
  for (int j = 0; j < kBlurSamples; ++j) {
    const double u = static_cast<double>(j) / (kBlurSamples - 1) - 0.5;
    out.emplace_back(m.x + m.jx + m.vx * kExposure * u, m.y + m.jy + m.vy * kExposure * u);
  }
  return out;
}

double ellipse_coverage(double px, double py, double cx, double cy, double rx, double ry) {
  int hits = 0;
  for (int sy = 0; sy < 4; ++sy)
    for (int sx = 0; sx < 4; ++sx) {
      const double dx = (px + (sx + 0.5) / 4.0 - cx) / rx;
      const double dy = (py + (sy + 0.5) / 4.0 - cy) / ry;
      if (dx * dx + dy * dy <= 1.0) ++hits;
    }
  return hits / 16.0;
}

}  // namespace

void SynthConfig::validate() const {
  if (width < 32 || height < 32) throw std::invalid_argument("synth: frame too small");
  if (frame_count < 1) throw std::invalid_argument("synth: frame_count must be >= 1");
  if (noise_sigma < 0.0) throw std::invalid_argument("synth: negative noise sigma");
  if (distractor_count < 0) throw std::invalid_argument("synth: negative distractor count");
  if (profiles.empty()) throw std::invalid_argument("synth: no mover profiles");
  for (const MoverProfile& p : profiles) {
    if (p.count < 0) throw std::invalid_argument("synth: negative mover count");
    if (p.size_min < 2.0 || p.size_max < p.size_min)
      throw std::invalid_argument("synth: mover sizes must be >= 2 px");
    if (p.speed_min < 0.0 || p.speed_max < p.speed_min)
      throw std::invalid_argument("synth: speeds must be >= 0");
    if (p.contrast_min < 0.0 || p.contrast_max < p.contrast_min)
      throw std::invalid_argument("synth: bad contrast range");
  }
}

SynthScene generate(const SynthConfig& cfg) {
  cfg.validate();
  const std::vector<float> texture = make_texture(cfg);

  Rng rng(cfg.seed);
  Rng noise_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);

  std::vector<Mover> movers;
  int next_id = 1;
  for (const MoverProfile& p : cfg.profiles) {
    for (int i = 0; i < p.count; ++i) {
      Mover m;
      m.id = next_id++;
      m.rx = rng.uniform(p.size_min, p.size_max) / 2.0;
      m.ry = rng.uniform(p.size_min, p.size_max) / 2.0;
      m.blur = p.blur;
      const double margin = std::max(m.rx, m.ry) + p.speed_max + 6.0;
      m.x = rng.uniform(margin, cfg.width - margin);
      m.y = rng.uniform(margin, cfg.height - margin);
      for (int tries = 0; tries < 64; ++tries) {
        bool ok = true;
        for (const Mover& other : movers) {
          const double dx = m.x - other.x, dy = m.y - other.y;
          if (dx * dx + dy * dy < 150.0 * 150.0) { ok = false; break; }
        }
        if (ok) break;
        m.x = rng.uniform(margin, cfg.width - margin);
        m.y = rng.uniform(margin, cfg.height - margin);
      }
      const double speed = rng.uniform(p.speed_min, p.speed_max);
      const double angle = rng.uniform(0.0, 2.0 * M_PI);
      m.vx = speed * std::cos(angle);
      m.vy = speed * std::sin(angle);
      const double c = rng.uniform(p.contrast_min, p.contrast_max);
      const double v = std::clamp(120.0 + c, 0.0, 255.0);
      m.color_r = v;
      m.color_g = std::clamp(v * 0.97, 0.0, 255.0);
      m.color_b = std::clamp(v * 0.92, 0.0, 255.0);
      movers.push_back(m);
    }
  }

  SynthScene scene;
  scene.mover_count = static_cast<int>(movers.size());
  scene.frames.reserve(cfg.frame_count);

  for (int f = 1; f <= cfg.frame_count; ++f) {
    Image img = Image::make(cfg.width, cfg.height, 3);
    for (int y = 0; y < cfg.height; ++y) {
      for (int x = 0; x < cfg.width; ++x) {
        const double base = texture[static_cast<std::size_t>(y) * cfg.width + x] +
                            cfg.noise_sigma * noise_rng.gauss();
        const auto v = static_cast<std::uint8_t>(std::clamp(std::lround(base), 0L, 255L));
        img.at(x, y, 0) = v;
        img.at(x, y, 1) = v;
        img.at(x, y, 2) = v;
      }
    }

    for (Mover& m : movers) {
      const auto subs = sub_positions(m);
      double bx0 = 1e30, by0 = 1e30, bx1 = -1e30, by1 = -1e30;
      for (const auto& [sx, sy] : subs) {
        bx0 = std::min(bx0, sx - m.rx);
        by0 = std::min(by0, sy - m.ry);
        bx1 = std::max(bx1, sx + m.rx);
        by1 = std::max(by1, sy + m.ry);
      }
      const int px0 = std::max(0, static_cast<int>(std::floor(bx0)) - 1);
      const int py0 = std::max(0, static_cast<int>(std::floor(by0)) - 1);
      const int px1 = std::min(cfg.width - 1, static_cast<int>(std::ceil(bx1)) + 1);
      const int py1 = std::min(cfg.height - 1, static_cast<int>(std::ceil(by1)) + 1);
      for (int y = py0; y <= py1; ++y) {
        for (int x = px0; x <= px1; ++x) {
          double alpha = 0.0;
          for (const auto& [sx, sy] : subs)
            alpha += ellipse_coverage(x, y, sx, sy, m.rx, m.ry);
          alpha /= static_cast<double>(subs.size());
          if (alpha <= 0.0) continue;
          for (int k = 0; k < 3; ++k) {
            const double mc = k == 0 ? m.color_r : (k == 1 ? m.color_g : m.color_b);
            const double mixed = (1.0 - alpha) * img.at(x, y, k) + alpha * mc;
            img.at(x, y, k) =
                static_cast<std::uint8_t>(std::clamp(std::lround(mixed), 0L, 255L));
          }
        }
      }
      scene.truth.push_back({f, m.id,
                             {std::max(0.0, bx0), std::max(0.0, by0),
                              std::min<double>(cfg.width, bx1), std::min<double>(cfg.height, by1)}});

      // Advance: linear motion, bounded jitter walk, elastic bounce.
      m.jx = std::clamp(m.jx + 0.15 * rng.gauss(), -1.0, 1.0);
      m.jy = std::clamp(m.jy + 0.15 * rng.gauss(), -1.0, 1.0);
      m.x += m.vx;
      m.y += m.vy;
      const double margin_x = m.rx + std::abs(m.vx) + 4.0;
      const double margin_y = m.ry + std::abs(m.vy) + 4.0;
      if (m.x < margin_x) { m.x = 2.0 * margin_x - m.x; m.vx = -m.vx; }
      if (m.x > cfg.width - margin_x) { m.x = 2.0 * (cfg.width - margin_x) - m.x; m.vx = -m.vx; }
      if (m.y < margin_y) { m.y = 2.0 * margin_y - m.y; m.vy = -m.vy; }
      if (m.y > cfg.height - margin_y) { m.y = 2.0 * (cfg.height - margin_y) - m.y; m.vy = -m.vy; }
    }

    scene.frames.push_back({f, std::move(img)});
  }
  return scene;
}

void export_scene(const SynthScene& scene, const std::string& dir) {
  std::filesystem::create_directories(dir);
  char name[32];
  for (const FrameRecord& f : scene.frames) {
    std::snprintf(name, sizeof(name), "%06d.ppm", f.frame_index);
    write_ppm(f.image, (std::filesystem::path(dir) / name).string());
  }
  std::ofstream out(std::filesystem::path(dir) / "truth.jsonl");
  if (!out) throw std::runtime_error("export_scene: cannot write truth.jsonl");
  for (const TruthBox& t : scene.truth) {
    nlohmann::json j{{"frame", t.frame_index},
                     {"track", t.mover_id},
                     {"class", 0},
                     {"score", 1.0},
                     {"bbox", {t.bbox.x_min, t.bbox.y_min, t.bbox.x_max, t.bbox.y_max}}};
    out << j.dump() << "\n";
  }
}

std::vector<GroundTruth> truth_as_ground_truth(const SynthScene& scene) {
  std::vector<GroundTruth> out;
  out.reserve(scene.truth.size());
  for (const TruthBox& t : scene.truth) out.push_back({t.frame_index, 0, t.bbox});
  return out;
}

SynthConfig preset_config(const std::string& name, std::uint64_t seed, int frame_count) {
  SynthConfig cfg;
  cfg.seed = seed;
  cfg.frame_count = frame_count;
  if (name == "easy") {
    MoverProfile clear;
    clear.count = 2;
    clear.blur = false;
    MoverProfile blurred = clear;
    blurred.count = 1;
    blurred.blur = true;
    cfg.profiles = {clear, blurred};
  } else if (name == "slow") {
    MoverProfile slow;
    slow.count = 5;
    slow.size_min = 8.0;
    slow.size_max = 13.0;
    slow.speed_min = 0.2;
    slow.speed_max = 0.8;
    slow.contrast_min = 70.0;
    slow.contrast_max = 110.0;
    slow.blur = false;
    cfg.profiles = {slow};
  } else {
    throw std::invalid_argument("unknown preset: " + name);
  }
  return cfg;
}

}  // namespace smot
