#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "smot/detectors.hpp"
#include "smot/evaluation.hpp"

namespace smot {

/// One class of movers to spawn: axis extents and per-frame speed in
/// pixels, rendering contrast above the local background, optional
/// motion-blur trailing.
struct MoverProfile {
  int count = 3;
  double size_min = 8.0;
  double size_max = 20.0;
  double speed_min = 2.0;
  double speed_max = 6.0;
  double contrast_min = 90.0;
  double contrast_max = 150.0;
  bool blur = false;
};

struct SynthConfig {
  int width = 1280;
  int height = 720;
  int frame_count = 200;
  std::uint64_t seed = 1;
  std::vector<MoverProfile> profiles;
  int distractor_count = 10;        // static high-contrast decoys
  std::uint64_t texture_seed = 7;   // background texture stream
  double noise_sigma = 3.0;         // per-frame sensor noise

  void validate() const;  // throws a descriptive error on bad values
};

struct TruthBox {
  int frame_index = 0;
  int mover_id = 0;  // stable per mover, 1-based
  BBox bbox;         // tight bound of the rendered footprint, blur included
};

struct SynthScene {
  std::vector<FrameRecord> frames;
  std::vector<TruthBox> truth;
  int mover_count = 0;
};

/// Deterministic for a fixed config. Movers follow linear trajectories
/// with a bounded random-walk jitter and bounce at the frame margins.
SynthScene generate(const SynthConfig& cfg);

/// Numbered P6 frames plus truth.jsonl; re-importable losslessly.
void export_scene(const SynthScene& scene, const std::string& dir);

std::vector<GroundTruth> truth_as_ground_truth(const SynthScene& scene);

/// Built-in presets: "easy" (high contrast, 8-20 px, 2-6 px/frame, some
/// blurred) and "slow" (0.2-0.8 px/frame, sized so the raw motion range
/// stays well under 4x the object area).
SynthConfig preset_config(const std::string& name, std::uint64_t seed, int frame_count);

}  // namespace smot
