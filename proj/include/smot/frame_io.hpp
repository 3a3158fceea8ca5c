#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "smot/detectors.hpp"
#include "smot/geometry.hpp"

namespace smot {

/// One JSON Lines record of the detection/truth file format:
///   {"frame": int, "track": int?, "cube_id": string?, "class": int,
///    "score": float, "bbox": [x1, y1, x2, y2]}
struct DetRecord {
  int frame = 0;
  std::optional<int> track;
  std::optional<std::string> cube_id;
  int class_id = 0;
  double score = 0.0;
  BBox bbox;
};

/// Validating JSONL reader; errors name the offending line. Scores must be
/// in [0,1] and boxes ordered (x1 <= x2, y1 <= y2).
std::vector<DetRecord> read_detection_records(const std::string& path);

/// Deterministic byte stream: sorted keys, shortest round-trip floats.
void write_detection_records(std::span<const DetRecord> records, const std::string& path);

/// Loads a directory of numbered .ppm frames, 1-based and contiguous.
/// Gaps ("missing frame N") and dimension changes are errors.
std::vector<FrameRecord> load_frames(const std::string& dir);

/// Zero-padded frame file name, e.g. 000042.ppm.
std::string frame_file_name(int frame_index);

}  // namespace smot
