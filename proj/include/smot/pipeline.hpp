#pragma once

#include <deque>
#include <functional>
#include <span>
#include <vector>

#include "smot/detectors.hpp"
#include "smot/motion_cube.hpp"
#include "smot/tracking.hpp"

namespace smot {

struct PipelineConfig {
  int n = 5;                     // window length, odd
  double gamma = 4.0;            // motion-amount target for cube expansion
  double coarse_score_min = 0.1; // low threshold: let suspicious objects in
  double fine_score_min = 0.5;   // high threshold: reject false candidates
  double nms_iou = 0.45;
  int coarse_width = 640;
  int coarse_height = 384;
  int fine_width = 160;
  int fine_height = 160;
  TrackerConfig tracker;
  bool coarse_only = false;  // ablation: emit tracked coarse boxes directly

  void validate() const;
};

struct FinalDetection {
  int frame_index = 0;
  int track_id = 0;
  int class_id = 0;
  double score = 0.0;
  BBox bbox;  // original image coordinates, clamped to the frame
};

using CubeSink = std::function<void(const Cube&, const CubeTensor&)>;

/// Streaming driver: buffers n frames; each new frame evaluates the window
/// ending there and emits detections for its middle frame (latency
/// (n-1)/2). Coarse candidates feed the tracker; tracks with a full n-frame
/// history produce adaptive cubes that the fine detector re-examines; cube
/// boxes map back to image coordinates and cross-cube NMS resolves
/// duplicates. Single-owner sequential per stream.
class Pipeline {
 public:
  Pipeline(PipelineConfig cfg, CoarseDetector& coarse, FineDetector& fine);

  /// Returns the detections finalized by this frame (for frame
  /// frame_index - (n-1)/2), empty during warm-up.
  std::vector<FinalDetection> push_frame(const FrameRecord& frame);

  /// Observes every extracted cube; handy for debugging dumps.
  void set_cube_sink(CubeSink sink) { sink_ = std::move(sink); }

  const SortTracker& tracker() const { return tracker_; }

 private:
  PipelineConfig cfg_;
  CoarseDetector& coarse_;
  FineDetector& fine_;
  SortTracker tracker_;
  std::deque<FrameRecord> buffer_;
  CubeSink sink_;
  int last_frame_ = 0;
  bool started_ = false;
};

/// Batch driver: folds push_frame over the stream. Throws
/// "sequence shorter than window" when fewer than n frames are given.
std::vector<FinalDetection> run_sequence(std::span<const FrameRecord> frames,
                                         const PipelineConfig& cfg,
                                         CoarseDetector& coarse, FineDetector& fine,
                                         const CubeSink& sink = {});

}  // namespace smot
