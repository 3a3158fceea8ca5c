#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "smot/geometry.hpp"

namespace smot {

/// Constant-velocity box filter over (cx, cy, s, r, v_cx, v_cy, v_s),
/// where s is the box area and r the width/height aspect ratio.
struct KalmanState {
  Eigen::Matrix<double, 7, 1> mean = Eigen::Matrix<double, 7, 1>::Zero();
  Eigen::Matrix<double, 7, 7> covariance = Eigen::Matrix<double, 7, 7>::Zero();
};

/// Throws on a zero-area box ("degenerate measurement").
KalmanState kalman_init(const BBox& b);

/// Advances one frame and returns the predicted box. If the area would go
/// non-positive, the area velocity is clamped to zero first.
std::pair<KalmanState, BBox> kalman_predict(const KalmanState& st);

/// Standard linear measurement update with (cx, cy, s, r) of b.
KalmanState kalman_update(const KalmanState& st, const BBox& b);

/// Box reconstructed from the state mean.
BBox state_box(const KalmanState& st);

/// Minimum-total-cost assignment of min(rows, cols) pairs. Deterministic:
/// among equal-cost optima, returns the lexicographically smallest pair
/// list. Pairs come back sorted by row.
std::vector<std::pair<int, int>> hungarian(const Eigen::MatrixXd& cost);

struct TrackerConfig {
  double match_iou_min = 0.3;  // reject assignments below this overlap
  int max_age = 3;             // unmatched frames a track survives
  int min_hits = 1;            // matches before a track is reported
};

struct TrackPoint {
  int frame_index = 0;
  BBox box;
};

struct Track {
  int id = 0;
  KalmanState state;
  int hits = 0;               // matched updates (creation counts)
  int age = 0;                // frames since creation
  int time_since_update = 0;  // frames since last match
  double last_score = 0.0;    // score of the last matched detection
  std::vector<TrackPoint> history;  // one entry per frame, gap-free
};

/// The n most recent boxes, frame-ascending. Throws "track too young"
/// when the history is shorter than n.
std::vector<BBox> last_n_positions(const Track& track, int n);

struct TrackOutput {
  int track_id = 0;
  BBox box;  // matched: filtered box; unmatched: predicted box
};

/// SORT: per-frame predict, IoU-cost assignment, lifecycle management.
/// A tracker instance is stateful and single-owner sequential.
class SortTracker {
 public:
  explicit SortTracker(TrackerConfig cfg = {}) : cfg_(cfg) {}

  /// Consumes the detections of one frame. frame_index must advance by
  /// exactly one between calls. Returns alive tracks with
  /// hits >= min_hits, sorted by id.
  std::vector<TrackOutput> step(const std::vector<Detection>& dets, int frame_index);

  const std::vector<Track>& tracks() const { return tracks_; }
  const Track* find(int track_id) const;

 private:
  TrackerConfig cfg_;
  std::vector<Track> tracks_;
  int next_id_ = 1;
  int last_frame_ = 0;
  bool started_ = false;
};

}  // namespace smot
