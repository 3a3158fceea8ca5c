#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "smot/geometry.hpp"

namespace smot {

struct GroundTruth {
  int frame_index = 0;
  int class_id = 0;
  BBox bbox;
};

struct MatchResult {
  std::vector<std::pair<int, int>> tp;  // (detection index, ground-truth index)
  std::vector<int> fp;                  // unmatched detection indices
  int fn = 0;                           // unmatched ground truths
};

/// Greedy matching per frame and class: detections in score order each
/// claim the unclaimed ground truth with the highest IoU >= iou_min.
/// Indices refer to the input spans; permutation-invariant.
MatchResult match(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                  double iou_min);

/// Filters by score_min, then matches. Empty-input conventions:
/// precision 1.0 with no detections, recall 1.0 with no ground truth.
std::pair<double, double> precision_recall(std::span<const Detection> dets,
                                           std::span<const GroundTruth> gts,
                                           double score_min, double iou_min);

/// Area under the precision envelope (all-points interpolation) over the
/// score-ranked detection sweep. Throws "undefined AP" without ground truth.
double average_precision(std::span<const Detection> dets,
                         std::span<const GroundTruth> gts, double iou_min);

/// Mean AP over IoU thresholds 0.50, 0.55, ..., 0.95.
double ap_range(std::span<const Detection> dets, std::span<const GroundTruth> gts);

struct ThresholdCounts {
  int tp = 0;
  int fp = 0;
  int fn = 0;
};

struct EvalReport {
  double prec50 = 0.0, rec50 = 0.0, ap50 = 0.0;
  double prec75 = 0.0, rec75 = 0.0, ap75 = 0.0;
  double ap = 0.0;  // averaged over IoU 50:95
  ThresholdCounts counts50, counts75;
  double score_threshold = 0.5;  // operating point used for prec/rec
};

/// Full report. AP columns rank all detections by score; the prec/rec
/// columns use the given operating threshold.
EvalReport evaluate(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                    double score_threshold = 0.5);

/// Aligned plain-text table (header plus one row).
std::string report_table(const EvalReport& r);

/// Report as a JSON document.
std::string report_json(const EvalReport& r);

}  // namespace smot
