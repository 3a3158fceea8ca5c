#pragma once

#include <span>
#include <vector>

namespace smot {

/// Axis-aligned box in pixel coordinates. Sub-pixel values are allowed;
/// (x_min, y_min) is the top-left corner, y grows downward.
struct BBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double cx() const { return 0.5 * (x_min + x_max); }
  double cy() const { return 0.5 * (y_min + y_max); }
  bool valid() const { return x_min <= x_max && y_min <= y_max; }
  bool contains(double x, double y) const {
    return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
  }
  bool contains(const BBox& o) const {
    return o.x_min >= x_min && o.y_min >= y_min && o.x_max <= x_max && o.y_max <= y_max;
  }
  friend bool operator==(const BBox&, const BBox&) = default;
};

struct Detection {
  BBox bbox;
  int class_id = 0;
  double score = 0.0;
  int frame_index = 0;  // 1-based
};

double area(const BBox& b);

/// Intersection over union; 0 when the union has zero area.
double iou(const BBox& a, const BBox& b);

/// Component-wise min/max over all boxes. Throws on an empty span.
BBox min_enclosing_rect(std::span<const BBox> boxes);

BBox intersect(const BBox& a, const BBox& b);  // degenerate (empty) boxes allowed

/// Total order on detections: score descending, then frame index,
/// then lexicographic bbox, then class. Makes nms/matching results
/// independent of input permutation.
bool detection_order(const Detection& a, const Detection& b);

/// Greedy per-class non-maximum suppression. Survivors of the same class
/// have pairwise IoU < iou_threshold; output is score-descending.
std::vector<Detection> nms(std::vector<Detection> dets, double iou_threshold);

}  // namespace smot
