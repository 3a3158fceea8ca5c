#include "smot/geometry.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>

namespace smot {

double area(const BBox& b) {
  const double w = b.x_max - b.x_min;
  const double h = b.y_max - b.y_min;
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

double iou(const BBox& a, const BBox& b) {
  const double ix = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double iy = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (ix <= 0.0 || iy <= 0.0) return 0.0;
  const double inter = ix * iy;
  const double uni = area(a) + area(b) - inter;
  if (uni <= 0.0) return 0.0;
  return inter / uni;
}

BBox min_enclosing_rect(std::span<const BBox> boxes) {
  if (boxes.empty()) throw std::invalid_argument("min_enclosing_rect: no boxes");
  BBox r = boxes.front();
  for (const BBox& b : boxes.subspan(1)) {
    r.x_min = std::min(r.x_min, b.x_min);
    r.y_min = std::min(r.y_min, b.y_min);
    r.x_max = std::max(r.x_max, b.x_max);
    r.y_max = std::max(r.y_max, b.y_max);
  }
  return r;
}

BBox intersect(const BBox& a, const BBox& b) {
  BBox r{std::max(a.x_min, b.x_min), std::max(a.y_min, b.y_min),
         std::min(a.x_max, b.x_max), std::min(a.y_max, b.y_max)};
  if (r.x_max < r.x_min) r.x_max = r.x_min;
  if (r.y_max < r.y_min) r.y_max = r.y_min;
  return r;
}

bool detection_order(const Detection& a, const Detection& b) {
  return std::make_tuple(-a.score, a.frame_index, a.bbox.x_min, a.bbox.y_min,
                         a.bbox.x_max, a.bbox.y_max, a.class_id) <
         std::make_tuple(-b.score, b.frame_index, b.bbox.x_min, b.bbox.y_min,
                         b.bbox.x_max, b.bbox.y_max, b.class_id);
}

std::vector<Detection> nms(std::vector<Detection> dets, double iou_threshold) {
  if (iou_threshold <= 0.0 || iou_threshold > 1.0)
    throw std::invalid_argument("nms: iou_threshold must be in (0,1]");
  std::sort(dets.begin(), dets.end(), detection_order);
  std::vector<Detection> kept;
  kept.reserve(dets.size());
  for (const Detection& d : dets) {
    bool suppressed = false;
    for (const Detection& k : kept) {
      if (k.class_id == d.class_id && iou(k.bbox, d.bbox) >= iou_threshold) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(d);
  }
  return kept;
}

}  // namespace smot
