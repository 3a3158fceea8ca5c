#include "smot/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <tuple>

#include <json.hpp>

namespace smot {

namespace {

// Stable ranking of detections by score with deterministic tie-breaks.
std::vector<int> ranked_indices(std::span<const Detection> dets) {
  std::vector<int> order(dets.size());
  for (std::size_t i = 0; i < dets.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return detection_order(dets[a], dets[b]); });
  return order;
}

bool gt_order(const GroundTruth& a, const GroundTruth& b) {
  return std::make_tuple(a.frame_index, a.class_id, a.bbox.x_min, a.bbox.y_min,
                         a.bbox.x_max, a.bbox.y_max) <
         std::make_tuple(b.frame_index, b.class_id, b.bbox.x_min, b.bbox.y_min,
                         b.bbox.x_max, b.bbox.y_max);
}

// Shared greedy sweep: per-detection TP/GT claim flags in rank order.
struct Sweep {
  std::vector<int> order;      // detection indices, rank order
  std::vector<char> is_tp;     // parallel to order
  std::vector<int> gt_of_det;  // parallel to order, -1 when FP
};

Sweep sweep_matches(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                    double iou_min) {
  if (iou_min <= 0.0 || iou_min > 1.0)
    throw std::invalid_argument("match: iou_min must be in (0,1]");

  std::vector<int> gt_rank(gts.size());
  for (std::size_t i = 0; i < gts.size(); ++i) gt_rank[i] = static_cast<int>(i);
  std::sort(gt_rank.begin(), gt_rank.end(),
            [&](int a, int b) { return gt_order(gts[a], gts[b]); });

  std::map<std::pair<int, int>, std::vector<int>> gt_by_key;
  for (int gi : gt_rank)
    gt_by_key[{gts[gi].frame_index, gts[gi].class_id}].push_back(gi);

  Sweep s;
  s.order = ranked_indices(dets);
  s.is_tp.assign(dets.size(), 0);
  s.gt_of_det.assign(dets.size(), -1);
  std::vector<char> claimed(gts.size(), 0);

  for (std::size_t r = 0; r < s.order.size(); ++r) {
    const Detection& d = dets[s.order[r]];
    const auto it = gt_by_key.find({d.frame_index, d.class_id});
    if (it == gt_by_key.end()) continue;
    int best = -1;
    double best_iou = 0.0;
    for (int gi : it->second) {
      if (claimed[gi]) continue;
      const double v = iou(d.bbox, gts[gi].bbox);
      if (v >= iou_min && v > best_iou) {
        best = gi;
        best_iou = v;
      }
    }
    if (best >= 0) {
      claimed[best] = 1;
      s.is_tp[r] = 1;
      s.gt_of_det[r] = best;
    }
  }
  return s;
}

}  // namespace

MatchResult match(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                  double iou_min) {
  const Sweep s = sweep_matches(dets, gts, iou_min);
  MatchResult out;
  for (std::size_t r = 0; r < s.order.size(); ++r) {
    if (s.is_tp[r]) out.tp.emplace_back(s.order[r], s.gt_of_det[r]);
    else out.fp.push_back(s.order[r]);
  }
  out.fn = static_cast<int>(gts.size()) - static_cast<int>(out.tp.size());
  return out;
}

std::pair<double, double> precision_recall(std::span<const Detection> dets,
                                           std::span<const GroundTruth> gts,
                                           double score_min, double iou_min) {
  std::vector<Detection> kept;
  for (const Detection& d : dets)
    if (d.score >= score_min) kept.push_back(d);
  const MatchResult m = match(kept, gts, iou_min);
  const int tp = static_cast<int>(m.tp.size());
  const int fp = static_cast<int>(m.fp.size());
  const double prec = (tp + fp) > 0 ? static_cast<double>(tp) / (tp + fp) : 1.0;
  const double rec = !gts.empty() ? static_cast<double>(tp) / gts.size() : 1.0;
  return {prec, rec};
}

double average_precision(std::span<const Detection> dets,
                         std::span<const GroundTruth> gts, double iou_min) {
  if (gts.empty()) throw std::runtime_error("average_precision: undefined AP");
  const Sweep s = sweep_matches(dets, gts, iou_min);
  const std::size_t nd = s.order.size();
  if (nd == 0) return 0.0;

  std::vector<double> precision(nd), recall(nd);
  int tp = 0;
  for (std::size_t r = 0; r < nd; ++r) {
    if (s.is_tp[r]) ++tp;
    precision[r] = static_cast<double>(tp) / static_cast<double>(r + 1);
    recall[r] = static_cast<double>(tp) / static_cast<double>(gts.size());
  }
  // Precision envelope: max precision at any recall >= current.
  for (std::size_t r = nd - 1; r-- > 0;)
    precision[r] = std::max(precision[r], precision[r + 1]);

  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t r = 0; r < nd; ++r) {
    ap += (recall[r] - prev_recall) * precision[r];
    prev_recall = recall[r];
  }
  return ap;
}

double ap_range(std::span<const Detection> dets, std::span<const GroundTruth> gts) {
  double total = 0.0;
  for (int k = 0; k < 10; ++k) total += average_precision(dets, gts, 0.50 + 0.05 * k);
  return total / 10.0;
}

EvalReport evaluate(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                    double score_threshold) {
  EvalReport r;
  r.score_threshold = score_threshold;
  std::tie(r.prec50, r.rec50) = precision_recall(dets, gts, score_threshold, 0.50);
  std::tie(r.prec75, r.rec75) = precision_recall(dets, gts, score_threshold, 0.75);

  std::vector<Detection> kept;
  for (const Detection& d : dets)
    if (d.score >= score_threshold) kept.push_back(d);
  const MatchResult m50 = match(kept, gts, 0.50);
  const MatchResult m75 = match(kept, gts, 0.75);
  r.counts50 = {static_cast<int>(m50.tp.size()), static_cast<int>(m50.fp.size()), m50.fn};
  r.counts75 = {static_cast<int>(m75.tp.size()), static_cast<int>(m75.fp.size()), m75.fn};

  r.ap50 = gts.empty() ? 0.0 : average_precision(dets, gts, 0.50);
  r.ap75 = gts.empty() ? 0.0 : average_precision(dets, gts, 0.75);
  r.ap = gts.empty() ? 0.0 : ap_range(dets, gts);
  return r;
}

std::string report_table(const EvalReport& r) {
  char buf[256];
  std::string out = "Prec50  Rec50   AP50    Prec75  Rec75   AP75    AP\n";
  std::snprintf(buf, sizeof(buf), "%-7.4f %-7.4f %-7.4f %-7.4f %-7.4f %-7.4f %-7.4f\n",
                r.prec50, r.rec50, r.ap50, r.prec75, r.rec75, r.ap75, r.ap);
  out += buf;
  return out;
}

std::string report_json(const EvalReport& r) {
  nlohmann::json j{
      {"prec50", r.prec50}, {"rec50", r.rec50}, {"ap50", r.ap50},
      {"prec75", r.prec75}, {"rec75", r.rec75}, {"ap75", r.ap75},
      {"ap", r.ap},
      {"counts50", {{"tp", r.counts50.tp}, {"fp", r.counts50.fp}, {"fn", r.counts50.fn}}},
      {"counts75", {{"tp", r.counts75.tp}, {"fp", r.counts75.fp}, {"fn", r.counts75.fn}}},
      {"score_threshold", r.score_threshold}};
  return j.dump(2) + "\n";
}

}  // namespace smot
