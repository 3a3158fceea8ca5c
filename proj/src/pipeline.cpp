#include "smot/pipeline.hpp"

#include <algorithm>
#include <stdexcept>

namespace smot {

void PipelineConfig::validate() const {
  if (n < 3 || n % 2 == 0)
    throw std::invalid_argument("pipeline: window length must be odd and >= 3");
  if (gamma < 1.0) throw std::invalid_argument("pipeline: gamma must be >= 1");
  if (coarse_score_min < 0.0 || fine_score_min > 1.0 ||
      coarse_score_min > fine_score_min)
    throw std::invalid_argument(
        "pipeline: need 0 <= coarse_score_min <= fine_score_min <= 1");
  if (nms_iou <= 0.0 || nms_iou > 1.0)
    throw std::invalid_argument("pipeline: nms_iou must be in (0,1]");
  if (coarse_width < 8 || coarse_height < 8 || fine_width < 8 || fine_height < 8)
    throw std::invalid_argument("pipeline: detector input sizes too small");
  if (tracker.match_iou_min <= 0.0 || tracker.match_iou_min >= 1.0 ||
      tracker.max_age < 1 || tracker.min_hits < 1)
    throw std::invalid_argument("pipeline: bad tracker config");
}

Pipeline::Pipeline(PipelineConfig cfg, CoarseDetector& coarse, FineDetector& fine)
    : cfg_(cfg), coarse_(coarse), fine_(fine), tracker_(cfg.tracker) {
  cfg_.validate();
}

std::vector<FinalDetection> Pipeline::push_frame(const FrameRecord& frame) {
  if (started_) {
    if (frame.frame_index != last_frame_ + 1)
      throw std::runtime_error("pipeline: frame gap at index " +
                               std::to_string(frame.frame_index));
    if (!frame.image.same_shape(buffer_.back().image))
      throw std::runtime_error("pipeline: frame dimensions changed mid-stream");
  }
  started_ = true;
  last_frame_ = frame.frame_index;

  buffer_.push_back(frame);
  if (static_cast<int>(buffer_.size()) > cfg_.n) buffer_.pop_front();
  if (static_cast<int>(buffer_.size()) < cfg_.n) return {};

  const std::vector<FrameRecord> window(buffer_.begin(), buffer_.end());
  const int middle = window[(cfg_.n - 1) / 2].frame_index;
  const int frame_w = window.front().image.width;
  const int frame_h = window.front().image.height;
  const BBox frame_box{0.0, 0.0, static_cast<double>(frame_w),
                       static_cast<double>(frame_h)};

  std::vector<Detection> coarse_dets;
  for (Detection& d : coarse_.detect(window))
    if (d.score >= cfg_.coarse_score_min) coarse_dets.push_back(d);

  const std::vector<TrackOutput> tracked = tracker_.step(coarse_dets, middle);

  std::vector<FinalDetection> candidates;
  if (cfg_.coarse_only) {
    for (const TrackOutput& t : tracked) {
      const Track* track = tracker_.find(t.track_id);
      const BBox box = intersect(t.box, frame_box);
      if (area(box) <= 0.0) continue;
      candidates.push_back({middle, t.track_id, 0, track->last_score, box});
    }
  } else {
    std::vector<Image> window_images;
    window_images.reserve(window.size());
    for (const FrameRecord& f : window) window_images.push_back(f.image);

    for (const TrackOutput& t : tracked) {  // sorted by id => deterministic
      const Track* track = tracker_.find(t.track_id);
      if (static_cast<int>(track->history.size()) < cfg_.n) continue;

      const std::vector<BBox> positions = last_n_positions(*track, cfg_.n);
      const BBox raw = motion_range(positions);
      const BBox obj = positions.back();  // the track's box on the middle frame
      if (area(obj) <= 0.0) continue;
      const BBox arect = adapt_mr(raw, obj, cfg_.gamma, frame_w, frame_h);

      IntRect irect;
      try {
        irect = rasterize_rect(arect, frame_w, frame_h);
      } catch (const std::runtime_error&) {
        continue;  // rect drifted fully outside the frame
      }
      const Cube cube = extract_cube(window_images, irect, t.track_id);
      CubeTensor tensor = stack_channels(cube, cfg_.fine_width, cfg_.fine_height);
      tensor.middle_frame = middle;
      if (sink_) sink_(cube, tensor);

      for (const CubeDetection& cd : fine_.detect(tensor)) {
        if (cd.score < cfg_.fine_score_min) continue;
        const BBox img_box = intersect(map_to_image(cd.bbox, tensor), frame_box);
        if (area(img_box) <= 0.0) continue;
        candidates.push_back({middle, t.track_id, cd.class_id, cd.score, img_box});
      }
    }
  }

  // Cross-cube duplicate suppression.
  std::sort(candidates.begin(), candidates.end(),
            [](const FinalDetection& a, const FinalDetection& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.track_id < b.track_id;
            });
  std::vector<FinalDetection> out;
  for (const FinalDetection& c : candidates) {
    bool suppressed = false;
    for (const FinalDetection& k : out)
      if (k.class_id == c.class_id && iou(k.bbox, c.bbox) >= cfg_.nms_iou) {
        suppressed = true;
        break;
      }
    if (!suppressed) out.push_back(c);
  }
  return out;
}

std::vector<FinalDetection> run_sequence(std::span<const FrameRecord> frames,
                                         const PipelineConfig& cfg,
                                         CoarseDetector& coarse, FineDetector& fine,
                                         const CubeSink& sink) {
  cfg.validate();
  if (static_cast<int>(frames.size()) < cfg.n)
    throw std::runtime_error("run_sequence: sequence shorter than window");
  Pipeline pipeline(cfg, coarse, fine);
  if (sink) pipeline.set_cube_sink(sink);
  std::vector<FinalDetection> out;
  for (const FrameRecord& f : frames) {
    std::vector<FinalDetection> batch = pipeline.push_frame(f);
    out.insert(out.end(), batch.begin(), batch.end());
  }
  return out;
}

}  // namespace smot
