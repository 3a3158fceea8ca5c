#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "smot/geometry.hpp"
#include "smot/image.hpp"
#include "smot/motion_cube.hpp"

namespace smot {

struct FrameRecord {
  int frame_index = 0;  // 1-based
  Image image;
};

/// Consumes a window of n consecutive frames and produces detections for
/// the middle frame, in original image coordinates.
class CoarseDetector {
 public:
  virtual ~CoarseDetector() = default;
  virtual std::vector<Detection> detect(std::span<const FrameRecord> window) = 0;
};

/// Detection inside a cube tensor; bbox in tensor coordinates.
struct CubeDetection {
  int class_id = 0;
  double score = 0.0;
  BBox bbox;
};

/// Consumes one cube tensor; may return nothing (cube rejected), one box,
/// or several. Stateless implementations are safe to run in parallel.
class FineDetector {
 public:
  virtual ~FineDetector() = default;
  virtual std::vector<CubeDetection> detect(const CubeTensor& tensor) = 0;
};

/// 8-connected component bounding boxes of a binary mask (any nonzero
/// pixel is set), ordered by first pixel in raster order.
std::vector<IntRect> connected_components(const Image& mask);

/// In-place binary closing (dilate then erode) with a box kernel.
void binary_close(Image& mask, int radius);

struct CoarseConfig {
  int input_width = 640;   // differencing resolution
  int input_height = 384;
  double alpha = 0.5;      // accumulator blend factor
  double threshold = 12.0; // accumulator binarize level (0..255 scale)
  int min_area = 2;        // component pixel count, detector resolution
  int max_area = 6000;
  int close_radius = 5;    // bridges the leading/trailing difference bands
  double recenter_gain = 1.0;  // box shift per unit estimated velocity
  double shrink_gain = 2.0;    // box shrink per unit estimated velocity
};

/// Rolling frame-difference accumulator (decayed motion energy image).
struct AccumulatorState {
  FloatImage accum;
  double alpha = 0.5;
  Image prev_gray;       // empty until the first frame is absorbed
  FloatImage last_diff;  // |gray_t - gray_{t-1}|
  FloatImage prev_diff;  // one step older, for velocity estimates
  int last_frame = 0;    // highest frame index absorbed so far
};

/// Classical coarse stage: per-frame absolute differences are blended
/// into a decayed accumulator; thresholded components become candidate
/// boxes, re-centered on the window's middle frame using the drift of the
/// difference maps. Stateful -- single-owner sequential per stream.
class MotionCoarseDetector : public CoarseDetector {
 public:
  explicit MotionCoarseDetector(CoarseConfig cfg = {});
  std::vector<Detection> detect(std::span<const FrameRecord> window) override;

  const AccumulatorState& state() const { return state_; }

 private:
  void absorb(const FrameRecord& frame);

  CoarseConfig cfg_;
  AccumulatorState state_;
};

struct FineConfig {
  double quantile = 0.25;        // variance binarize quantile
  double variance_floor = 150.0; // absolute variance threshold (noise gate)
  int min_area = 4;              // component pixel count
  int close_radius = 2;
  int merge_gap = 20;            // tensor px; clusters moving-edge fragments
  double score_scale = 15.0;     // rms variance giving score 0.5
};

/// Classical fine stage: per-pixel variance across the temporal channels,
/// thresholded at max(quantile, floor); each component box is shrunk by the
/// estimated per-frame motion to localize the middle-frame extent.
class VarianceFineDetector : public FineDetector {
 public:
  explicit VarianceFineDetector(FineConfig cfg = {});
  std::vector<CubeDetection> detect(const CubeTensor& tensor) override;

 private:
  FineConfig cfg_;
};

/// Pre-computed detections loaded from a JSON Lines file, keyed by frame
/// index and/or cube id. Lets externally produced model outputs stand in
/// for either reference detector.
class DetectionFileIndex {
 public:
  explicit DetectionFileIndex(const std::string& path);

  std::vector<Detection> for_frame(int frame_index) const;       // missing -> empty
  std::vector<CubeDetection> for_cube(const std::string& cube_id) const;

 private:
  std::map<int, std::vector<Detection>> by_frame_;
  std::map<std::string, std::vector<CubeDetection>> by_cube_;
};

class ExternalCoarseDetector : public CoarseDetector {
 public:
  explicit ExternalCoarseDetector(const std::string& path) : index_(path) {}
  std::vector<Detection> detect(std::span<const FrameRecord> window) override;

 private:
  DetectionFileIndex index_;
};

/// Keys cubes as "t<track_id>_f<middle_frame>".
std::string cube_key(int track_id, int middle_frame);

class ExternalFineDetector : public FineDetector {
 public:
  explicit ExternalFineDetector(const std::string& path) : index_(path) {}
  std::vector<CubeDetection> detect(const CubeTensor& tensor) override;

 private:
  DetectionFileIndex index_;
};

}  // namespace smot
