#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "smot/geometry.hpp"
#include "smot/image.hpp"

namespace smot {

/// Half-open integer pixel rectangle [x0,x1) x [y0,y1).
struct IntRect {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
  BBox to_bbox() const {
    return {static_cast<double>(x0), static_cast<double>(y0),
            static_cast<double>(x1), static_cast<double>(y1)};
  }
  friend bool operator==(const IntRect&, const IntRect&) = default;
};

/// Motion summary of one track over an n-frame window.
struct MotionRange {
  int track_id = 0;
  std::vector<int> window_frames;
  BBox raw_rect;       // minimum circumscribed rectangle of the window boxes
  double obj_area = 0.0;
  double sigma_mov = 0.0;  // area(raw_rect) / obj_area, >= 1 in normal use
  BBox adapted_rect;       // expanded rect, clamped to the frame
};

/// n equally-sized patches cut from consecutive frames at one shared rect.
struct Cube {
  int track_id = 0;
  IntRect rect;
  std::vector<Image> patches;
  int middle_index = 0;  // 1-based, (n+1)/2
};

/// Channel-major stack fed to fine detection. Channel layout in frame
/// order: gray(1..mid-1), R(mid), G(mid), B(mid), gray(mid+1..n) --
/// n+2 channels total.
struct CubeTensor {
  int width = 0;
  int height = 0;
  int channels = 0;      // n + 2
  int middle_index = 0;  // 1-based patch position
  std::vector<std::uint8_t> data;
  double scale_x = 1.0;  // source rect width / tensor width
  double scale_y = 1.0;
  double origin_x = 0.0;  // source rect top-left in image coordinates
  double origin_y = 0.0;
  int track_id = 0;
  int middle_frame = 0;  // frame index the middle patch came from

  int temporal_count() const { return channels - 2; }
  const std::uint8_t* channel(int c) const {
    return data.data() + static_cast<std::size_t>(c) * width * height;
  }
  std::uint8_t* channel(int c) {
    return data.data() + static_cast<std::size_t>(c) * width * height;
  }
};

/// Minimum circumscribed rectangle of a track's window boxes.
BBox motion_range(std::span<const BBox> track_boxes);

/// area(raw_rect) / area(obj_box). Throws on a zero-area object box.
double motion_amount(const BBox& raw_rect, const BBox& obj_box);

/// Returns raw_rect unchanged when its motion amount already reaches gamma;
/// otherwise scales raw_rect about its center (aspect preserved) so the
/// target area is gamma * area(obj_box), then shifts the result into the
/// frame. An axis is shrunk only when it exceeds the frame extent.
BBox adapt_mr(const BBox& raw_rect, const BBox& obj_box, double gamma,
              int frame_w, int frame_h);

/// Floor/ceil to whole pixels, clamp to the frame, keep each side >= 1 px.
/// Throws "empty crop" for rects entirely outside the frame.
IntRect rasterize_rect(const BBox& r, int frame_w, int frame_h);

/// Bit-exact crops of every frame at the shared rect.
Cube extract_cube(std::span<const Image> frames, const IntRect& rect, int track_id);

/// Resizes each patch to the target and stacks channels as documented on
/// CubeTensor. Records the scale factors and rect origin for the inverse map.
CubeTensor stack_channels(const Cube& cube, int target_w = 160, int target_h = 160);

/// Tensor coordinates -> original image coordinates.
BBox map_to_image(const BBox& cube_box, const CubeTensor& t);

/// Inverse of map_to_image.
BBox image_to_cube(const BBox& image_box, const CubeTensor& t);

}  // namespace smot
