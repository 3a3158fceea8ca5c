#include "smot/motion_cube.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace smot {

BBox motion_range(std::span<const BBox> track_boxes) {
  return min_enclosing_rect(track_boxes);
}

double motion_amount(const BBox& raw_rect, const BBox& obj_box) {
  const double obj_area = area(obj_box);
  if (obj_area <= 0.0) throw std::invalid_argument("motion_amount: degenerate object");
  return area(raw_rect) / obj_area;
}

BBox adapt_mr(const BBox& raw_rect, const BBox& obj_box, double gamma,
              int frame_w, int frame_h) {
  if (gamma < 1.0) throw std::invalid_argument("adapt_mr: gamma must be >= 1");
  const double sigma = motion_amount(raw_rect, obj_box);
  if (sigma >= gamma) return raw_rect;

  const double target = gamma * area(obj_box);
  const double w = raw_rect.width();
  const double h = raw_rect.height();
  const double aspect = (w > 1e-12 && h > 1e-12)
                            ? w / h
                            : std::max(obj_box.width() / std::max(obj_box.height(), 1e-12), 1e-12);
  double new_w = std::sqrt(target * aspect);
  double new_h = std::sqrt(target / aspect);
  new_w = std::min(new_w, static_cast<double>(frame_w));
  new_h = std::min(new_h, static_cast<double>(frame_h));

  double x0 = raw_rect.cx() - new_w / 2.0;
  double y0 = raw_rect.cy() - new_h / 2.0;
  x0 = std::clamp(x0, 0.0, frame_w - new_w);
  y0 = std::clamp(y0, 0.0, frame_h - new_h);
  return {x0, y0, x0 + new_w, y0 + new_h};
}

IntRect rasterize_rect(const BBox& r, int frame_w, int frame_h) {
  if (frame_w <= 0 || frame_h <= 0)
    throw std::invalid_argument("rasterize_rect: bad frame dimensions");
  int x0 = static_cast<int>(std::floor(r.x_min));
  int y0 = static_cast<int>(std::floor(r.y_min));
  int x1 = static_cast<int>(std::ceil(r.x_max));
  int y1 = static_cast<int>(std::ceil(r.y_max));
  if (x1 <= 0 || y1 <= 0 || x0 >= frame_w || y0 >= frame_h)
    throw std::runtime_error("rasterize_rect: empty crop");
  x0 = std::max(x0, 0);
  y0 = std::max(y0, 0);
  x1 = std::min(x1, frame_w);
  y1 = std::min(y1, frame_h);
  if (x1 <= x0) {
    if (x0 < frame_w) x1 = x0 + 1;
    else { x0 = frame_w - 1; x1 = frame_w; }
  }
  if (y1 <= y0) {
    if (y0 < frame_h) y1 = y0 + 1;
    else { y0 = frame_h - 1; y1 = frame_h; }
  }
  return {x0, y0, x1, y1};
}

Cube extract_cube(std::span<const Image> frames, const IntRect& rect, int track_id) {
  if (frames.empty()) throw std::invalid_argument("extract_cube: no frames");
  for (const Image& f : frames)
    if (!f.same_shape(frames.front()))
      throw std::invalid_argument("extract_cube: dimension mismatch");
  const Image& first = frames.front();
  if (rect.x0 < 0 || rect.y0 < 0 || rect.x1 > first.width || rect.y1 > first.height ||
      rect.width() < 1 || rect.height() < 1)
    throw std::invalid_argument("extract_cube: rect outside frame");

  Cube cube;
  cube.track_id = track_id;
  cube.rect = rect;
  cube.middle_index = (static_cast<int>(frames.size()) + 1) / 2;
  cube.patches.reserve(frames.size());
  for (const Image& f : frames)
    cube.patches.push_back(crop(f, rect.x0, rect.y0, rect.x1, rect.y1));
  return cube;
}

CubeTensor stack_channels(const Cube& cube, int target_w, int target_h) {
  if (cube.patches.empty()) throw std::invalid_argument("stack_channels: empty cube");
  const int n = static_cast<int>(cube.patches.size());

  CubeTensor t;
  t.width = target_w;
  t.height = target_h;
  t.channels = n + 2;
  t.middle_index = cube.middle_index;
  t.track_id = cube.track_id;
  t.scale_x = static_cast<double>(cube.rect.width()) / target_w;
  t.scale_y = static_cast<double>(cube.rect.height()) / target_h;
  t.origin_x = cube.rect.x0;
  t.origin_y = cube.rect.y0;
  t.data.resize(static_cast<std::size_t>(t.channels) * target_w * target_h);

  const std::size_t plane = static_cast<std::size_t>(target_w) * target_h;
  int c = 0;
  for (int i = 1; i <= n; ++i) {
    const Image resized = resize_bilinear(cube.patches[i - 1], target_w, target_h);
    if (i == cube.middle_index && resized.channels == 3) {
      for (int k = 0; k < 3; ++k) {
        std::uint8_t* dst = t.channel(c++);
        for (std::size_t p = 0; p < plane; ++p) dst[p] = resized.data[p * 3 + k];
      }
    } else {
      const Image gray = to_gray(resized);
      std::copy(gray.data.begin(), gray.data.end(), t.channel(c++));
      if (i == cube.middle_index) {  // gray source: replicate to keep n+2 channels
        std::copy(gray.data.begin(), gray.data.end(), t.channel(c++));
        std::copy(gray.data.begin(), gray.data.end(), t.channel(c++));
      }
    }
  }
  return t;
}

BBox map_to_image(const BBox& cube_box, const CubeTensor& t) {
  return {cube_box.x_min * t.scale_x + t.origin_x,
          cube_box.y_min * t.scale_y + t.origin_y,
          cube_box.x_max * t.scale_x + t.origin_x,
          cube_box.y_max * t.scale_y + t.origin_y};
}

BBox image_to_cube(const BBox& image_box, const CubeTensor& t) {
  return {(image_box.x_min - t.origin_x) / t.scale_x,
          (image_box.y_min - t.origin_y) / t.scale_y,
          (image_box.x_max - t.origin_x) / t.scale_x,
          (image_box.y_max - t.origin_y) / t.scale_y};
}

}  // namespace smot
