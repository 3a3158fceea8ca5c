#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace smot {

/// Interleaved 8-bit raster, row-major, origin at the top-left corner.
/// channels is 1 (gray) or 3 (RGB).
struct Image {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> data;

  static Image make(int w, int h, int c, std::uint8_t fill = 0);

  bool empty() const { return width == 0 || height == 0; }
  bool same_shape(const Image& o) const {
    return width == o.width && height == o.height && channels == o.channels;
  }
  std::size_t offset(int x, int y, int c = 0) const {
    return (static_cast<std::size_t>(y) * width + x) * channels + c;
  }
  std::uint8_t& at(int x, int y, int c = 0) { return data[offset(x, y, c)]; }
  std::uint8_t at(int x, int y, int c = 0) const { return data[offset(x, y, c)]; }
};

/// Single-channel float raster used for accumulators and variance maps.
struct FloatImage {
  int width = 0;
  int height = 0;
  std::vector<float> data;

  static FloatImage make(int w, int h, float fill = 0.0f);

  float& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  float at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
};

/// Copies the half-open pixel window [x0,x1) x [y0,y1). Bit-exact.
Image crop(const Image& src, int x0, int y0, int x1, int y1);

/// BT.601 luma: round(0.299 R + 0.587 G + 0.114 B), clamped to [0,255].
/// Gray input is returned unchanged.
Image to_gray(const Image& src);

/// Bilinear resampling with half-pixel centers. Identity when sizes match.
Image resize_bilinear(const Image& src, int out_w, int out_h);

/// Binary PPM/PGM codec (P6 for RGB, P5 for gray), maxval 255.
Image read_ppm(const std::string& path);
void write_ppm(const Image& img, const std::string& path);

}  // namespace smot
