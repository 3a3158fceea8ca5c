#include "smot/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace smot {

Image Image::make(int w, int h, int c, std::uint8_t fill) {
  if (w < 0 || h < 0 || (c != 1 && c != 3))
    throw std::invalid_argument("Image::make: bad shape");
  Image img;
  img.width = w;
  img.height = h;
  img.channels = c;
  img.data.assign(static_cast<std::size_t>(w) * h * c, fill);
  return img;
}

FloatImage FloatImage::make(int w, int h, float fill) {
  FloatImage img;
  img.width = w;
  img.height = h;
  img.data.assign(static_cast<std::size_t>(w) * h, fill);
  return img;
}

Image crop(const Image& src, int x0, int y0, int x1, int y1) {
  if (x0 < 0 || y0 < 0 || x1 > src.width || y1 > src.height || x1 <= x0 || y1 <= y0)
    throw std::invalid_argument("crop: window outside image");
  Image out = Image::make(x1 - x0, y1 - y0, src.channels);
  const std::size_t row_bytes = static_cast<std::size_t>(out.width) * src.channels;
  for (int y = y0; y < y1; ++y) {
    const std::uint8_t* s = src.data.data() + src.offset(x0, y);
    std::uint8_t* d = out.data.data() + out.offset(0, y - y0);
    std::copy(s, s + row_bytes, d);
  }
  return out;
}

Image to_gray(const Image& src) {
  if (src.channels == 1) return src;
  Image out = Image::make(src.width, src.height, 1);
  const std::uint8_t* s = src.data.data();
  for (std::size_t i = 0, n = out.data.size(); i < n; ++i, s += 3) {
    double y = 0.299 * s[0] + 0.587 * s[1] + 0.114 * s[2];
    long v = std::lround(y);
    out.data[i] = static_cast<std::uint8_t>(std::clamp(v, 0L, 255L));
  }
  return out;
}

Image resize_bilinear(const Image& src, int out_w, int out_h) {
  if (out_w <= 0 || out_h <= 0) throw std::invalid_argument("resize: bad target");
  if (src.empty()) throw std::invalid_argument("resize: empty source");
  if (out_w == src.width && out_h == src.height) return src;

  Image out = Image::make(out_w, out_h, src.channels);
  const double sx = static_cast<double>(src.width) / out_w;
  const double sy = static_cast<double>(src.height) / out_h;
  const int c = src.channels;
  for (int y = 0; y < out_h; ++y) {
    double fy = (y + 0.5) * sy - 0.5;
    fy = std::clamp(fy, 0.0, static_cast<double>(src.height - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, src.height - 1);
    const double wy = fy - y0;
    for (int x = 0; x < out_w; ++x) {
      double fx = (x + 0.5) * sx - 0.5;
      fx = std::clamp(fx, 0.0, static_cast<double>(src.width - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, src.width - 1);
      const double wx = fx - x0;
      for (int k = 0; k < c; ++k) {
        const double v00 = src.at(x0, y0, k);
        const double v10 = src.at(x1, y0, k);
        const double v01 = src.at(x0, y1, k);
        const double v11 = src.at(x1, y1, k);
        const double v = (1 - wy) * ((1 - wx) * v00 + wx * v10) +
                         wy * ((1 - wx) * v01 + wx * v11);
        out.at(x, y, k) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return out;
}

namespace {

int read_pnm_int(std::istream& in, const std::string& path) {
  // Skips whitespace and '#' comments between header tokens.
  int ch = in.get();
  while (ch != EOF) {
    if (ch == '#') {
      while (ch != EOF && ch != '\n') ch = in.get();
    } else if (!std::isspace(ch)) {
      break;
    }
    ch = in.get();
  }
  if (ch == EOF || !std::isdigit(ch))
    throw std::runtime_error(path + ": malformed PNM header");
  int value = 0;
  while (ch != EOF && std::isdigit(ch)) {
    value = value * 10 + (ch - '0');
    ch = in.get();
  }
  return value;
}

}  // namespace

Image read_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open");
  char magic[2] = {0, 0};
  in.read(magic, 2);
  int channels;
  if (magic[0] == 'P' && magic[1] == '6') channels = 3;
  else if (magic[0] == 'P' && magic[1] == '5') channels = 1;
  else throw std::runtime_error(path + ": not a binary PPM/PGM (P6/P5)");

  const int w = read_pnm_int(in, path);
  const int h = read_pnm_int(in, path);
  const int maxval = read_pnm_int(in, path);
  if (maxval != 255) throw std::runtime_error(path + ": unsupported maxval");
  if (w <= 0 || h <= 0) throw std::runtime_error(path + ": bad dimensions");

  Image img = Image::make(w, h, channels);
  in.read(reinterpret_cast<char*>(img.data.data()),
          static_cast<std::streamsize>(img.data.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.data.size()))
    throw std::runtime_error(path + ": truncated pixel data");
  return img;
}

void write_ppm(const Image& img, const std::string& path) {
  if (img.empty()) throw std::invalid_argument("write_ppm: empty image");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot write");
  out << (img.channels == 3 ? "P6" : "P5") << "\n"
      << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data.data()),
            static_cast<std::streamsize>(img.data.size()));
  if (!out) throw std::runtime_error(path + ": short write");
}

}  // namespace smot
