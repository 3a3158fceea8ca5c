#include "smot/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "smot/frame_io.hpp"

namespace smot {

namespace {

struct Component {
  IntRect box;
  int pixels = 0;
};

struct Labeling {
  std::vector<int> label;  // -1 background, else component index
  std::vector<Component> comps;
};

// Two-pass 8-connected labeling with union-find; components are numbered
// by first pixel in raster order.
Labeling label_components(const Image& mask) {
  if (mask.channels != 1) throw std::invalid_argument("components: mask must be gray");
  const int w = mask.width;
  const int h = mask.height;
  Labeling out;
  out.label.assign(static_cast<std::size_t>(w) * h, -1);

  std::vector<int> parent;
  auto find = [&](int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  auto unite = [&](int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  };

  std::vector<int> provisional(static_cast<std::size_t>(w) * h, -1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (mask.at(x, y) == 0) continue;
      const std::size_t idx = static_cast<std::size_t>(y) * w + x;
      int lab = -1;
      const int nx[4] = {x - 1, x - 1, x, x + 1};
      const int ny[4] = {y, y - 1, y - 1, y - 1};
      for (int k = 0; k < 4; ++k) {
        if (nx[k] < 0 || ny[k] < 0 || nx[k] >= w) continue;
        const int nl = provisional[static_cast<std::size_t>(ny[k]) * w + nx[k]];
        if (nl < 0) continue;
        if (lab < 0) lab = nl;
        else unite(lab, nl);
      }
      if (lab < 0) {
        lab = static_cast<int>(parent.size());
        parent.push_back(lab);
      }
      provisional[idx] = lab;
    }
  }

  std::vector<int> compact(parent.size(), -1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t idx = static_cast<std::size_t>(y) * w + x;
      if (provisional[idx] < 0) continue;
      const int root = find(provisional[idx]);
      if (compact[root] < 0) {
        compact[root] = static_cast<int>(out.comps.size());
        out.comps.push_back({{x, y, x + 1, y + 1}, 0});
      }
      const int c = compact[root];
      Component& comp = out.comps[c];
      comp.box.x0 = std::min(comp.box.x0, x);
      comp.box.y0 = std::min(comp.box.y0, y);
      comp.box.x1 = std::max(comp.box.x1, x + 1);
      comp.box.y1 = std::max(comp.box.y1, y + 1);
      comp.pixels += 1;
      out.label[idx] = c;
    }
  }
  return out;
}

// Separable box dilation (set=max) or erosion (set=min).
void box_morph(Image& mask, int radius, bool dilate) {
  const int w = mask.width;
  const int h = mask.height;
  std::vector<std::uint8_t> tmp(mask.data.size());
  auto pass = [&](const std::uint8_t* src, std::uint8_t* dst, bool rows) {
    const int outer = rows ? h : w;
    const int inner = rows ? w : h;
    for (int o = 0; o < outer; ++o) {
      for (int i = 0; i < inner; ++i) {
        std::uint8_t v = dilate ? 0 : 255;
        const int lo = std::max(0, i - radius);
        const int hi = std::min(inner - 1, i + radius);
        for (int j = lo; j <= hi; ++j) {
          const std::uint8_t s = rows ? src[o * w + j] : src[j * w + o];
          v = dilate ? std::max(v, s) : std::min(v, s);
        }
        if (rows) dst[o * w + i] = v;
        else dst[i * w + o] = v;
      }
    }
  };
  pass(mask.data.data(), tmp.data(), true);
  pass(tmp.data(), mask.data.data(), false);
}

double quantile_value(const FloatImage& img, double q) {
  std::vector<float> v(img.data);
  if (v.empty()) return 0.0;
  const auto idx = static_cast<std::size_t>(
      std::llround(q * static_cast<double>(v.size() - 1)));
  std::nth_element(v.begin(), v.begin() + static_cast<long>(idx), v.end());
  return v[idx];
}

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

// Weighted centroid of a float map restricted to one labeled component.
bool centroid(const FloatImage& weights, const std::vector<int>& label, int comp,
              Vec2& out) {
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (int y = 0; y < weights.height; ++y) {
    for (int x = 0; x < weights.width; ++x) {
      const std::size_t idx = static_cast<std::size_t>(y) * weights.width + x;
      if (label[idx] != comp) continue;
      const double v = weights.data[idx];
      sw += v;
      sx += v * x;
      sy += v * y;
    }
  }
  if (sw < 1e-6) return false;
  out = {sx / sw, sy / sw};
  return true;
}

// Same, over a set of components.
bool centroid(const FloatImage& weights, const std::vector<int>& label,
              const std::vector<char>& member, Vec2& out) {
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (int y = 0; y < weights.height; ++y) {
    for (int x = 0; x < weights.width; ++x) {
      const std::size_t idx = static_cast<std::size_t>(y) * weights.width + x;
      const int l = label[idx];
      if (l < 0 || !member[l]) continue;
      const double v = weights.data[idx];
      sw += v;
      sx += v * x;
      sy += v * y;
    }
  }
  if (sw < 1e-6) return false;
  out = {sx / sw, sy / sw};
  return true;
}

BBox shrink_centered(const BBox& box, double shrink_x, double shrink_y) {
  const double min_keep_x = std::min(box.width(), std::max(2.0, 0.1 * box.width()));
  const double min_keep_y = std::min(box.height(), std::max(2.0, 0.1 * box.height()));
  const double new_w = std::max(box.width() - shrink_x, min_keep_x);
  const double new_h = std::max(box.height() - shrink_y, min_keep_y);
  return {box.cx() - new_w / 2.0, box.cy() - new_h / 2.0,
          box.cx() + new_w / 2.0, box.cy() + new_h / 2.0};
}

}  // namespace

std::vector<IntRect> connected_components(const Image& mask) {
  const Labeling lab = label_components(mask);
  std::vector<IntRect> boxes;
  boxes.reserve(lab.comps.size());
  for (const Component& c : lab.comps) boxes.push_back(c.box);
  return boxes;
}

void binary_close(Image& mask, int radius) {
  if (radius <= 0) return;
  box_morph(mask, radius, true);
  box_morph(mask, radius, false);
}

MotionCoarseDetector::MotionCoarseDetector(CoarseConfig cfg) : cfg_(cfg) {
  state_.alpha = cfg_.alpha;
}

void MotionCoarseDetector::absorb(const FrameRecord& frame) {
  const int w = cfg_.input_width;
  const int h = cfg_.input_height;
  if (state_.accum.data.empty()) {
    state_.accum = FloatImage::make(w, h);
    state_.last_diff = FloatImage::make(w, h);
    state_.prev_diff = FloatImage::make(w, h);
  }
  Image gray = resize_bilinear(to_gray(frame.image), w, h);

  FloatImage diff = FloatImage::make(w, h);
  if (!state_.prev_gray.empty()) {
    for (std::size_t i = 0; i < diff.data.size(); ++i)
      diff.data[i] = std::abs(static_cast<float>(gray.data[i]) -
                              static_cast<float>(state_.prev_gray.data[i]));
  }
  const float a = static_cast<float>(state_.alpha);
  for (std::size_t i = 0; i < diff.data.size(); ++i)
    state_.accum.data[i] = a * diff.data[i] + (1.0f - a) * state_.accum.data[i];

  state_.prev_diff = std::move(state_.last_diff);
  state_.last_diff = std::move(diff);
  state_.prev_gray = std::move(gray);
  state_.last_frame = frame.frame_index;
}

std::vector<Detection> MotionCoarseDetector::detect(std::span<const FrameRecord> window) {
  const int n = static_cast<int>(window.size());
  if (n % 2 == 0) throw std::invalid_argument("coarse detect: window length must be odd");
  if (n < 3) throw std::invalid_argument("coarse detect: window too short");
  for (const FrameRecord& f : window)
    if (f.frame_index > state_.last_frame) absorb(f);

  const int middle = window[(n - 1) / 2].frame_index;
  const int w = cfg_.input_width;
  const int h = cfg_.input_height;
  const double sx = static_cast<double>(window.front().image.width) / w;
  const double sy = static_cast<double>(window.front().image.height) / h;

  Image mask = Image::make(w, h, 1);
  float max_accum = 0.0f;
  for (std::size_t i = 0; i < state_.accum.data.size(); ++i) {
    max_accum = std::max(max_accum, state_.accum.data[i]);
    mask.data[i] = state_.accum.data[i] >= cfg_.threshold ? 255 : 0;
  }
  if (max_accum <= 0.0f) return {};
  binary_close(mask, cfg_.close_radius);

  const Labeling lab = label_components(mask);
  std::vector<Detection> dets;
  for (std::size_t c = 0; c < lab.comps.size(); ++c) {
    const Component& comp = lab.comps[c];
    if (comp.pixels < cfg_.min_area || comp.pixels > cfg_.max_area) continue;

    double sum = 0.0;
    for (int y = comp.box.y0; y < comp.box.y1; ++y)
      for (int x = comp.box.x0; x < comp.box.x1; ++x) sum += state_.accum.at(x, y);
    const double mean = sum / (static_cast<double>(comp.box.width()) * comp.box.height());
    const double score = std::clamp(mean / max_accum, 0.0, 1.0);

    // Difference-map drift estimates the per-frame motion; the raw box
    // trails the middle frame by about one step and is one band too wide.
    Vec2 cur{}, prev{};
    Vec2 vel{};
    if (centroid(state_.last_diff, lab.label, static_cast<int>(c), cur) &&
        centroid(state_.prev_diff, lab.label, static_cast<int>(c), prev))
      vel = {cur.x - prev.x, cur.y - prev.y};

    BBox box = comp.box.to_bbox();
    box = shrink_centered(box, cfg_.shrink_gain * std::abs(vel.x),
                          cfg_.shrink_gain * std::abs(vel.y));
    const double dx = -cfg_.recenter_gain * vel.x;
    const double dy = -cfg_.recenter_gain * vel.y;
    box = {box.x_min + dx, box.y_min + dy, box.x_max + dx, box.y_max + dy};

    box = {box.x_min * sx, box.y_min * sy, box.x_max * sx, box.y_max * sy};
    box = intersect(box, {0.0, 0.0, static_cast<double>(window.front().image.width),
                          static_cast<double>(window.front().image.height)});
    if (area(box) <= 0.0) continue;
    dets.push_back({box, 0, score, middle});
  }
  std::sort(dets.begin(), dets.end(), detection_order);
  return dets;
}

VarianceFineDetector::VarianceFineDetector(FineConfig cfg) : cfg_(cfg) {}

std::vector<CubeDetection> VarianceFineDetector::detect(const CubeTensor& tensor) {
  const int n = tensor.temporal_count();
  if (n < 3 || n % 2 == 0 || tensor.middle_index < 1 || tensor.middle_index > n)
    throw std::invalid_argument("fine detect: malformed channel count");
  const int w = tensor.width;
  const int h = tensor.height;
  const std::size_t plane = static_cast<std::size_t>(w) * h;

  // Temporal planes: gray channels plus the luma of the middle RGB triple.
  std::vector<std::vector<double>> planes(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) {
    std::vector<double>& p = planes[i - 1];
    p.resize(plane);
    if (i == tensor.middle_index) {
      const std::uint8_t* r = tensor.channel(i - 1);
      const std::uint8_t* g = tensor.channel(i);
      const std::uint8_t* b = tensor.channel(i + 1);
      for (std::size_t k = 0; k < plane; ++k)
        p[k] = std::lround(0.299 * r[k] + 0.587 * g[k] + 0.114 * b[k]);
    } else {
      const std::uint8_t* src = tensor.channel(i - 1 + (i > tensor.middle_index ? 2 : 0));
      for (std::size_t k = 0; k < plane; ++k) p[k] = src[k];
    }
  }

  FloatImage variance = FloatImage::make(w, h);
  for (std::size_t k = 0; k < plane; ++k) {
    double mean = 0.0;
    for (int i = 0; i < n; ++i) mean += planes[i][k];
    mean /= n;
    double var = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = planes[i][k] - mean;
      var += d * d;
    }
    variance.data[k] = static_cast<float>(var / n);
  }

  const double thr = std::max(quantile_value(variance, cfg_.quantile),
                              cfg_.variance_floor);
  Image mask = Image::make(w, h, 1);
  for (std::size_t k = 0; k < plane; ++k)
    mask.data[k] = variance.data[k] >= thr ? 255 : 0;
  binary_close(mask, cfg_.close_radius);

  const Labeling lab = label_components(mask);

  // One slow or low-contrast object often leaves several moving-edge arcs
  // instead of a closed ring. Cluster components whose boxes sit within
  // merge_gap of each other and treat each cluster as one candidate.
  std::vector<int> keep;
  for (std::size_t c = 0; c < lab.comps.size(); ++c)
    if (lab.comps[c].pixels >= cfg_.min_area) keep.push_back(static_cast<int>(c));
  std::vector<int> cluster_of(lab.comps.size(), -1);
  std::vector<IntRect> cluster_box;
  auto gap = [](const IntRect& a, const IntRect& b) {
    const int dx = std::max({a.x0 - b.x1, b.x0 - a.x1, 0});
    const int dy = std::max({a.y0 - b.y1, b.y0 - a.y1, 0});
    return std::max(dx, dy);
  };
  for (int c : keep) {
    cluster_of[c] = static_cast<int>(cluster_box.size());
    cluster_box.push_back(lab.comps[c].box);
  }
  for (bool merged = true; merged;) {
    merged = false;
    for (std::size_t a = 0; a < cluster_box.size() && !merged; ++a)
      for (std::size_t b = a + 1; b < cluster_box.size() && !merged; ++b) {
        if (gap(cluster_box[a], cluster_box[b]) > cfg_.merge_gap) continue;
        cluster_box[a] = {std::min(cluster_box[a].x0, cluster_box[b].x0),
                          std::min(cluster_box[a].y0, cluster_box[b].y0),
                          std::max(cluster_box[a].x1, cluster_box[b].x1),
                          std::max(cluster_box[a].y1, cluster_box[b].y1)};
        cluster_box.erase(cluster_box.begin() + static_cast<long>(b));
        for (int& cl : cluster_of)
          if (cl == static_cast<int>(b)) cl = static_cast<int>(a);
          else if (cl > static_cast<int>(b)) --cl;
        merged = true;
      }
  }

  // Membership mask per cluster for the statistics below.
  std::vector<char> member(lab.comps.size(), 0);
  std::vector<CubeDetection> dets;
  for (std::size_t cl = 0; cl < cluster_box.size(); ++cl) {
    std::fill(member.begin(), member.end(), 0);
    long pixels = 0;
    for (std::size_t c = 0; c < lab.comps.size(); ++c)
      if (cluster_of[c] == static_cast<int>(cl)) {
        member[c] = 1;
        pixels += lab.comps[c].pixels;
      }
    if (pixels < cfg_.min_area) continue;

    double var_sum = 0.0;
    for (std::size_t k = 0; k < plane; ++k)
      if (lab.label[k] >= 0 && member[lab.label[k]]) var_sum += variance.data[k];
    const double rms = std::sqrt(var_sum / static_cast<double>(pixels));
    const double score = rms / (rms + cfg_.score_scale);

    // Per-axis velocity from the drift of consecutive difference maps;
    // the swept extent exceeds the middle-frame extent by (n-1)|v|.
    FloatImage diff = FloatImage::make(w, h);
    std::vector<Vec2> cents;
    for (int j = 0; j + 1 < n; ++j) {
      for (std::size_t k = 0; k < plane; ++k)
        diff.data[k] = static_cast<float>(std::abs(planes[j + 1][k] - planes[j][k]));
      Vec2 ct{};
      if (!centroid(diff, lab.label, member, ct)) break;
      cents.push_back(ct);
    }
    Vec2 vel{};
    if (cents.size() == static_cast<std::size_t>(n - 1) && cents.size() >= 2) {
      const double m = static_cast<double>(cents.size());
      double t_mean = 0.0;
      for (std::size_t j = 0; j < cents.size(); ++j) t_mean += static_cast<double>(j);
      t_mean /= m;
      double sxx = 0.0, sxy_x = 0.0, sxy_y = 0.0;
      for (std::size_t j = 0; j < cents.size(); ++j) {
        const double dt = static_cast<double>(j) - t_mean;
        sxx += dt * dt;
        sxy_x += dt * cents[j].x;
        sxy_y += dt * cents[j].y;
      }
      if (sxx > 1e-12) vel = {sxy_x / sxx, sxy_y / sxx};
    }

    BBox box = shrink_centered(cluster_box[cl].to_bbox(), (n - 1) * std::abs(vel.x),
                               (n - 1) * std::abs(vel.y));
    box = intersect(box, {0.0, 0.0, static_cast<double>(w), static_cast<double>(h)});
    if (area(box) <= 0.0) continue;
    dets.push_back({0, score, box});
  }
  std::sort(dets.begin(), dets.end(), [](const CubeDetection& a, const CubeDetection& b) {
    return std::make_tuple(-a.score, a.bbox.x_min, a.bbox.y_min, a.bbox.x_max, a.bbox.y_max) <
           std::make_tuple(-b.score, b.bbox.x_min, b.bbox.y_min, b.bbox.x_max, b.bbox.y_max);
  });
  return dets;
}

DetectionFileIndex::DetectionFileIndex(const std::string& path) {
  for (const DetRecord& rec : read_detection_records(path)) {
    if (rec.cube_id) {
      by_cube_[*rec.cube_id].push_back({rec.class_id, rec.score, rec.bbox});
    } else {
      by_frame_[rec.frame].push_back({rec.bbox, rec.class_id, rec.score, rec.frame});
    }
  }
}

std::vector<Detection> DetectionFileIndex::for_frame(int frame_index) const {
  const auto it = by_frame_.find(frame_index);
  return it == by_frame_.end() ? std::vector<Detection>{} : it->second;
}

std::vector<CubeDetection> DetectionFileIndex::for_cube(const std::string& cube_id) const {
  const auto it = by_cube_.find(cube_id);
  return it == by_cube_.end() ? std::vector<CubeDetection>{} : it->second;
}

std::vector<Detection> ExternalCoarseDetector::detect(std::span<const FrameRecord> window) {
  if (window.empty()) return {};
  const int middle = window[(window.size() - 1) / 2].frame_index;
  return index_.for_frame(middle);
}

std::string cube_key(int track_id, int middle_frame) {
  return "t" + std::to_string(track_id) + "_f" + std::to_string(middle_frame);
}

std::vector<CubeDetection> ExternalFineDetector::detect(const CubeTensor& tensor) {
  return index_.for_cube(cube_key(tensor.track_id, tensor.middle_frame));
}

}  // namespace smot
