#include "smot/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace smot {

namespace {

using Vec7 = Eigen::Matrix<double, 7, 1>;
using Mat7 = Eigen::Matrix<double, 7, 7>;
using Vec4 = Eigen::Matrix<double, 4, 1>;
using Mat4 = Eigen::Matrix<double, 4, 4>;
using Mat47 = Eigen::Matrix<double, 4, 7>;

Mat7 transition() {
  Mat7 f = Mat7::Identity();
  f(0, 4) = 1.0;
  f(1, 5) = 1.0;
  f(2, 6) = 1.0;
  return f;
}

Mat47 measurement_model() {
  Mat47 h = Mat47::Zero();
  h(0, 0) = 1.0;
  h(1, 1) = 1.0;
  h(2, 2) = 1.0;
  h(3, 3) = 1.0;
  return h;
}

// Noise constants follow the common SORT convention: cheap position noise,
// 10x on area/aspect, huge initial velocity variance, small velocity
// process noise.
Mat7 process_noise() {
  Vec7 q;
  q << 1.0, 1.0, 1.0, 1.0, 1e-2, 1e-2, 1e-4;
  return q.asDiagonal();
}

Mat4 measurement_noise() {
  Vec4 r;
  r << 1.0, 1.0, 10.0, 10.0;
  return r.asDiagonal();
}

Vec4 box_to_measurement(const BBox& b) {
  Vec4 z;
  z << b.cx(), b.cy(), area(b), b.width() / b.height();
  return z;
}

void symmetrize(Mat7& p) { p = 0.5 * (p + p.transpose()).eval(); }

}  // namespace

BBox state_box(const KalmanState& st) {
  const double s = std::max(st.mean(2), 1e-12);
  const double r = std::max(st.mean(3), 1e-12);
  const double w = std::sqrt(s * r);
  const double h = s / w;
  return {st.mean(0) - w / 2.0, st.mean(1) - h / 2.0,
          st.mean(0) + w / 2.0, st.mean(1) + h / 2.0};
}

KalmanState kalman_init(const BBox& b) {
  if (area(b) <= 0.0) throw std::invalid_argument("kalman_init: degenerate measurement");
  KalmanState st;
  st.mean.head<4>() = box_to_measurement(b);
  Vec7 p;
  p << 10.0, 10.0, 10.0, 10.0, 1e4, 1e4, 1e4;
  st.covariance = p.asDiagonal();
  return st;
}

std::pair<KalmanState, BBox> kalman_predict(const KalmanState& st) {
  KalmanState out = st;
  if (out.mean(2) + out.mean(6) <= 0.0) out.mean(6) = 0.0;
  const Mat7 f = transition();
  out.mean = f * out.mean;
  out.covariance = f * out.covariance * f.transpose() + process_noise();
  symmetrize(out.covariance);
  return {out, state_box(out)};
}

KalmanState kalman_update(const KalmanState& st, const BBox& b) {
  if (area(b) <= 0.0) throw std::invalid_argument("kalman_update: degenerate measurement");
  const Mat47 h = measurement_model();
  const Vec4 z = box_to_measurement(b);
  const Vec4 innovation = z - h * st.mean;
  const Mat4 s = h * st.covariance * h.transpose() + measurement_noise();
  const Eigen::Matrix<double, 7, 4> gain =
      st.covariance * h.transpose() * s.ldlt().solve(Mat4::Identity());

  KalmanState out;
  out.mean = st.mean + gain * innovation;
  out.mean(2) = std::max(out.mean(2), 1e-12);
  out.mean(3) = std::max(out.mean(3), 1e-12);
  // Joseph form keeps the posterior PSD.
  const Mat7 ikh = Mat7::Identity() - gain * h;
  out.covariance = ikh * st.covariance * ikh.transpose() +
                   gain * measurement_noise() * gain.transpose();
  symmetrize(out.covariance);
  return out;
}

std::vector<BBox> last_n_positions(const Track& track, int n) {
  if (n < 1) throw std::invalid_argument("last_n_positions: n must be >= 1");
  if (static_cast<int>(track.history.size()) < n)
    throw std::runtime_error("last_n_positions: track too young");
  std::vector<BBox> out;
  out.reserve(n);
  for (std::size_t i = track.history.size() - n; i < track.history.size(); ++i)
    out.push_back(track.history[i].box);
  return out;
}

const Track* SortTracker::find(int track_id) const {
  for (const Track& t : tracks_)
    if (t.id == track_id) return &t;
  return nullptr;
}

std::vector<TrackOutput> SortTracker::step(const std::vector<Detection>& dets,
                                           int frame_index) {
  if (started_ && frame_index != last_frame_ + 1)
    throw std::runtime_error("tracker: frame order violation");
  started_ = true;
  last_frame_ = frame_index;

  // 1. Predict every track.
  std::vector<BBox> predicted(tracks_.size());
  for (std::size_t i = 0; i < tracks_.size(); ++i) {
    auto [st, box] = kalman_predict(tracks_[i].state);
    tracks_[i].state = st;
    tracks_[i].age += 1;
    predicted[i] = box;
  }

  // 2./3. IoU-cost assignment, gated at match_iou_min.
  std::vector<int> det_of_track(tracks_.size(), -1);
  std::vector<char> det_used(dets.size(), 0);
  if (!tracks_.empty() && !dets.empty()) {
    Eigen::MatrixXd cost(tracks_.size(), dets.size());
    for (std::size_t i = 0; i < tracks_.size(); ++i)
      for (std::size_t j = 0; j < dets.size(); ++j)
        cost(static_cast<long>(i), static_cast<long>(j)) =
            1.0 - iou(predicted[i], dets[j].bbox);
    for (auto [ti, dj] : hungarian(cost)) {
      if (iou(predicted[ti], dets[dj].bbox) >= cfg_.match_iou_min) {
        det_of_track[ti] = dj;
        det_used[dj] = 1;
      }
    }
  }

  // 4. Update matched, age out stale, spawn new.
  std::vector<Track> alive;
  alive.reserve(tracks_.size() + dets.size());
  for (std::size_t i = 0; i < tracks_.size(); ++i) {
    Track& t = tracks_[i];
    if (det_of_track[i] >= 0) {
      const Detection& d = dets[det_of_track[i]];
      t.state = kalman_update(t.state, d.bbox);
      t.time_since_update = 0;
      t.hits += 1;
      t.last_score = d.score;
      t.history.push_back({frame_index, state_box(t.state)});
    } else {
      t.time_since_update += 1;
      if (t.time_since_update > cfg_.max_age) continue;  // deleted
      t.history.push_back({frame_index, predicted[i]});
    }
    alive.push_back(std::move(t));
  }
  for (std::size_t j = 0; j < dets.size(); ++j) {
    if (det_used[j]) continue;
    if (area(dets[j].bbox) <= 0.0) continue;  // untrackable measurement
    Track t;
    t.id = next_id_++;
    t.state = kalman_init(dets[j].bbox);
    t.hits = 1;
    t.last_score = dets[j].score;
    t.history.push_back({frame_index, dets[j].bbox});
    alive.push_back(std::move(t));
  }
  tracks_ = std::move(alive);

  // 5. Report.
  std::vector<TrackOutput> out;
  for (const Track& t : tracks_)
    if (t.hits >= cfg_.min_hits) out.push_back({t.id, t.history.back().box});
  std::sort(out.begin(), out.end(),
            [](const TrackOutput& a, const TrackOutput& b) { return a.track_id < b.track_id; });
  return out;
}

}  // namespace smot
