#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "oracles.hpp"
#include "smot/evaluation.hpp"

using namespace smot;

namespace {

Detection det(const BBox& b, double score, int frame = 1, int cls = 0) {
  return {b, cls, score, frame};
}

GroundTruth gt(const BBox& b, int frame = 1, int cls = 0) { return {frame, cls, b}; }

struct RandomInstance {
  std::vector<Detection> dets;
  std::vector<GroundTruth> gts;
};

RandomInstance random_instance(oracle::Rng& rng, int n_dets, int n_gts) {
  RandomInstance inst;
  for (int i = 0; i < n_gts; ++i)
    inst.gts.push_back(gt(oracle::random_box(rng, 60.0, 20.0), rng.uniform_int(1, 3)));
  for (int i = 0; i < n_dets; ++i) {
    // Half the detections perturb a ground truth, half are random clutter.
    if (i < n_dets / 2 && !inst.gts.empty()) {
      const GroundTruth& g = inst.gts[static_cast<std::size_t>(i) % inst.gts.size()];
      BBox b = g.bbox;
      const double dx = rng.uniform(-4.0, 4.0), dy = rng.uniform(-4.0, 4.0);
      b.x_min += dx; b.x_max += dx; b.y_min += dy; b.y_max += dy;
      inst.dets.push_back(det(b, rng.uniform(0.05, 1.0), g.frame_index));
    } else {
      inst.dets.push_back(det(oracle::random_box(rng, 60.0, 20.0),
                              rng.uniform(0.05, 1.0), rng.uniform_int(1, 3)));
    }
  }
  return inst;
}

}  // namespace

TEST_CASE("match basics") {
  const std::vector<GroundTruth> gts{gt({0, 0, 10, 10})};

  const std::vector<Detection> exact{det({0, 0, 10, 10}, 0.9)};
  const MatchResult m1 = match(exact, gts, 0.5);
  CHECK(m1.tp.size() == 1);
  CHECK(m1.fp.empty());
  CHECK(m1.fn == 0);

  // Two detections on one ground truth: the stronger wins.
  const std::vector<Detection> two{det({0, 0, 10, 10}, 0.6), det({1, 0, 11, 10}, 0.9)};
  const MatchResult m2 = match(two, gts, 0.5);
  REQUIRE(m2.tp.size() == 1);
  CHECK(m2.tp[0].first == 1);  // the 0.9 detection
  CHECK(m2.fp.size() == 1);
  CHECK(m2.fp[0] == 0);

  // Detections never match across frames or classes.
  const std::vector<Detection> wrong{det({0, 0, 10, 10}, 0.9, 2),
                                     det({0, 0, 10, 10}, 0.9, 1, 7)};
  const MatchResult m3 = match(wrong, gts, 0.5);
  CHECK(m3.tp.empty());
  CHECK(m3.fp.size() == 2);
  CHECK(m3.fn == 1);
}

TEST_CASE("match agrees with the independent greedy oracle") {
  oracle::Rng rng(303);
  for (int trial = 0; trial < 200; ++trial) {
    const RandomInstance inst = random_instance(rng, 30, 20);
    const double thr = rng.uniform(0.3, 0.8);
    const MatchResult got = match(inst.dets, inst.gts, thr);
    const oracle::MatchCounts want = oracle::greedy_match(inst.dets, inst.gts, thr);
    CHECK(static_cast<int>(got.tp.size()) == want.tp);
    CHECK(static_cast<int>(got.fp.size()) == want.fp);
    CHECK(got.fn == want.fn);
  }
}

TEST_CASE("match is permutation invariant") {
  oracle::Rng rng(409);
  const RandomInstance inst = random_instance(rng, 25, 15);
  const MatchResult base = match(inst.dets, inst.gts, 0.5);

  std::vector<Detection> shuffled = inst.dets;
  std::reverse(shuffled.begin(), shuffled.end());
  const MatchResult rev = match(shuffled, inst.gts, 0.5);
  CHECK(rev.tp.size() == base.tp.size());
  CHECK(rev.fp.size() == base.fp.size());
  CHECK(rev.fn == base.fn);
}

TEST_CASE("precision_recall conventions and arithmetic") {
  const std::vector<GroundTruth> gts{gt({0, 0, 10, 10}), gt({20, 20, 30, 30})};

  const std::vector<Detection> perfect{det({0, 0, 10, 10}, 0.9),
                                       det({20, 20, 30, 30}, 0.8)};
  CHECK(precision_recall(perfect, gts, 0.5, 0.5) ==
        std::pair<double, double>{1.0, 1.0});

  // No detections above threshold: precision 1, recall 0.
  CHECK(precision_recall(perfect, gts, 0.95, 0.5) ==
        std::pair<double, double>{1.0, 0.0});

  // No ground truth: recall 1 by convention.
  CHECK(precision_recall(perfect, {}, 0.5, 0.5).second == 1.0);

  // 3 TP + 1 FP over 5 GT -> (0.75, 0.6).
  std::vector<GroundTruth> five;
  for (int i = 0; i < 5; ++i) five.push_back(gt({20.0 * i, 0, 20.0 * i + 10, 10}));
  std::vector<Detection> dets;
  for (int i = 0; i < 3; ++i) dets.push_back(det({20.0 * i, 0, 20.0 * i + 10, 10}, 0.9));
  dets.push_back(det({300, 300, 310, 310}, 0.9));
  const auto [prec, rec] = precision_recall(dets, five, 0.5, 0.5);
  CHECK(prec == doctest::Approx(0.75));
  CHECK(rec == doctest::Approx(0.6));
}

TEST_CASE("average_precision hand cases") {
  const std::vector<GroundTruth> one{gt({0, 0, 10, 10})};
  const std::vector<Detection> hit{det({0, 0, 10, 10}, 0.9)};
  CHECK(average_precision(hit, one, 0.5) == doctest::Approx(1.0));

  // TP at rank 1, FP at rank 2: envelope reaches recall 1 at precision 1.
  const std::vector<Detection> tp_fp{det({0, 0, 10, 10}, 0.9),
                                     det({50, 50, 60, 60}, 0.8)};
  CHECK(average_precision(tp_fp, one, 0.5) == doctest::Approx(1.0));

  // FP at rank 1, TP at rank 2: precision at full recall is 1/2.
  const std::vector<Detection> fp_tp{det({50, 50, 60, 60}, 0.9),
                                     det({0, 0, 10, 10}, 0.8)};
  CHECK(average_precision(fp_tp, one, 0.5) == doctest::Approx(0.5));

  CHECK(average_precision({}, one, 0.5) == 0.0);
  CHECK_THROWS_WITH_AS(average_precision(tp_fp, {}, 0.5), doctest::Contains("undefined AP"),
                       std::runtime_error);
}

TEST_CASE("average_precision matches the brute-force envelope oracle") {
  oracle::Rng rng(911);
  for (int trial = 0; trial < 200; ++trial) {
    const RandomInstance inst = random_instance(rng, 24, 12);
    const double thr = rng.uniform(0.3, 0.8);
    const double got = average_precision(inst.dets, inst.gts, thr);
    const double want = oracle::brute_average_precision(inst.dets, inst.gts, thr);
    CHECK(got == doctest::Approx(want).epsilon(1e-9));
  }
}

TEST_CASE("AP is monotone non-increasing in the IoU threshold") {
  oracle::Rng rng(1213);
  for (int trial = 0; trial < 50; ++trial) {
    const RandomInstance inst = random_instance(rng, 20, 10);
    double prev = 1e9;
    for (int k = 0; k < 10; ++k) {
      const double ap = average_precision(inst.dets, inst.gts, 0.50 + 0.05 * k);
      CHECK(ap <= prev + 1e-12);
      prev = ap;
    }
  }
}

TEST_CASE("recall never grows when the score threshold rises") {
  oracle::Rng rng(1415);
  const RandomInstance inst = random_instance(rng, 30, 15);
  double prev_rec = 1.0;
  for (double s : {0.0, 0.2, 0.4, 0.6, 0.8}) {
    const double rec = precision_recall(inst.dets, inst.gts, s, 0.5).second;
    CHECK(rec <= prev_rec + 1e-12);
    prev_rec = rec;
  }
}

TEST_CASE("ap_range is the mean of the ten threshold APs") {
  const std::vector<GroundTruth> one{gt({0, 0, 10, 10})};

  // Perfect overlap: 1.0 at every threshold.
  const std::vector<Detection> hit{det({0, 0, 10, 10}, 0.9)};
  CHECK(ap_range(hit, one) == doctest::Approx(1.0));

  // Box [0,0,10,7.5] vs [0,0,10,10]: inter 75, union 100 -> IoU 0.75,
  // so only the six thresholds up to 0.75 count.
  const std::vector<Detection> at75{det({0, 0, 10, 7.5}, 0.9)};
  CHECK(ap_range(at75, one) == doctest::Approx(6.0 / 10.0));

  oracle::Rng rng(1617);
  const RandomInstance inst = random_instance(rng, 20, 10);
  double mean = 0.0;
  for (int k = 0; k < 10; ++k)
    mean += average_precision(inst.dets, inst.gts, 0.50 + 0.05 * k);
  CHECK(ap_range(inst.dets, inst.gts) == doctest::Approx(mean / 10.0));
}

TEST_CASE("evaluate fills the report and formats the table") {
  const std::vector<GroundTruth> gts{gt({0, 0, 10, 10}), gt({20, 20, 30, 30})};
  const std::vector<Detection> dets{det({0, 0, 10, 10}, 0.9),
                                    det({40, 40, 50, 50}, 0.7)};
  const EvalReport r = evaluate(dets, gts, 0.5);
  CHECK(r.prec50 == doctest::Approx(0.5));
  CHECK(r.rec50 == doctest::Approx(0.5));
  CHECK(r.counts50.tp == 1);
  CHECK(r.counts50.fp == 1);
  CHECK(r.counts50.fn == 1);
  CHECK(r.ap50 == doctest::Approx(0.5));

  const std::string table = report_table(r);
  CHECK(table.find("Prec50") != std::string::npos);
  CHECK(table.find("AP") != std::string::npos);
  const std::string json = report_json(r);
  CHECK(json.find("\"ap50\"") != std::string::npos);
}
