#include "smot/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "smot/evaluation.hpp"
#include "smot/frame_io.hpp"
#include "smot/pipeline.hpp"
#include "smot/synthgen.hpp"

namespace smot {

namespace {

namespace fs = std::filesystem;

struct DetectOptions {
  std::string frames_dir;
  std::string out_path = "detections.jsonl";
  std::string config_path;
  std::string external_coarse;
  std::string external_fine;
  std::string cube_dir;  // when set, dump every extracted cube
  PipelineConfig cfg;
  CoarseConfig coarse;
  FineConfig fine;
};

void apply_config_file(DetectOptions& opt, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open config");
  nlohmann::json j;
  in >> j;
  PipelineConfig& cfg = opt.cfg;
  cfg.n = j.value("n", cfg.n);
  cfg.gamma = j.value("gamma", cfg.gamma);
  cfg.coarse_score_min = j.value("coarse_score_min", cfg.coarse_score_min);
  cfg.fine_score_min = j.value("fine_score_min", cfg.fine_score_min);
  cfg.nms_iou = j.value("nms_iou", cfg.nms_iou);
  cfg.coarse_width = j.value("coarse_width", cfg.coarse_width);
  cfg.coarse_height = j.value("coarse_height", cfg.coarse_height);
  cfg.fine_width = j.value("fine_width", cfg.fine_width);
  cfg.fine_height = j.value("fine_height", cfg.fine_height);
  cfg.tracker.match_iou_min = j.value("match_iou_min", cfg.tracker.match_iou_min);
  cfg.tracker.max_age = j.value("max_age", cfg.tracker.max_age);
  cfg.tracker.min_hits = j.value("min_hits", cfg.tracker.min_hits);
  cfg.coarse_only = j.value("coarse_only", cfg.coarse_only);

  CoarseConfig& cc = opt.coarse;
  cc.alpha = j.value("coarse_alpha", cc.alpha);
  cc.threshold = j.value("coarse_diff_thresh", cc.threshold);
  cc.min_area = j.value("coarse_min_area", cc.min_area);
  cc.max_area = j.value("coarse_max_area", cc.max_area);
  cc.close_radius = j.value("coarse_close_radius", cc.close_radius);
  cc.recenter_gain = j.value("coarse_recenter_gain", cc.recenter_gain);
  cc.shrink_gain = j.value("coarse_shrink_gain", cc.shrink_gain);

  FineConfig& fc = opt.fine;
  fc.quantile = j.value("fine_quantile", fc.quantile);
  fc.variance_floor = j.value("fine_variance_floor", fc.variance_floor);
  fc.min_area = j.value("fine_min_area", fc.min_area);
  fc.close_radius = j.value("fine_close_radius", fc.close_radius);
  fc.score_scale = j.value("fine_score_scale", fc.score_scale);
}

int run_detect(const DetectOptions& opt) {
  if (opt.cfg.n % 2 == 0) throw std::runtime_error("window length must be odd");
  opt.cfg.validate();

  const std::vector<FrameRecord> frames = load_frames(opt.frames_dir);

  std::unique_ptr<CoarseDetector> coarse;
  if (!opt.external_coarse.empty()) {
    coarse = std::make_unique<ExternalCoarseDetector>(opt.external_coarse);
  } else {
    CoarseConfig cc = opt.coarse;
    cc.input_width = opt.cfg.coarse_width;
    cc.input_height = opt.cfg.coarse_height;
    coarse = std::make_unique<MotionCoarseDetector>(cc);
  }
  std::unique_ptr<FineDetector> fine;
  if (!opt.external_fine.empty())
    fine = std::make_unique<ExternalFineDetector>(opt.external_fine);
  else
    fine = std::make_unique<VarianceFineDetector>(opt.fine);

  CubeSink sink;
  if (!opt.cube_dir.empty()) {
    fs::create_directories(opt.cube_dir);
    sink = [&opt](const Cube& cube, const CubeTensor& tensor) {
      const std::string base = cube_key(tensor.track_id, tensor.middle_frame);
      for (std::size_t i = 0; i < cube.patches.size(); ++i) {
        const std::string name = base + "_p" + std::to_string(i + 1) + ".ppm";
        write_ppm(cube.patches[i], (fs::path(opt.cube_dir) / name).string());
      }
    };
  }

  const std::vector<FinalDetection> dets =
      run_sequence(frames, opt.cfg, *coarse, *fine, sink);

  std::vector<DetRecord> records;
  records.reserve(dets.size());
  for (const FinalDetection& d : dets)
    records.push_back({d.frame_index, d.track_id, std::nullopt, d.class_id, d.score, d.bbox});
  if (!opt.out_path.empty()) {
    write_detection_records(records, opt.out_path);
    std::cout << records.size() << " detections -> " << opt.out_path << "\n";
  }
  return 0;
}

void draw_box(Image& img, const BBox& b, int thickness, std::uint8_t r, std::uint8_t g,
              std::uint8_t bl) {
  const int x0 = std::max(0, static_cast<int>(b.x_min));
  const int y0 = std::max(0, static_cast<int>(b.y_min));
  const int x1 = std::min(img.width, static_cast<int>(b.x_max) + 1);
  const int y1 = std::min(img.height, static_cast<int>(b.y_max) + 1);
  auto paint = [&](int x, int y) {
    if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
    img.at(x, y, 0) = r;
    img.at(x, y, 1) = g;
    img.at(x, y, 2) = bl;
  };
  for (int t = 0; t < thickness; ++t) {
    for (int x = x0; x < x1; ++x) {
      paint(x, y0 + t);
      paint(x, y1 - 1 - t);
    }
    for (int y = y0; y < y1; ++y) {
      paint(x0 + t, y);
      paint(x1 - 1 - t, y);
    }
  }
}

int run_overlay(const std::string& frames_dir, const std::string& dets_path,
                const std::string& out_dir) {
  const std::vector<FrameRecord> frames = load_frames(frames_dir);
  const std::vector<DetRecord> records = read_detection_records(dets_path);
  fs::create_directories(out_dir);

  static const std::uint8_t palette[6][3] = {{230, 60, 60},  {60, 200, 60},
                                             {70, 110, 240}, {230, 200, 40},
                                             {200, 70, 220}, {60, 210, 210}};
  for (const FrameRecord& f : frames) {
    Image img = f.image;
    for (const DetRecord& rec : records) {
      if (rec.frame != f.frame_index) continue;
      const int c = rec.track ? (*rec.track % 6) : 0;
      draw_box(img, rec.bbox, 2, palette[c][0], palette[c][1], palette[c][2]);
    }
    write_ppm(img, (fs::path(out_dir) / frame_file_name(f.frame_index)).string());
  }
  std::cout << frames.size() << " frames -> " << out_dir << "\n";
  return 0;
}

}  // namespace

int cli_dispatch(int argc, const char* const* argv) {
  CLI::App app{"Small moving object detection over frame sequences"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic scene with ground truth");
  std::string synth_preset = "easy";
  std::uint64_t synth_seed = 1;
  int synth_count = 200;
  std::string synth_out = "scene";
  synth->add_option("--preset", synth_preset, "easy | slow")->default_str("easy");
  synth->add_option("--seed", synth_seed, "random seed");
  synth->add_option("--count", synth_count, "number of frames");
  synth->add_option("--out", synth_out, "output directory")->required();

  // detect
  auto* detect = app.add_subcommand("detect", "Run the detection pipeline on a frame directory");
  DetectOptions opt;
  detect->add_option("--frames", opt.frames_dir, "input frame directory")->required();
  detect->add_option("--out", opt.out_path, "output detections (JSONL)");
  detect->add_option("--config", opt.config_path, "JSON config file");
  auto* fn = detect->add_option("--n", opt.cfg.n, "window length (odd)");
  auto* fgamma = detect->add_option("--gamma", opt.cfg.gamma, "motion-amount target");
  auto* fcoarse = detect->add_option("--coarse-thresh", opt.cfg.coarse_score_min,
                                     "coarse score threshold");
  auto* ffine = detect->add_option("--fine-thresh", opt.cfg.fine_score_min,
                                   "fine score threshold");
  auto* fnms = detect->add_option("--nms-iou", opt.cfg.nms_iou, "final NMS IoU");
  auto* fonly = detect->add_flag("--coarse-only", opt.cfg.coarse_only,
                                 "skip cubes, emit tracked coarse boxes");
  detect->add_option("--external-coarse", opt.external_coarse,
                     "JSONL detections replacing the coarse stage");
  detect->add_option("--external-fine", opt.external_fine,
                     "JSONL cube detections replacing the fine stage");

  // eval
  auto* eval = app.add_subcommand("eval", "Score detections against ground truth");
  std::string eval_dets, eval_truth, eval_json;
  double eval_score = 0.5;
  eval->add_option("--dets", eval_dets, "detections JSONL")->required();
  eval->add_option("--truth", eval_truth, "ground truth JSONL")->required();
  eval->add_option("--score-thresh", eval_score, "operating score threshold");
  eval->add_option("--json", eval_json, "also write the report as JSON");

  // overlay
  auto* overlay = app.add_subcommand("overlay", "Burn detection boxes into frames");
  std::string ov_frames, ov_dets, ov_out;
  overlay->add_option("--frames", ov_frames, "input frame directory")->required();
  overlay->add_option("--dets", ov_dets, "detections JSONL")->required();
  overlay->add_option("--out", ov_out, "output directory")->required();

  // cubes
  auto* cubes = app.add_subcommand("cubes", "Dump the adaptive cubes seen by fine detection");
  DetectOptions cube_opt;
  std::string cube_out = "cubes";
  cubes->add_option("--frames", cube_opt.frames_dir, "input frame directory")->required();
  cubes->add_option("--out", cube_out, "cube dump directory")->required();
  auto* cn = cubes->add_option("--n", cube_opt.cfg.n, "window length (odd)");
  auto* cgamma = cubes->add_option("--gamma", cube_opt.cfg.gamma, "motion-amount target");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (synth->parsed()) {
      SynthConfig cfg = preset_config(synth_preset, synth_seed, synth_count);
      const SynthScene scene = generate(cfg);
      export_scene(scene, synth_out);
      std::cout << scene.frames.size() << " frames, " << scene.truth.size()
                << " truth boxes -> " << synth_out << "\n";
      return 0;
    }
    if (detect->parsed()) {
      if (!opt.config_path.empty()) {
        // Precedence: flags > config file > defaults.
        DetectOptions file_opt;
        apply_config_file(file_opt, opt.config_path);
        const PipelineConfig flag_cfg = opt.cfg;
        opt.cfg = file_opt.cfg;
        opt.coarse = file_opt.coarse;
        opt.fine = file_opt.fine;
        if (fn->count()) opt.cfg.n = flag_cfg.n;
        if (fgamma->count()) opt.cfg.gamma = flag_cfg.gamma;
        if (fcoarse->count()) opt.cfg.coarse_score_min = flag_cfg.coarse_score_min;
        if (ffine->count()) opt.cfg.fine_score_min = flag_cfg.fine_score_min;
        if (fnms->count()) opt.cfg.nms_iou = flag_cfg.nms_iou;
        if (fonly->count()) opt.cfg.coarse_only = flag_cfg.coarse_only;
      }
      return run_detect(opt);
    }
    if (eval->parsed()) {
      std::vector<Detection> dets;
      for (const DetRecord& r : read_detection_records(eval_dets))
        dets.push_back({r.bbox, r.class_id, r.score, r.frame});
      std::vector<GroundTruth> gts;
      for (const DetRecord& r : read_detection_records(eval_truth))
        gts.push_back({r.frame, r.class_id, r.bbox});
      const EvalReport report = evaluate(dets, gts, eval_score);
      std::cout << report_table(report);
      if (!eval_json.empty()) {
        std::ofstream out(eval_json);
        if (!out) throw std::runtime_error(eval_json + ": cannot write");
        out << report_json(report);
      }
      return 0;
    }
    if (overlay->parsed()) return run_overlay(ov_frames, ov_dets, ov_out);
    if (cubes->parsed()) {
      (void)cn;
      (void)cgamma;
      cube_opt.cube_dir = cube_out;
      cube_opt.out_path.clear();
      return run_detect(cube_opt);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace smot
