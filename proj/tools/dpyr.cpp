// dpyr: deformable-part-model inference over feature pyramids.
//
// Subcommands: pyramid (build/convert feature pyramids), detect (end-to-end
// detection), score (raw score dump), selftest (oracle-equivalence suites),
// bench (timing tables). Exit status: 0 success, 1 internal failure,
// 2 usage/IO error.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dpyr/detect.hpp"
#include "dpyr/dpm_cnn.hpp"
#include "dpyr/dpm_model.hpp"
#include "dpyr/dt_pool.hpp"
#include "dpyr/feature_frontend.hpp"
#include "dpyr/filter_conv.hpp"
#include "dpyr/image.hpp"
#include "dpyr/oracle.hpp"
#include "dpyr/selftest.hpp"

namespace {

struct PyramidFlags {
  int max_dim = 1713;
  int levels = 7;
  int interval = 2;
  int pad_y = 0;
  int pad_x = 0;
  int stride = 8;
  std::string features = "hog31";  // hog31 | stub | import
};

void add_pyramid_flags(CLI::App* cmd, PyramidFlags* f, bool with_features) {
  cmd->add_option("--max-dim", f->max_dim,
                  "Level-0 target for the image's largest dimension (px)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--levels", f->levels, "Number of pyramid levels")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--interval", f->interval,
                  "Levels per octave (scale step 2^(-1/interval))")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--pad-y", f->pad_y, "Zero padding per side (cells)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_option("--pad-x", f->pad_x, "Zero padding per side (cells)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_option("--stride", f->stride, "Pixels per feature cell")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  if (with_features) {
    cmd->add_option("--features", f->features,
                    "Feature extractor, or \"import\" to read a .dpyr file")
        ->check(CLI::IsMember({"hog31", "stub", "import"}))
        ->capture_default_str();
  }
}

dpyr::PyramidConfig to_config(const PyramidFlags& f) {
  dpyr::PyramidConfig cfg;
  cfg.max_dim = f.max_dim;
  cfg.levels = f.levels;
  cfg.interval = f.interval;
  cfg.pad_y = f.pad_y;
  cfg.pad_x = f.pad_x;
  return cfg;
}

double parse_threshold(const std::string& text) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0')
    throw dpyr::ParamError("cannot parse threshold: \"" + text + "\"");
  if (std::isnan(v)) throw dpyr::ParamError("threshold must not be NaN");
  return v;
}

void write_text(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw dpyr::Error("cannot open for write: " + path);
  out << text;
  if (!out) throw dpyr::Error("write failed: " + path);
}

void print_pyramid_summary(const dpyr::FeaturePyramid& pyr,
                           const std::vector<std::string>& warnings) {
  for (const std::string& w : warnings) std::cout << "warning: " << w << "\n";
  long long total = 0;
  for (size_t l = 0; l < pyr.levels.size(); ++l) {
    const dpyr::FeatureMap& m = pyr.levels[l];
    const int ur = m.rows - 2 * pyr.pad_y;
    const int uc = m.cols - 2 * pyr.pad_x;
    total += static_cast<long long>(ur) * uc;
    std::cout << "level " << l << ": " << m.rows << "x" << m.cols << " cells x"
              << m.channels << "ch, scale " << pyr.scales[l] << "\n";
  }
  std::cout << "stride: " << pyr.stride << ", source: " << pyr.source << "\n";
  std::cout << "total cells: " << total << " (unpadded)\n";
}

int cmd_pyramid(const std::string& input, const PyramidFlags& flags,
                const std::string& out_path) {
  dpyr::FeaturePyramid pyr;
  std::vector<std::string> warnings;
  if (flags.features == "import") {
    pyr = dpyr::import_pyramid(input);
  } else {
    const dpyr::Image img = dpyr::load_image(input);
    auto ext = dpyr::make_extractor(flags.features);
    pyr = dpyr::build_feature_pyramid(img, *ext, to_config(flags),
                                      flags.stride, &warnings);
  }
  print_pyramid_summary(pyr, warnings);
  if (!out_path.empty()) {
    dpyr::export_pyramid(pyr, out_path);
    std::cout << "wrote " << out_path << "\n";
  }
  return 0;
}

int cmd_detect(const std::string& model_path, const std::string& image_path,
               const std::string& pyramid_path, const PyramidFlags& flags,
               const dpyr::NmsPolicy& policy, const std::string& threshold_text,
               int threads, const std::string& out_path,
               const std::string& render_path) {
  const double threshold = parse_threshold(threshold_text);
  std::vector<std::string> warnings;
  const dpyr::DpmModel model = dpyr::load_model(model_path, &warnings);
  for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";

  dpyr::FeaturePyramid pyr;
  dpyr::Image img;
  if (!image_path.empty()) {
    img = dpyr::load_image(image_path);
    // Match the extractor to the model's feature space.
    auto ext = model.feature.kind == dpyr::FeatureKind::hog31
                   ? dpyr::make_extractor("hog31")
                   : dpyr::make_extractor("stub", model.feature.channels);
    pyr = dpyr::build_feature_pyramid(img, *ext, to_config(flags),
                                      model.feature.stride, &warnings);
  } else {
    pyr = dpyr::import_pyramid(pyramid_path);
  }

  const dpyr::PyramidScores scores = dpyr::score_pyramid(pyr, model, threads);
  const dpyr::PyrMeta meta = dpyr::make_meta(pyr);
  std::vector<dpyr::Detection> dets =
      dpyr::extract_detections(scores, meta, model, threshold);
  dets = dpyr::nms(dets, policy);

  write_text(dpyr::detections_document(dets, model.class_name, policy,
                                       threshold),
             out_path);

  if (!render_path.empty()) {
    if (img.empty())
      throw dpyr::ParamError("--render requires an --image input");
    for (const dpyr::Detection& d : dets) {
      for (const dpyr::BBox& pb : d.part_boxes)
        dpyr::draw_box(img, pb, 64, 128, 255, 1);
      dpyr::draw_box(img, d.box, 255, 32, 32, 2);
    }
    dpyr::save_image(img, render_path);
    std::cerr << "rendered " << dets.size() << " detections to "
              << render_path << "\n";
  }
  return 0;
}

int cmd_score(const std::string& model_path, const std::string& pyramid_path,
              int threads, const std::string& out_path) {
  const dpyr::DpmModel model = dpyr::load_model(model_path);
  const dpyr::FeaturePyramid pyr = dpyr::import_pyramid(pyramid_path);
  const dpyr::PyramidScores scores = dpyr::score_pyramid(pyr, model, threads);

  nlohmann::ordered_json doc;
  doc["format"] = "dpyr-scores/1";
  doc["class_name"] = model.class_name;
  nlohmann::ordered_json levels = nlohmann::ordered_json::array();
  for (size_t l = 0; l < scores.levels.size(); ++l) {
    const dpyr::LevelScores& ls = scores.levels[l];
    nlohmann::ordered_json e;
    e["level"] = l;
    e["scale"] = pyr.scales[l];
    e["rows"] = ls.combined.rows;
    e["cols"] = ls.combined.cols;
    nlohmann::ordered_json vals = nlohmann::ordered_json::array();
    nlohmann::ordered_json winners = nlohmann::ordered_json::array();
    for (int y = 0; y < ls.combined.rows; ++y) {
      for (int x = 0; x < ls.combined.cols; ++x) {
        const double v = ls.combined.at(y, x);
        // JSON has no -inf literal; represent undefined scores as null.
        if (std::isinf(v)) vals.push_back(nullptr);
        else vals.push_back(v);
        winners.push_back(ls.winner.at(y, x));
      }
    }
    e["scores"] = std::move(vals);
    e["winner"] = std::move(winners);
    levels.push_back(std::move(e));
  }
  doc["levels"] = std::move(levels);
  write_text(doc.dump(2) + "\n", out_path);
  return 0;
}

int cmd_selftest(std::uint64_t seed, int cases,
                 const std::string& inject_fault) {
  dpyr::selftest::Options opts;
  opts.seed = seed;
  opts.cases = cases;
  opts.inject_fault = inject_fault;
  const std::vector<dpyr::selftest::SuiteResult> results =
      dpyr::selftest::run_all(opts);

  bool all_ok = true;
  for (const dpyr::selftest::SuiteResult& r : results) {
    std::cout << "suite " << r.name << ": " << r.cases << " cases, "
              << r.failures << " failures [" << (r.ok() ? "ok" : "FAIL")
              << "]\n";
    for (const std::string& m : r.messages) std::cout << "    " << m << "\n";
    all_ok = all_ok && r.ok();
  }
  std::cout << (all_ok ? "selftest passed\n" : "selftest FAILED\n");
  return all_ok ? 0 : 1;
}

int cmd_bench(const std::string& op, std::vector<int> sizes, int repeat) {
  using clock = std::chrono::steady_clock;
  dpyr::oracle::Rng rng(7);

  if (sizes.empty()) {
    if (op == "dt1d") sizes = {1 << 16, 1 << 17, 1 << 18, 1 << 19, 1 << 20};
    else if (op == "dt2d") sizes = {64, 128, 256, 512};
    else if (op == "conv") sizes = {32, 64, 128};
    else sizes = {16, 24, 32};  // pipeline: level side in cells
  }

  // Fixed instances per size; only the measured call varies per repeat.
  std::cout << "op " << op << " (" << repeat << " repeats, times in ms)\n";
  std::cout << "size\tbest\tmean\n";
  for (const int n : sizes) {
    std::vector<double> f;
    dpyr::Grid2D grid;
    dpyr::FeatureMap map;
    dpyr::Filter filt;
    dpyr::DpmModel model;
    dpyr::FeaturePyramid pyr;
    if (op == "dt1d") {
      f.resize(static_cast<size_t>(n));
      for (double& v : f) v = rng.uniform(-10.0, 10.0);
    } else if (op == "dt2d") {
      grid = dpyr::oracle::random_grid(rng, n, n);
    } else if (op == "conv") {
      map = dpyr::oracle::random_map(rng, n, n, 31);
      filt = dpyr::Filter(5, 5, 31);
      for (float& w : filt.weights)
        w = static_cast<float>(rng.uniform(-1.0, 1.0));
    } else {  // pipeline
      dpyr::oracle::Rng model_rng(7);
      model = dpyr::oracle::random_model(model_rng, {});
      pyr.levels = {dpyr::oracle::random_map(rng, n, n,
                                             model.feature.channels)};
      pyr.scales = {1.0};
      pyr.stride = model.feature.stride;
    }

    const dpyr::Deformation1D def1{1.0, 0.1};
    const dpyr::Deformation2D def2{{1.0, 0.1}, {1.0, -0.1}};
    double best = 0.0, sum = 0.0;
    for (int r = 0; r < repeat; ++r) {
      const auto t0 = clock::now();
      if (op == "dt1d") {
        volatile double sink = dpyr::dt1d(f, def1).values.back();
        (void)sink;
      } else if (op == "dt2d") {
        volatile double sink = dpyr::dt2d(grid, def2).values.at(n - 1, n - 1);
        (void)sink;
      } else if (op == "conv") {
        volatile double sink =
            dpyr::cross_correlate(map, filt).at(n - 5, n - 5);
        (void)sink;
      } else {
        volatile double sink =
            dpyr::score_pyramid(pyr, model).levels[0].combined.at(0, 0);
        (void)sink;
      }
      const double ms =
          std::chrono::duration<double, std::milli>(clock::now() - t0)
              .count();
      best = r == 0 ? ms : std::min(best, ms);
      sum += ms;
    }
    std::cout << n << "\t" << best << "\t" << sum / repeat << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deformable-part-model inference over feature pyramids"};
  app.require_subcommand(1);

  // --- pyramid ---
  CLI::App* pyr_cmd =
      app.add_subcommand("pyramid", "Build a feature pyramid and write it");
  std::string pyr_input, pyr_out;
  PyramidFlags pyr_flags;
  pyr_cmd->add_option("input", pyr_input,
                      "Image file (or .dpyr file with --features import)")
      ->required()
      ->check(CLI::ExistingFile);
  add_pyramid_flags(pyr_cmd, &pyr_flags, /*with_features=*/true);
  pyr_cmd->add_option("--out", pyr_out, "Output .dpyr path");

  // --- detect ---
  CLI::App* det_cmd = app.add_subcommand("detect", "Detect objects");
  std::string det_model, det_image, det_pyramid, det_out, det_render;
  std::string det_threshold = "0";
  std::string det_nms_kind = "iou";
  double det_nms_threshold = 0.3;
  int det_max = -1;
  int det_threads = 1;
  PyramidFlags det_flags;
  det_cmd->add_option("--model", det_model, "Model document (.json)")
      ->required()
      ->check(CLI::ExistingFile);
  CLI::Option* det_img_opt =
      det_cmd->add_option("--image", det_image, "Input image")
          ->check(CLI::ExistingFile);
  CLI::Option* det_pyr_opt =
      det_cmd->add_option("--pyramid", det_pyramid, "Input .dpyr pyramid")
          ->check(CLI::ExistingFile);
  det_img_opt->excludes(det_pyr_opt);
  add_pyramid_flags(det_cmd, &det_flags, /*with_features=*/false);
  det_cmd->add_option("--threshold", det_threshold,
                      "Score threshold (accepts inf/-inf)")
      ->envname("DPYR_THRESHOLD")
      ->capture_default_str();
  det_cmd->add_option("--nms", det_nms_kind, "NMS overlap measure")
      ->check(CLI::IsMember({"iou", "legacy-dpm"}))
      ->envname("DPYR_NMS")
      ->capture_default_str();
  det_cmd->add_option("--nms-threshold", det_nms_threshold,
                      "Suppress overlap above this (in (0,1))")
      ->envname("DPYR_NMS_THRESHOLD")
      ->capture_default_str();
  det_cmd->add_option("--max-detections", det_max,
                      "Keep at most this many detections (-1: all)")
      ->capture_default_str();
  det_cmd->add_option("--threads", det_threads, "Scoring worker threads")
      ->check(CLI::PositiveNumber)
      ->envname("DPYR_THREADS")
      ->capture_default_str();
  det_cmd->add_option("--out", det_out, "Detections document path (- = stdout)");
  det_cmd->add_option("--render", det_render,
                      "Write the image with boxes drawn");

  // --- score ---
  CLI::App* score_cmd =
      app.add_subcommand("score", "Dump raw score maps for a pyramid file");
  std::string score_model, score_pyr, score_out;
  int score_threads = 1;
  score_cmd->add_option("--model", score_model, "Model document (.json)")
      ->required()
      ->check(CLI::ExistingFile);
  score_cmd->add_option("--pyramid", score_pyr, "Input .dpyr pyramid")
      ->required()
      ->check(CLI::ExistingFile);
  score_cmd->add_option("--threads", score_threads, "Scoring worker threads")
      ->check(CLI::PositiveNumber)
      ->envname("DPYR_THREADS")
      ->capture_default_str();
  score_cmd->add_option("--out", score_out, "Output path (- = stdout)");

  // --- selftest ---
  CLI::App* self_cmd =
      app.add_subcommand("selftest", "Run oracle-equivalence suites");
  std::uint64_t self_seed = 20140612;
  int self_cases = 0;
  std::string self_fault;
  self_cmd->add_option("--seed", self_seed, "Random seed")
      ->envname("DPYR_SEED")
      ->capture_default_str();
  self_cmd->add_option("--cases", self_cases,
                       "Instances per suite (0: per-suite defaults)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  self_cmd->add_option("--inject-fault", self_fault,
                       "Swap in a known-broken implementation")
      ->group("");  // hidden: exists to prove the suites catch faults

  // --- bench ---
  CLI::App* bench_cmd = app.add_subcommand("bench", "Timing tables");
  std::string bench_op = "dt1d";
  std::vector<int> bench_sizes;
  int bench_repeat = 5;
  bench_cmd->add_option("--op", bench_op, "What to time")
      ->check(CLI::IsMember({"dt1d", "dt2d", "conv", "pipeline"}))
      ->capture_default_str();
  bench_cmd->add_option("--sizes", bench_sizes,
                        "Instance sizes (per-op meaning; defaults if empty)")
      ->delimiter(',');
  bench_cmd->add_option("--repeat", bench_repeat, "Repeats per size")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // help/version exit 0; usage errors exit 2
  }

  try {
    if (pyr_cmd->parsed()) return cmd_pyramid(pyr_input, pyr_flags, pyr_out);
    if (det_cmd->parsed()) {
      if (det_image.empty() && det_pyramid.empty())
        throw dpyr::ParamError("detect needs --image or --pyramid");
      dpyr::NmsPolicy policy;
      policy.kind = dpyr::NmsPolicy::kind_from_string(det_nms_kind);
      policy.threshold = det_nms_threshold;
      policy.max_detections = det_max;
      return cmd_detect(det_model, det_image, det_pyramid, det_flags, policy,
                        det_threshold, det_threads, det_out, det_render);
    }
    if (score_cmd->parsed())
      return cmd_score(score_model, score_pyr, score_threads, score_out);
    if (self_cmd->parsed())
      return cmd_selftest(self_seed, self_cases, self_fault);
    if (bench_cmd->parsed())
      return cmd_bench(bench_op, bench_sizes, bench_repeat);
  } catch (const dpyr::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
