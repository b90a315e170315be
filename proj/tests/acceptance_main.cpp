// Acceptance gate: ten end-to-end checks, one PASS/FAIL line each, nonzero
// exit if any fails. argv[1] is the path of the CLI binary, used by the
// determinism check; everything else runs in-process against the library.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dpyr/detect.hpp"
#include "dpyr/dpm_cnn.hpp"
#include "dpyr/dpm_model.hpp"
#include "dpyr/dt_pool.hpp"
#include "dpyr/feature_frontend.hpp"
#include "dpyr/filter_conv.hpp"
#include "dpyr/image.hpp"
#include "dpyr/oracle.hpp"

using namespace dpyr;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool close_abs(double a, double b, double tol) {
  if (std::isinf(a) || std::isinf(b)) return a == b;
  return std::fabs(a - b) <= tol;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// --- criterion 1: distance transforms against the quadratic-scan oracle ----

bool check_dt(std::string& detail) {
  const auto t0 = Clock::now();
  oracle::Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const int n = rng.uniform_int(1, 64);
    std::vector<double> f(n);
    for (double& v : f) v = rng.uniform(-10.0, 10.0);
    const Deformation1D def{rng.uniform(0.01, 10.0), rng.uniform(-5.0, 5.0)};
    const DtResult1D fast = dt1d(f, def);
    const DtResult1D slow = oracle::naive_dt1d(f, def);
    for (int p = 0; p < n; ++p) {
      if (!close_abs(fast.values[p], slow.values[p], 1e-9) ||
          fast.argmax[p] != slow.argmax[p]) {
        detail = "1d instance " + std::to_string(i) + " diverges at p=" +
                 std::to_string(p);
        return false;
      }
    }
  }
  for (int i = 0; i < 500; ++i) {
    const Grid2D g = oracle::random_grid(rng, rng.uniform_int(1, 12),
                                         rng.uniform_int(1, 12));
    const Deformation2D def{{rng.uniform(0.01, 10.0), rng.uniform(-5.0, 5.0)},
                            {rng.uniform(0.01, 10.0), rng.uniform(-5.0, 5.0)}};
    const DtResult2D fast = dt2d(g, def);
    const DtResult2D slow = oracle::naive_dt2d(g, def);
    for (int y = 0; y < g.rows; ++y) {
      for (int x = 0; x < g.cols; ++x) {
        if (!close_abs(fast.values.at(y, x), slow.values.at(y, x), 1e-9) ||
            fast.argmax_y.at(y, x) != slow.argmax_y.at(y, x) ||
            fast.argmax_x.at(y, x) != slow.argmax_x.at(y, x)) {
          detail = "2d instance " + std::to_string(i) + " diverges at (" +
                   std::to_string(y) + "," + std::to_string(x) + ")";
          return false;
        }
      }
    }
  }
  const double dt = seconds_since(t0);
  if (dt >= 10.0) {
    detail = "took " + fmt(dt) + " s (limit 10)";
    return false;
  }
  detail = "1000 1d + 500 2d instances, " + fmt(dt) + " s";
  return true;
}

// --- criterion 2: max pooling as the box-penalty distance transform --------

bool check_pooling(std::string& detail) {
  oracle::Rng rng(22);
  for (int i = 0; i < 500; ++i) {
    const int n = rng.uniform_int(1, 48);
    std::vector<double> f(n);
    for (double& v : f) v = rng.uniform(-10.0, 10.0);
    const int k = rng.uniform_int(0, 8);
    const std::vector<double> pooled = max_pool_1d(f, k);
    for (int p = 0; p < n; ++p) {
      // max over q of f(q) - d_max(p-q), d_max zero on {-k..k}, infinite
      // beyond: out-of-window sources simply cannot win.
      double want = kNegInf;
      for (int q = 0; q < n; ++q) {
        if (std::abs(p - q) <= k && f[q] > want) want = f[q];
      }
      if (pooled[p] != want) {
        detail = "pool instance " + std::to_string(i) + " at p=" +
                 std::to_string(p);
        return false;
      }
    }
  }
  oracle::Rng rng2(23);
  for (int i = 0; i < 100; ++i) {
    const FeatureMap m =
        oracle::random_map(rng2, rng2.uniform_int(1, 12),
                           rng2.uniform_int(1, 12), rng2.uniform_int(1, 4));
    const FeatureMap got = max_filter_2d(m, 1, 1);
    for (int y = 0; y < m.rows; ++y) {
      for (int x = 0; x < m.cols; ++x) {
        for (int c = 0; c < m.channels; ++c) {
          float want = -std::numeric_limits<float>::infinity();
          for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
              const int yy = y + dy, xx = x + dx;
              if (yy < 0 || yy >= m.rows || xx < 0 || xx >= m.cols) continue;
              want = std::max(want, m.at(yy, xx, c));
            }
          }
          if (got.at(y, x, c) != want) {
            detail = "filter instance " + std::to_string(i);
            return false;
          }
        }
      }
    }
  }
  detail = "500 pools + 100 3x3 filters, exact";
  return true;
}

// --- criterion 3: component scoring against the per-window oracle ----------

bool check_pipeline(std::string& detail) {
  const auto t0 = Clock::now();
  oracle::Rng rng(33);
  const oracle::ModelLimits limits;
  for (int i = 0; i < 100; ++i) {
    const DpmModel model = oracle::random_model(rng, limits);
    const FeatureMap level =
        oracle::random_map(rng, rng.uniform_int(5, 12), rng.uniform_int(5, 12),
                           model.feature.channels);
    std::vector<ComponentScore> scored;
    for (const Component& comp : model.components) {
      if (!component_fits(level, comp)) {
        scored.emplace_back();
        continue;
      }
      const ComponentScore cs = score_component(level, comp);
      for (int y = 0; y < cs.scores.rows; ++y) {
        for (int x = 0; x < cs.scores.cols; ++x) {
          const double want = oracle::naive_window_score(level, comp, y, x);
          if (!close_abs(cs.scores.at(y, x), want, 1e-6)) {
            detail = "instance " + std::to_string(i) + " cell (" +
                     std::to_string(y) + "," + std::to_string(x) + "): " +
                     fmt(cs.scores.at(y, x)) + " vs " + fmt(want);
            return false;
          }
        }
      }
      scored.push_back(cs);
    }
    Grid2D combined;
    IndexGrid winner;
    maxout_combine(scored, combined, winner);
    for (int y = 0; y < combined.rows; ++y) {
      for (int x = 0; x < combined.cols; ++x) {
        double best = kNegInf;
        int who = 0;
        for (size_t c = 0; c < scored.size(); ++c) {
          const Grid2D& s = scored[c].scores;
          const double v = (y < s.rows && x < s.cols) ? s.at(y, x) : kNegInf;
          if (v > best) {
            best = v;
            who = static_cast<int>(c);
          }
        }
        if (combined.at(y, x) != best ||
            (std::isfinite(best) && winner.at(y, x) != who)) {
          detail = "maxout disagrees on instance " + std::to_string(i);
          return false;
        }
      }
    }
  }
  const double dt = seconds_since(t0);
  if (dt >= 60.0) {
    detail = "took " + fmt(dt) + " s (limit 60)";
    return false;
  }
  detail = "100 model/level pairs, " + fmt(dt) + " s";
  return true;
}

// --- criterion 4: gather equals the dense sparse-one correlation -----------

bool check_gather(std::string& detail) {
  oracle::Rng rng(44);
  for (int i = 0; i < 100; ++i) {
    const int rows = rng.uniform_int(2, 10);
    const int cols = rng.uniform_int(2, 10);
    const Grid2D root = oracle::random_grid(rng, rows, cols);
    std::vector<Grid2D> parts;
    std::vector<Anchor> anchors;
    const int nparts = rng.uniform_int(0, 4);
    for (int p = 0; p < nparts; ++p) {
      parts.push_back(oracle::random_grid(rng, rows, cols));
      anchors.push_back(
          {rng.uniform_int(0, cols - 1), rng.uniform_int(0, rows - 1)});
    }
    const double bias = rng.uniform(-3.0, 3.0);
    const Grid2D fast = geometry_gather(root, parts, anchors, bias);
    const Grid2D dense =
        oracle::dense_geometry_score(root, parts, anchors, bias);
    if (fast.rows != dense.rows || fast.cols != dense.cols) {
      detail = "shape mismatch on instance " + std::to_string(i);
      return false;
    }
    for (size_t k = 0; k < fast.data.size(); ++k) {
      if (!close_abs(fast.data[k], dense.data[k], 1e-9)) {
        detail = "instance " + std::to_string(i) + " cell " + std::to_string(k);
        return false;
      }
    }
  }
  detail = "100 instances vs the dense filter";
  return true;
}

// --- criterion 5: pyramid geometry on the square reference input -----------

bool check_pyramid_geometry(std::string& detail) {
  Image img(1713, 1713);
  for (int y = 0; y < img.rows; ++y) {
    for (int x = 0; x < img.cols; ++x) {
      img.at(y, x, 0) = static_cast<std::uint8_t>((x * 7 + y * 13) & 0xff);
      img.at(y, x, 1) = static_cast<std::uint8_t>(x & 0xff);
      img.at(y, x, 2) = static_cast<std::uint8_t>(y & 0xff);
    }
  }
  const FeaturePyramid pyr =
      build_feature_pyramid(img, StubExtractor(8), {1713, 7, 2, 0, 0}, 16);
  if (pyr.levels.size() != 7) {
    detail = "expected 7 levels, got " + std::to_string(pyr.levels.size());
    return false;
  }
  const int longest = std::max(pyr.levels[0].rows, pyr.levels[0].cols);
  if (longest != 108) {
    detail = "level-0 longest side " + std::to_string(longest) + ", want 108";
    return false;
  }
  long long total = 0;
  for (const FeatureMap& m : pyr.levels) {
    total += static_cast<long long>(m.rows) * m.cols;
  }
  if (total < 22000 || total > 26000) {
    detail = "total cells " + std::to_string(total) + " outside [22000, 26000]";
    return false;
  }
  if (pyr.scales[6] != pyr.scales[0] / 8.0) {
    detail = "scale 6 is not exactly scale0/8";
    return false;
  }
  detail = "108-cell level 0, " + std::to_string(total) +
           " total cells, three exact octaves";
  return true;
}

// --- criterion 6: distance-transform complexity -----------------------------

double time_best_of(int repeats, const std::vector<double>& f,
                    const Deformation1D& def) {
  double best = 1e30;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = Clock::now();
    const DtResult1D res = dt1d(f, def);
    const double dt = seconds_since(t0);
    if (res.values[0] > 1e300) std::abort();  // keep the result alive
    best = std::min(best, dt);
  }
  return best;
}

bool check_complexity(std::string& detail) {
  oracle::Rng rng(66);
  const Deformation1D def{0.5, 1.0};
  std::vector<double> big(1 << 20);
  for (double& v : big) v = rng.uniform(-10.0, 10.0);
  const std::vector<double> half(big.begin(), big.begin() + (1 << 19));

  const double t_full = time_best_of(5, big, def);
  const double t_half = time_best_of(5, half, def);
  const double ratio = t_full / t_half;
  if (ratio > 3.0) {
    detail = "2^20 vs 2^19 ratio " + fmt(ratio) + " exceeds 3";
    return false;
  }

  const std::vector<double> mid(big.begin(), big.begin() + 8192);
  const double t_fast = time_best_of(5, mid, def);
  const auto t0 = Clock::now();
  const DtResult1D slow = oracle::naive_dt1d(mid, def);
  const double t_slow = seconds_since(t0);
  if (slow.values[0] > 1e300) std::abort();
  const double speedup = t_slow / t_fast;
  if (speedup < 20.0) {
    detail = "naive/fast speedup " + fmt(speedup) + " below 20";
    return false;
  }
  detail = "doubling ratio " + fmt(ratio) + ", speedup " + fmt(speedup) +
           "x at n=8192";
  return true;
}

// --- criterion 7: NMS invariants --------------------------------------------

bool check_nms(std::string& detail) {
  oracle::Rng rng(77);
  for (int i = 0; i < 200; ++i) {
    std::vector<Detection> dets;
    const int n = rng.uniform_int(0, 50);
    for (int d = 0; d < n; ++d) {
      Detection det;
      const int x1 = rng.uniform_int(0, 80);
      const int y1 = rng.uniform_int(0, 80);
      det.box = {x1, y1, x1 + rng.uniform_int(0, 40),
                 y1 + rng.uniform_int(0, 40)};
      det.score = rng.uniform(-5.0, 5.0);
      dets.push_back(det);
    }
    for (const auto kind :
         {NmsPolicy::Kind::iou, NmsPolicy::Kind::legacy_dpm}) {
      const NmsPolicy policy{kind, 0.3, -1};
      const std::vector<Detection> kept = nms(dets, policy);
      for (size_t a = 0; a < kept.size(); ++a) {
        if (a + 1 < kept.size() && kept[a].score < kept[a + 1].score) {
          detail = "set " + std::to_string(i) + ": scores not descending";
          return false;
        }
        bool found = false;
        for (const Detection& d : dets) {
          found = found ||
                  (d.box == kept[a].box && d.score == kept[a].score);
        }
        if (!found) {
          detail = "set " + std::to_string(i) + ": output not a subset";
          return false;
        }
        for (size_t b = a + 1; b < kept.size(); ++b) {
          const double ov =
              kind == NmsPolicy::Kind::iou
                  ? iou(kept[a].box, kept[b].box)
                  : static_cast<double>(
                        intersection_area(kept[a].box, kept[b].box)) /
                        static_cast<double>(kept[b].box.area());
          if (ov > policy.threshold) {
            detail = "set " + std::to_string(i) + ": survivors overlap " +
                     fmt(ov);
            return false;
          }
        }
      }
      const std::vector<Detection> again = nms(kept, policy);
      if (again.size() != kept.size()) {
        detail = "set " + std::to_string(i) + ": not idempotent";
        return false;
      }
      for (size_t a = 0; a < kept.size(); ++a) {
        if (!(again[a].box == kept[a].box) || again[a].score != kept[a].score) {
          detail = "set " + std::to_string(i) + ": not idempotent";
          return false;
        }
      }
    }
  }
  detail = "200 sets, both overlap measures";
  return true;
}

// --- criterion 8: HOG feature properties ------------------------------------

bool check_hog(std::string& detail) {
  const FeatureMap flat = hog31(Image(64, 64, 113), 8);
  if (flat.rows != 6 || flat.cols != 6 || flat.channels != 31) {
    detail = "64x64/cell 8 gave " + std::to_string(flat.rows) + "x" +
             std::to_string(flat.cols) + "x" + std::to_string(flat.channels);
    return false;
  }
  for (float v : flat.data) {
    if (v != 0.0f) {
      detail = "constant image produced a nonzero feature";
      return false;
    }
  }

  oracle::Rng rng(88);
  Image img(56, 48);
  for (auto& v : img.data) {
    v = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
  }
  const FeatureMap fast = hog31(img, 8);
  const oracle::HogReference ref = oracle::hog31_reference(img, 8);

  // Every normalized histogram channel respects the 0.2 clip.
  for (int y = 0; y < fast.rows; ++y) {
    for (int x = 0; x < fast.cols; ++x) {
      for (int c = 0; c < 27; ++c) {
        if (fast.at(y, x, c) < 0.0f || fast.at(y, x, c) > 0.2f + 1e-6f) {
          detail = "channel " + std::to_string(c) + " escapes the 0.2 clip";
          return false;
        }
      }
    }
  }

  // Insensitive channels are the folded sensitive pairs: rebuild them from
  // the reference histograms alone (fold, energy, 4 block norms, clip) and
  // demand the production features match.
  const int crows = ref.cell_rows, ccols = ref.cell_cols;
  std::vector<double> energy(static_cast<size_t>(crows) * ccols, 0.0);
  for (int cy = 0; cy < crows; ++cy) {
    for (int cx = 0; cx < ccols; ++cx) {
      double e = 0.0;
      for (int o = 0; o < 9; ++o) {
        const double s = ref.hist_at(cy, cx, o) + ref.hist_at(cy, cx, o + 9);
        e += s * s;
      }
      energy[static_cast<size_t>(cy) * ccols + cx] = e;
    }
  }
  auto block = [&](int y0, int x0) {
    auto at = [&](int y, int x) {
      return energy[static_cast<size_t>(y) * ccols + x];
    };
    return at(y0, x0) + at(y0, x0 + 1) + at(y0 + 1, x0) + at(y0 + 1, x0 + 1);
  };
  for (int oy = 0; oy < fast.rows; ++oy) {
    for (int ox = 0; ox < fast.cols; ++ox) {
      const int cy = oy + 1, cx = ox + 1;
      const double norms[4] = {1.0 / std::sqrt(block(cy - 1, cx - 1) + 1e-4),
                               1.0 / std::sqrt(block(cy - 1, cx) + 1e-4),
                               1.0 / std::sqrt(block(cy, cx - 1) + 1e-4),
                               1.0 / std::sqrt(block(cy, cx) + 1e-4)};
      for (int o = 0; o < 9; ++o) {
        const double folded =
            ref.hist_at(cy, cx, o) + ref.hist_at(cy, cx, o + 9);
        double acc = 0.0;
        for (const double nrm : norms) acc += std::min(folded * nrm, 0.2);
        if (std::fabs(fast.at(oy, ox, 18 + o) - 0.25 * acc) > 1e-6) {
          detail = "insensitive channel " + std::to_string(o) +
                   " is not the folded pair at (" + std::to_string(oy) + "," +
                   std::to_string(ox) + ")";
          return false;
        }
      }
    }
  }

  // And the full 31-channel map agrees with the step-by-step transcription.
  for (size_t k = 0; k < fast.data.size(); ++k) {
    if (std::fabs(fast.data[k] - ref.features.data[k]) > 1e-6f) {
      detail = "feature " + std::to_string(k) + " differs from the reference";
      return false;
    }
  }
  detail = "dims, zeros, clip bound, fold identity, reference agreement";
  return true;
}

// --- criterion 9: serialization round-trips and corruption rejection --------

bool check_formats(std::string& detail) {
  namespace fs = std::filesystem;
  const fs::path dir =
      fs::temp_directory_path() / ("dpyr_accept9_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  struct Cleanup {
    fs::path d;
    ~Cleanup() {
      std::error_code ec;
      fs::remove_all(d, ec);
    }
  } cleanup{dir};

  oracle::Rng rng(99);
  const DpmModel model = oracle::random_model(rng, {});
  const std::string mpath = (dir / "m.json").string();
  save_model(model, mpath);
  const DpmModel back = load_model(mpath);
  if (back.components.size() != model.components.size()) {
    detail = "model round-trip changed the component count";
    return false;
  }
  for (size_t c = 0; c < model.components.size(); ++c) {
    const auto& a = model.components[c].root.weights;
    const auto& b = back.components[c].root.weights;
    if (a.size() != b.size() ||
        std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) != 0) {
      detail = "model round-trip lost weight bits";
      return false;
    }
  }

  Image img(40, 40);
  for (auto& v : img.data) v = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
  const FeaturePyramid pyr =
      build_feature_pyramid(img, StubExtractor(3), {40, 2, 2, 0, 0}, 8);
  const std::string ppath = (dir / "p.dpyr").string();
  export_pyramid(pyr, ppath);
  const FeaturePyramid pback = import_pyramid(ppath);
  if (pback.scales != pyr.scales || pback.levels.size() != pyr.levels.size() ||
      pback.levels[0].data != pyr.levels[0].data ||
      pback.levels[1].data != pyr.levels[1].data) {
    detail = "pyramid round-trip is not bit-identical";
    return false;
  }

  std::ifstream in(ppath, std::ios::binary);
  const std::string good(std::istreambuf_iterator<char>(in), {});
  in.close();
  auto rewrite = [&](const std::string& bytes) {
    std::ofstream out(ppath, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  };
  auto expect_format_error = [&](const std::string& bytes, const char* what,
                                 const char* needle) {
    rewrite(bytes);
    try {
      import_pyramid(ppath);
    } catch (const FormatError& e) {
      if (std::string(e.what()).find(needle) == std::string::npos) {
        detail = std::string(what) + ": message lacks \"" + needle + "\"";
        return false;
      }
      return true;
    } catch (...) {
      detail = std::string(what) + ": wrong exception type";
      return false;
    }
    detail = std::string(what) + ": accepted corrupt input";
    return false;
  };

  std::string bad_magic = good;
  bad_magic[1] = 'X';
  if (!expect_format_error(bad_magic, "bad magic", "magic")) return false;
  if (!expect_format_error(good.substr(0, good.size() - 7), "truncation",
                           "truncated"))
    return false;
  std::string bad_scales = good;
  const size_t level1_off = 24 + 20 +
                            static_cast<size_t>(pyr.levels[0].rows) *
                                pyr.levels[0].cols * pyr.levels[0].channels * 4;
  for (int i = 0; i < 8; ++i) bad_scales[level1_off + i] = good[24 + i];
  if (!expect_format_error(bad_scales, "scale order", "non-monotone"))
    return false;

  detail = "model + pyramid round-trips, 3 corruptions rejected";
  return true;
}

// --- criterion 10: end-to-end CLI determinism across thread hints ----------

bool check_cli_determinism(const std::string& cli, std::string& detail) {
  if (cli.empty()) {
    detail = "no CLI binary path on the command line";
    return false;
  }
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() /
                       ("dpyr_accept10_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  struct Cleanup {
    fs::path d;
    ~Cleanup() {
      std::error_code ec;
      fs::remove_all(d, ec);
    }
  } cleanup{dir};

  oracle::Rng rng(1010);
  DpmModel model = oracle::random_model(rng, {});
  const std::string mpath = (dir / "model.json").string();
  save_model(model, mpath);

  Image img(96, 128);
  for (auto& v : img.data) {
    v = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
  }
  const FeaturePyramid pyr = build_feature_pyramid(
      img, StubExtractor(model.feature.channels),
      {128, 5, 2, 2, 2}, model.feature.stride);
  const std::string ppath = (dir / "features.dpyr").string();
  export_pyramid(pyr, ppath);

  auto run = [&](int threads, const std::string& out) {
    const std::string cmd = cli + " detect --model " + mpath + " --pyramid " +
                            ppath + " --threshold -5 --threads " +
                            std::to_string(threads) + " --out " + out +
                            " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  };
  const std::string out1 = (dir / "t1.json").string();
  const std::string out8 = (dir / "t8.json").string();
  if (run(1, out1) != 0 || run(8, out8) != 0) {
    detail = "detect run failed";
    return false;
  }
  std::ifstream a(out1, std::ios::binary), b(out8, std::ios::binary);
  const std::string da(std::istreambuf_iterator<char>(a), {});
  const std::string db(std::istreambuf_iterator<char>(b), {});
  if (da.empty() || da != db) {
    detail = "outputs differ between thread hints 1 and 8";
    return false;
  }
  detail = "byte-identical documents (" + std::to_string(da.size()) +
           " bytes) at thread hints 1 and 8";
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  int failures = 0;
  const auto report = [&failures](int n, const char* name, bool ok,
                                  const std::string& detail) {
    std::printf("%s criterion %d: %s%s%s\n", ok ? "PASS" : "FAIL", n, name,
                detail.empty() ? "" : " — ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  };
  const auto guard = [&report](int n, const char* name, auto&& fn) {
    std::string detail;
    bool ok = false;
    try {
      ok = fn(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    report(n, name, ok, detail);
  };

  guard(1, "distance transforms match the quadratic-scan oracle", check_dt);
  guard(2, "max pooling and the 3x3 max filter are exact window maxima",
        check_pooling);
  guard(3, "component scores match the per-window oracle", check_pipeline);
  guard(4, "geometry gather equals the dense sparse-one correlation",
        check_gather);
  guard(5, "pyramid geometry on a square 1713 px input", check_pyramid_geometry);
  guard(6, "distance-transform time scales linearly", check_complexity);
  guard(7, "non-maximum suppression invariants", check_nms);
  guard(8, "HOG feature properties", check_hog);
  guard(9, "format round-trips and corruption rejection", check_formats);
  guard(10, "detect output is identical across thread hints",
        [&cli](std::string& detail) { return check_cli_determinism(cli, detail); });

  if (failures != 0) {
    std::printf("%d of 10 criteria failed\n", failures);
    return 1;
  }
  std::printf("all 10 criteria passed\n");
  return 0;
}
