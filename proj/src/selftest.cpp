#include "dpyr/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "dpyr/detect.hpp"
#include "dpyr/dpm_cnn.hpp"
#include "dpyr/dpm_model.hpp"
#include "dpyr/dt_pool.hpp"
#include "dpyr/feature_frontend.hpp"
#include "dpyr/oracle.hpp"

namespace dpyr::selftest {

namespace {

using oracle::Rng;

/// Accumulates failures for one suite, keeping only the first few messages.
class Recorder {
 public:
  explicit Recorder(std::string name) { result_.name = std::move(name); }

  void expect(bool ok, const std::function<std::string()>& describe) {
    if (ok) return;
    ++result_.failures;
    if (result_.messages.size() < 5) result_.messages.push_back(describe());
  }

  void case_done() { ++result_.cases; }

  SuiteResult take() { return std::move(result_); }

 private:
  SuiteResult result_;
};

bool close(double a, double b, double tol) {
  if (std::isinf(a) || std::isinf(b)) return a == b;
  return std::abs(a - b) <= tol;
}

// ---------------------------------------------------------------------------
// Deliberately broken dt1d used only for fault injection: the envelope
// intersection formula has a sign error (rho_u + rho_q flipped to a
// difference), which misplaces domain boundaries.
DtResult1D faulty_dt1d(std::span<const double> f, const Deformation1D& def) {
  const int n = static_cast<int>(f.size());
  DtResult1D out;
  out.values.resize(f.size());
  out.argmax.resize(f.size());
  std::vector<int> v(f.size());
  std::vector<double> z(f.size() + 1);
  const double inf = std::numeric_limits<double>::infinity();
  const double shift = def.b / (2.0 * def.a);

  int k = 0;
  v[0] = 0;
  z[0] = -inf;
  z[1] = inf;
  for (int q = 1; q < n; ++q) {
    const double rho_q = q - shift;
    double s;
    for (;;) {
      const int u = v[static_cast<size_t>(k)];
      const double rho_u = u - shift;
      s = 0.5 * ((f[static_cast<size_t>(u)] - f[static_cast<size_t>(q)]) /
                     (def.a * (rho_q - rho_u)) +
                 rho_u - rho_q);  // wrong: must be rho_u + rho_q
      if (s < z[static_cast<size_t>(k)]) {
        --k;
        continue;
      }
      break;
    }
    ++k;
    v[static_cast<size_t>(k)] = q;
    z[static_cast<size_t>(k)] = s;
    z[static_cast<size_t>(k) + 1] = inf;
  }

  k = 0;
  for (int p = 0; p < n; ++p) {
    while (z[static_cast<size_t>(k) + 1] < p) ++k;
    const int best = v[static_cast<size_t>(k)];
    const double r = p - best;
    out.argmax[static_cast<size_t>(p)] = best;
    out.values[static_cast<size_t>(p)] =
        f[static_cast<size_t>(best)] - (def.a * r * r + def.b * r);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Suites

SuiteResult suite_dt1d(const Options& opts) {
  Recorder rec("dt1d");
  Rng rng(opts.seed);
  const int cases = opts.cases > 0 ? opts.cases : 1000;
  const bool faulty = opts.inject_fault == "dt-intersection";
  for (int i = 0; i < cases; ++i) {
    const int n = rng.uniform_int(1, 64);
    std::vector<double> f(static_cast<size_t>(n));
    for (double& v : f) v = rng.uniform(-10.0, 10.0);
    Deformation1D def{rng.uniform(0.01, 10.0), rng.uniform(-5.0, 5.0)};

    const DtResult1D fast = faulty ? faulty_dt1d(f, def) : dt1d(f, def);
    const DtResult1D ref = oracle::naive_dt1d(f, def);
    for (int p = 0; p < n; ++p) {
      rec.expect(close(fast.values[p], ref.values[p], 1e-9), [&] {
        std::ostringstream os;
        os << "case " << i << " p=" << p << ": value " << fast.values[p]
           << " vs oracle " << ref.values[p];
        return os.str();
      });
      rec.expect(fast.argmax[p] == ref.argmax[p], [&] {
        std::ostringstream os;
        os << "case " << i << " p=" << p << ": argmax " << fast.argmax[p]
           << " vs oracle " << ref.argmax[p];
        return os.str();
      });
    }
    rec.case_done();
  }
  return rec.take();
}

SuiteResult suite_dt2d(const Options& opts) {
  Recorder rec("dt2d");
  Rng rng(opts.seed + 1);
  const int cases = opts.cases > 0 ? opts.cases : 500;
  for (int i = 0; i < cases; ++i) {
    const int rows = rng.uniform_int(1, 12);
    const int cols = rng.uniform_int(1, 12);
    const Grid2D g = oracle::random_grid(rng, rows, cols);
    Deformation2D def{{rng.uniform(0.01, 10.0), rng.uniform(-5.0, 5.0)},
                      {rng.uniform(0.01, 10.0), rng.uniform(-5.0, 5.0)}};

    const DtResult2D fast = dt2d(g, def);
    const DtResult2D ref = oracle::naive_dt2d(g, def);
    for (int y = 0; y < rows; ++y) {
      for (int x = 0; x < cols; ++x) {
        rec.expect(close(fast.values.at(y, x), ref.values.at(y, x), 1e-9),
                   [&] {
                     std::ostringstream os;
                     os << "case " << i << " (" << y << "," << x
                        << "): value " << fast.values.at(y, x)
                        << " vs oracle " << ref.values.at(y, x);
                     return os.str();
                   });
        rec.expect(fast.argmax_y.at(y, x) == ref.argmax_y.at(y, x) &&
                       fast.argmax_x.at(y, x) == ref.argmax_x.at(y, x),
                   [&] {
                     std::ostringstream os;
                     os << "case " << i << " (" << y << "," << x
                        << "): argmax (" << fast.argmax_y.at(y, x) << ","
                        << fast.argmax_x.at(y, x) << ") vs oracle ("
                        << ref.argmax_y.at(y, x) << ","
                        << ref.argmax_x.at(y, x) << ")";
                     return os.str();
                   });
      }
    }
    rec.case_done();
  }
  return rec.take();
}

SuiteResult suite_maxpool(const Options& opts) {
  Recorder rec("maxpool");
  Rng rng(opts.seed + 2);
  const int cases = opts.cases > 0 ? opts.cases : 500;
  for (int i = 0; i < cases; ++i) {
    const int n = rng.uniform_int(1, 64);
    const int k = rng.uniform_int(0, 8);
    std::vector<double> f(static_cast<size_t>(n));
    for (double& v : f) v = rng.uniform(-10.0, 10.0);

    const std::vector<double> fast = max_pool_1d(f, k);
    const std::vector<double> ref = oracle::naive_max_pool_1d(f, k);
    rec.expect(fast == ref, [&] {
      return "case " + std::to_string(i) + ": window max differs (n=" +
             std::to_string(n) + ", k=" + std::to_string(k) + ")";
    });
    rec.case_done();
  }
  return rec.take();
}

SuiteResult suite_maxfilter(const Options& opts) {
  Recorder rec("maxfilter");
  Rng rng(opts.seed + 3);
  const int cases = opts.cases > 0 ? opts.cases : 100;
  for (int i = 0; i < cases; ++i) {
    const int rows = rng.uniform_int(1, 9);
    const int cols = rng.uniform_int(1, 9);
    const int channels = rng.uniform_int(1, 3);
    const int k = rng.uniform_int(0, 2);
    const int stride = rng.uniform_int(1, 3);
    const FeatureMap m = oracle::random_map(rng, rows, cols, channels);

    const FeatureMap fast = max_filter_2d(m, k, stride);
    const FeatureMap ref = oracle::naive_max_filter_2d(m, k, stride);
    rec.expect(fast.rows == ref.rows && fast.cols == ref.cols &&
                   fast.data == ref.data,
               [&] {
                 return "case " + std::to_string(i) +
                        ": windowed max differs (k=" + std::to_string(k) +
                        ", stride=" + std::to_string(stride) + ")";
               });
    rec.case_done();
  }
  return rec.take();
}

SuiteResult suite_geometry(const Options& opts) {
  Recorder rec("geometry");
  Rng rng(opts.seed + 4);
  const int cases = opts.cases > 0 ? opts.cases : 100;
  for (int i = 0; i < cases; ++i) {
    const int rows = rng.uniform_int(3, 10);
    const int cols = rng.uniform_int(3, 10);
    const int num_parts = rng.uniform_int(0, 4);
    const Grid2D root = oracle::random_grid(rng, rows, cols);
    std::vector<Grid2D> parts;
    std::vector<Anchor> anchors;
    for (int p = 0; p < num_parts; ++p) {
      parts.push_back(oracle::random_grid(rng, rows, cols));
      anchors.push_back({rng.uniform_int(0, 2), rng.uniform_int(0, 2)});
    }
    const double bias = rng.uniform(-1.0, 1.0);

    const Grid2D fast = geometry_gather(root, parts, anchors, bias);
    const Grid2D ref = oracle::dense_geometry_score(root, parts, anchors, bias);
    for (int y = 0; y < rows; ++y) {
      for (int x = 0; x < cols; ++x) {
        rec.expect(close(fast.at(y, x), ref.at(y, x), 1e-9), [&] {
          std::ostringstream os;
          os << "case " << i << " (" << y << "," << x << "): gather "
             << fast.at(y, x) << " vs dense filter " << ref.at(y, x);
          return os.str();
        });
      }
    }
    rec.case_done();
  }
  return rec.take();
}

SuiteResult suite_pipeline(const Options& opts) {
  Recorder rec("pipeline");
  Rng rng(opts.seed + 5);
  const int cases = opts.cases > 0 ? opts.cases : 100;
  oracle::ModelLimits limits;
  for (int i = 0; i < cases; ++i) {
    const DpmModel model = oracle::random_model(rng, limits);
    const int rows = rng.uniform_int(5, 12);
    const int cols = rng.uniform_int(5, 12);
    const FeatureMap level =
        oracle::random_map(rng, rows, cols, model.feature.channels);

    for (size_t c = 0; c < model.components.size(); ++c) {
      const Component& comp = model.components[c];
      if (!component_fits(level, comp)) continue;
      const ComponentScore cs = score_component(level, comp);
      for (int y = 0; y < cs.scores.rows; ++y) {
        for (int x = 0; x < cs.scores.cols; ++x) {
          const double ref = oracle::naive_window_score(level, comp, y, x);
          rec.expect(close(cs.scores.at(y, x), ref, 1e-6), [&] {
            std::ostringstream os;
            os << "case " << i << " comp " << c << " (" << y << "," << x
               << "): score " << cs.scores.at(y, x) << " vs oracle " << ref;
            return os.str();
          });
        }
      }
    }

    // Maxout vs the element-wise max oracle, including the winner rule.
    std::vector<ComponentScore> per_component;
    for (const Component& comp : model.components)
      per_component.push_back(score_component(level, comp));
    Grid2D combined;
    IndexGrid winner;
    maxout_combine(per_component, combined, winner);
    for (int y = 0; y < combined.rows; ++y) {
      for (int x = 0; x < combined.cols; ++x) {
        double best = kNegInf;
        int best_c = 0;
        for (size_t c = 0; c < per_component.size(); ++c) {
          const Grid2D& s = per_component[c].scores;
          const double v =
              (y < s.rows && x < s.cols) ? s.at(y, x) : kNegInf;
          if (v > best) {
            best = v;
            best_c = static_cast<int>(c);
          }
        }
        rec.expect(combined.at(y, x) == best &&
                       winner.at(y, x) == best_c,
                   [&] {
                     std::ostringstream os;
                     os << "case " << i << " maxout (" << y << "," << x
                        << "): got (" << combined.at(y, x) << ","
                        << winner.at(y, x) << ") want (" << best << ","
                        << best_c << ")";
                     return os.str();
                   });
      }
    }
    rec.case_done();
  }
  return rec.take();
}

SuiteResult suite_nms(const Options& opts) {
  Recorder rec("nms");
  Rng rng(opts.seed + 6);
  const int cases = opts.cases > 0 ? opts.cases : 200;
  for (int i = 0; i < cases; ++i) {
    std::vector<Detection> dets(static_cast<size_t>(rng.uniform_int(1, 30)));
    for (Detection& d : dets) {
      d.box.x1 = rng.uniform_int(0, 50);
      d.box.y1 = rng.uniform_int(0, 50);
      d.box.x2 = d.box.x1 + rng.uniform_int(1, 30);
      d.box.y2 = d.box.y1 + rng.uniform_int(1, 30);
      d.score = rng.uniform(-5.0, 5.0);
    }

    for (const NmsPolicy::Kind kind :
         {NmsPolicy::Kind::iou, NmsPolicy::Kind::legacy_dpm}) {
      NmsPolicy policy;
      policy.kind = kind;
      policy.threshold = 0.3;
      const std::vector<Detection> kept = nms(dets, policy);
      const char* kname = NmsPolicy::kind_to_string(kind);

      for (size_t j = 1; j < kept.size(); ++j)
        rec.expect(kept[j - 1].score >= kept[j].score, [&] {
          return std::string("case ") + std::to_string(i) + " " + kname +
                 ": scores not descending";
        });
      for (size_t j = 0; j < kept.size(); ++j) {
        for (size_t k = j + 1; k < kept.size(); ++k) {
          const double ov =
              kind == NmsPolicy::Kind::iou
                  ? iou(kept[j].box, kept[k].box)
                  : static_cast<double>(
                        intersection_area(kept[j].box, kept[k].box)) /
                        kept[k].box.area();
          rec.expect(ov <= policy.threshold, [&] {
            return std::string("case ") + std::to_string(i) + " " + kname +
                   ": surviving pair overlaps " + std::to_string(ov);
          });
        }
      }
      for (const Detection& d : kept) {
        const bool found = std::any_of(
            dets.begin(), dets.end(), [&](const Detection& in) {
              return in.box == d.box && in.score == d.score;
            });
        rec.expect(found, [&] {
          return std::string("case ") + std::to_string(i) + " " + kname +
                 ": output not a subset of input";
        });
      }
      const std::vector<Detection> twice = nms(kept, policy);
      bool same = twice.size() == kept.size();
      for (size_t j = 0; same && j < kept.size(); ++j)
        same = twice[j].box == kept[j].box && twice[j].score == kept[j].score;
      rec.expect(same, [&] {
        return std::string("case ") + std::to_string(i) + " " + kname +
               ": not idempotent";
      });
    }
    rec.case_done();
  }
  return rec.take();
}

SuiteResult suite_hog(const Options& opts) {
  Recorder rec("hog");
  Rng rng(opts.seed + 7);
  const int cases = opts.cases > 0 ? opts.cases : 8;
  for (int i = 0; i < cases; ++i) {
    const int cell = 8;
    const int rows = rng.uniform_int(3 * cell, 6 * cell);
    const int cols = rng.uniform_int(3 * cell, 6 * cell);
    Image img(rows, cols);
    for (std::uint8_t& v : img.data)
      v = static_cast<std::uint8_t>(rng.uniform_int(0, 255));

    const FeatureMap fast = hog31(img, cell);
    const oracle::HogReference ref = oracle::hog31_reference(img, cell);

    rec.expect(fast.rows == ref.features.rows &&
                   fast.cols == ref.features.cols && fast.channels == 31,
               [&] {
                 return "case " + std::to_string(i) + ": dims " +
                        std::to_string(fast.rows) + "x" +
                        std::to_string(fast.cols) + " vs reference " +
                        std::to_string(ref.features.rows) + "x" +
                        std::to_string(ref.features.cols);
               });
    if (fast.rows == ref.features.rows && fast.cols == ref.features.cols) {
      for (size_t j = 0; j < fast.data.size(); ++j) {
        rec.expect(std::abs(fast.data[j] - ref.features.data[j]) <= 1e-6f,
                   [&] {
                     return "case " + std::to_string(i) + ": feature [" +
                            std::to_string(j) + "] " +
                            std::to_string(fast.data[j]) + " vs reference " +
                            std::to_string(ref.features.data[j]);
                   });
      }
    }
    for (float v : fast.data) {
      rec.expect(v >= 0.0f, [&] {
        return "case " + std::to_string(i) + ": negative feature";
      });
    }
    for (int y = 0; y < fast.rows; ++y)
      for (int x = 0; x < fast.cols; ++x)
        for (int c = 0; c < 27; ++c)
          rec.expect(fast.at(y, x, c) <= 0.2f + 1e-6f, [&] {
            return "case " + std::to_string(i) +
                   ": normalized channel exceeds the 0.2 clip";
          });
    rec.case_done();
  }
  return rec.take();
}

}  // namespace

std::vector<SuiteResult> run_all(const Options& opts) {
  if (!opts.inject_fault.empty() && opts.inject_fault != "dt-intersection")
    throw ParamError("unknown fault: \"" + opts.inject_fault + "\"");
  return {suite_dt1d(opts),     suite_dt2d(opts),    suite_maxpool(opts),
          suite_maxfilter(opts), suite_geometry(opts), suite_pipeline(opts),
          suite_nms(opts),      suite_hog(opts)};
}

}  // namespace dpyr::selftest
