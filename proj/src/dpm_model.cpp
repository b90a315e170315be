#include "dpyr/dpm_model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace dpyr {

using nlohmann::json;

namespace {

constexpr int kMaxParts = 32;

// --- validation ------------------------------------------------------------

void check_filter(const Filter& f, int want_channels, const std::string& path,
                  std::vector<Violation>& out) {
  if (f.rows < 1 || f.cols < 1 || f.channels < 1) {
    out.push_back({path, "filter dimensions must be positive"});
    return;
  }
  if (f.weights.size() != static_cast<size_t>(f.rows) * f.cols * f.channels) {
    out.push_back({path + ".weights", "weight count does not match rows*cols*channels"});
  }
  if (f.channels != want_channels) {
    out.push_back({path + ".channels",
                   "filter has " + std::to_string(f.channels) +
                       " channels but the feature spec declares " +
                       std::to_string(want_channels)});
  }
  for (float w : f.weights) {
    if (!std::isfinite(w)) {
      out.push_back({path + ".weights", "non-finite weight"});
      break;
    }
  }
}

void check_def1d(const Deformation1D& d, const std::string& path,
                 std::vector<Violation>& out) {
  if (!(d.a > 0.0)) out.push_back({path + ".a", "must be > 0"});
  if (!std::isfinite(d.a) || !std::isfinite(d.b)) {
    out.push_back({path, "non-finite coefficient"});
  }
}

// --- document parsing helpers ----------------------------------------------

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ParseError(path + ": " + what);
}

const json& require(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(path, std::string("missing field '") + key + "'");
  return *it;
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  return v.get<int>();
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

// Stash any keys not in `known` as raw JSON, warning about each.
void collect_extras(const json& obj, std::initializer_list<const char*> known,
                    const std::string& path,
                    std::map<std::string, std::string>& extra,
                    std::vector<std::string>* warnings) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool is_known = false;
    for (const char* k : known) {
      if (it.key() == k) {
        is_known = true;
        break;
      }
    }
    if (!is_known) {
      extra[it.key()] = it.value().dump();
      if (warnings) {
        warnings->push_back(path + ": unknown field '" + it.key() +
                            "' (preserved)");
      }
    }
  }
}

Filter parse_filter(const json& j, const std::string& path,
                    std::vector<std::string>* warnings,
                    std::map<std::string, std::string>* extra_sink = nullptr) {
  Filter f;
  f.rows = as_int(require(j, "rows", path), path + ".rows");
  f.cols = as_int(require(j, "cols", path), path + ".cols");
  f.channels = as_int(require(j, "channels", path), path + ".channels");
  const json& w = require(j, "weights", path);
  if (!w.is_array()) fail(path + ".weights", "expected an array");
  if (f.rows < 1 || f.cols < 1 || f.channels < 1) {
    fail(path, "filter dimensions must be positive");
  }
  const size_t want = static_cast<size_t>(f.rows) * f.cols * f.channels;
  if (w.size() != want) {
    fail(path + ".weights", "expected " + std::to_string(want) +
                                " values, got " + std::to_string(w.size()));
  }
  f.weights.reserve(want);
  for (size_t i = 0; i < w.size(); ++i) {
    f.weights.push_back(static_cast<float>(
        as_number(w[i], path + ".weights[" + std::to_string(i) + "]")));
  }
  if (extra_sink) {
    collect_extras(j, {"rows", "cols", "channels", "weights"}, path, *extra_sink,
                   warnings);
  }
  return f;
}

json filter_to_json(const Filter& f) {
  json j;
  j["rows"] = f.rows;
  j["cols"] = f.cols;
  j["channels"] = f.channels;
  json w = json::array();
  for (float v : f.weights) w.push_back(static_cast<double>(v));
  j["weights"] = std::move(w);
  return j;
}

void merge_extras(json& j, const std::map<std::string, std::string>& extra) {
  for (const auto& [k, raw] : extra) j[k] = json::parse(raw);
}

}  // namespace

std::vector<Violation> validate(const DpmModel& model) {
  std::vector<Violation> out;
  if (model.feature.channels < 1) {
    out.push_back({"feature.channels", "must be >= 1"});
  }
  if (model.feature.stride < 1) {
    out.push_back({"feature.stride", "must be >= 1"});
  }
  if (model.components.empty()) {
    out.push_back({"components", "a model needs at least one component"});
  }
  for (size_t c = 0; c < model.components.size(); ++c) {
    const Component& comp = model.components[c];
    const std::string cpath = "components[" + std::to_string(c) + "]";
    check_filter(comp.root, model.feature.channels, cpath + ".root", out);
    if (!std::isfinite(comp.bias)) out.push_back({cpath + ".bias", "non-finite"});
    if (comp.parts.size() > kMaxParts) {
      out.push_back({cpath + ".parts",
                     "too many parts (" + std::to_string(comp.parts.size()) +
                         " > " + std::to_string(kMaxParts) + ")"});
    }
    for (size_t p = 0; p < comp.parts.size(); ++p) {
      const Part& part = comp.parts[p];
      const std::string ppath = cpath + ".parts[" + std::to_string(p) + "]";
      check_filter(part.filter, model.feature.channels, ppath + ".filter", out);
      if (part.filter.channels != comp.root.channels) {
        out.push_back({ppath + ".filter.channels",
                       "part has " + std::to_string(part.filter.channels) +
                           " channels, root has " +
                           std::to_string(comp.root.channels)});
      }
      if (part.anchor.dx < 0 || part.anchor.dy < 0) {
        out.push_back({ppath + ".anchor", "anchor offsets must be >= 0"});
      }
      check_def1d(part.deformation.x, ppath + ".deformation.x", out);
      check_def1d(part.deformation.y, ppath + ".deformation.y", out);
    }
  }
  return out;
}

DpmModel parse_model(const std::string& text,
                     std::vector<std::string>* warnings) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("model document: ") + e.what());
  }

  DpmModel m;
  const std::string fmt = as_string(require(doc, "format", "document"), "format");
  if (fmt != "dpyr-model/1") {
    fail("format", "unsupported format '" + fmt + "' (want dpyr-model/1)");
  }
  m.class_name = as_string(require(doc, "class", "document"), "class");

  const json& feat = require(doc, "feature", "document");
  const std::string kind = as_string(require(feat, "kind", "feature"), "feature.kind");
  if (kind == "hog31") {
    m.feature.kind = FeatureKind::hog31;
  } else if (kind == "external") {
    m.feature.kind = FeatureKind::external;
  } else {
    fail("feature.kind", "expected \"hog31\" or \"external\", got \"" + kind + "\"");
  }
  m.feature.channels = as_int(require(feat, "channels", "feature"), "feature.channels");
  m.feature.stride = as_int(require(feat, "stride", "feature"), "feature.stride");

  const json& comps = require(doc, "components", "document");
  if (!comps.is_array()) fail("components", "expected an array");
  for (size_t c = 0; c < comps.size(); ++c) {
    const json& jc = comps[c];
    const std::string cpath = "components[" + std::to_string(c) + "]";
    Component comp;
    comp.bias = as_number(require(jc, "bias", cpath), cpath + ".bias");
    comp.root = parse_filter(require(jc, "root", cpath), cpath + ".root", warnings);
    const json& parts = require(jc, "parts", cpath);
    if (!parts.is_array()) fail(cpath + ".parts", "expected an array");
    for (size_t p = 0; p < parts.size(); ++p) {
      const json& jp = parts[p];
      const std::string ppath = cpath + ".parts[" + std::to_string(p) + "]";
      Part part;
      const json& ja = require(jp, "anchor", ppath);
      part.anchor.dx = as_int(require(ja, "dx", ppath + ".anchor"), ppath + ".anchor.dx");
      part.anchor.dy = as_int(require(ja, "dy", ppath + ".anchor"), ppath + ".anchor.dy");
      const json& jd = require(jp, "deformation", ppath);
      part.deformation.x.a =
          as_number(require(jd, "ax", ppath + ".deformation"), ppath + ".deformation.ax");
      part.deformation.x.b =
          as_number(require(jd, "bx", ppath + ".deformation"), ppath + ".deformation.bx");
      part.deformation.y.a =
          as_number(require(jd, "ay", ppath + ".deformation"), ppath + ".deformation.ay");
      part.deformation.y.b =
          as_number(require(jd, "by", ppath + ".deformation"), ppath + ".deformation.by");
      part.filter = parse_filter(require(jp, "filter", ppath), ppath + ".filter", warnings);
      collect_extras(jp, {"anchor", "deformation", "filter"}, ppath, part.extra,
                     warnings);
      comp.parts.push_back(std::move(part));
    }
    collect_extras(jc, {"bias", "root", "parts"}, cpath, comp.extra, warnings);
    m.components.push_back(std::move(comp));
  }
  collect_extras(doc, {"format", "class", "feature", "components"}, "document",
                 m.extra, warnings);
  return m;
}

std::string serialize_model(const DpmModel& model) {
  const std::vector<Violation> bad = validate(model);
  if (!bad.empty()) {
    std::string msg = "model does not validate:";
    for (const Violation& v : bad) msg += "\n  " + v.path + ": " + v.message;
    throw ValidationError(msg);
  }

  json doc;
  doc["format"] = "dpyr-model/1";
  doc["class"] = model.class_name;
  doc["feature"] = {{"kind", to_string(model.feature.kind)},
                    {"channels", model.feature.channels},
                    {"stride", model.feature.stride}};
  json comps = json::array();
  for (const Component& comp : model.components) {
    json jc;
    jc["bias"] = comp.bias;
    jc["root"] = filter_to_json(comp.root);
    json parts = json::array();
    for (const Part& part : comp.parts) {
      json jp;
      jp["anchor"] = {{"dx", part.anchor.dx}, {"dy", part.anchor.dy}};
      jp["deformation"] = {{"ax", part.deformation.x.a},
                           {"bx", part.deformation.x.b},
                           {"ay", part.deformation.y.a},
                           {"by", part.deformation.y.b}};
      jp["filter"] = filter_to_json(part.filter);
      merge_extras(jp, part.extra);
      parts.push_back(std::move(jp));
    }
    jc["parts"] = std::move(parts);
    merge_extras(jc, comp.extra);
    comps.push_back(std::move(jc));
  }
  doc["components"] = std::move(comps);
  merge_extras(doc, model.extra);
  return doc.dump(2) + "\n";
}

DpmModel load_model(const std::string& path, std::vector<std::string>* warnings) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_model(buf.str(), warnings);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void save_model(const DpmModel& model, const std::string& path) {
  const std::string text = serialize_model(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open model file for writing: " + path);
  out << text;
  if (!out) throw Error("failed writing model file: " + path);
}

}  // namespace dpyr
