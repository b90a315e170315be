#pragma once

#include <map>
#include <string>
#include <vector>

#include "dpyr/core_types.hpp"
#include "dpyr/dt_pool.hpp"
#include "dpyr/filter_conv.hpp"

namespace dpyr {

/// Nominal part offset from the root location, in feature cells.
/// Offsets are non-negative; converters must normalize negative anchors by
/// growing the geometry-filter origin.
struct Anchor {
  int dx = 0;
  int dy = 0;
};

/// One deformable part: local template, anchor, quadratic deformation cost.
struct Part {
  Filter filter;
  Anchor anchor;
  Deformation2D deformation;
  std::map<std::string, std::string> extra;  // unknown document fields, raw JSON
};

/// One mixture component: whole-object root template, parts, scalar bias.
struct Component {
  Filter root;
  std::vector<Part> parts;
  double bias = 0.0;
  std::map<std::string, std::string> extra;
};

/// What feature space the model was trained on.
struct FeatureSpec {
  FeatureKind kind = FeatureKind::hog31;
  int channels = 31;
  int stride = 8;  // image pixels per feature cell
};

/// A deformable part model: a mixture of components over one feature space.
struct DpmModel {
  std::string class_name;
  FeatureSpec feature;
  std::vector<Component> components;
  std::map<std::string, std::string> extra;
};

/// One invariant violation found by validate().
struct Violation {
  std::string path;     // e.g. "components[0].parts[1].deformation.x.a"
  std::string message;
};

/// Checks every model invariant and returns all violations (empty == ok).
/// Pure and total: never throws on any parseable structure.
std::vector<Violation> validate(const DpmModel& model);

/// Reads a "dpyr-model/1" document. Unknown fields are preserved and reported
/// through `warnings` when given. Throws ParseError with path context.
DpmModel load_model(const std::string& path,
                    std::vector<std::string>* warnings = nullptr);

/// Serializes the model document; throws ValidationError if the model does
/// not validate, Error on IO failure. save then load round-trips weights
/// bit-exactly.
void save_model(const DpmModel& model, const std::string& path);

/// In-memory variants of the document round-trip.
DpmModel parse_model(const std::string& text,
                     std::vector<std::string>* warnings = nullptr);
std::string serialize_model(const DpmModel& model);

}  // namespace dpyr
