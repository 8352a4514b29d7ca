#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gridvec/geotiff.hpp"
#include "gridvec/projection.hpp"

namespace gridvec::detect {

struct ClassMap {
  std::vector<std::string> names;
  int nc() const { return static_cast<int>(names.size()); }
};

// The four-class scheme the pipeline defaults to.
ClassMap default_class_map();

struct Detection {
  int class_id = 0;
  double cx = 0.0, cy = 0.0;  // normalized center in [0,1]
  double w = 0.0, h = 0.0;    // normalized size in (0,1]
  std::optional<double> confidence;
};

struct GeoDetection {
  int class_id = 0;
  proj::GeoPoint point;
  proj::ProjectedPoint projected;
  std::optional<double> confidence;
  std::string source_id;
};

class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

class LabelError : public std::runtime_error {
public:
  LabelError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  int line() const { return line_; }

private:
  int line_;
};

// Parses the flat `nc:` / `names: [...]` class config layout; train/val/test
// path lines are tolerated and ignored.
ClassMap parse_class_config(const std::string& text);

// One detection per non-empty line: `class cx cy w h [conf]`.
std::vector<Detection> parse_yolo_labels(const std::string& text,
                                         const ClassMap& cm);

// Places box centers in map and geographic coordinates via the tile's
// geotransform. Order preserved; length preserved.
std::vector<GeoDetection> detections_to_geo(const std::vector<Detection>& dets,
                                            const geotiff::TileMeta& tile);

}  // namespace gridvec::detect
