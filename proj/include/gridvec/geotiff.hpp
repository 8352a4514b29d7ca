#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gridvec/projection.hpp"

namespace gridvec::geotiff {

// Affine pixel-to-map mapping of a north-up raster.
struct GeoTransform {
  double origin_easting = 0.0;   // map x of the upper-left corner
  double origin_northing = 0.0;  // map y of the upper-left corner
  double pixel_size_x = 0.0;     // meters/pixel, > 0
  double pixel_size_y = 0.0;     // meters/pixel, < 0 for north-up
  std::int32_t width = 0;        // pixels
  std::int32_t height = 0;       // pixels

  bool valid() const {
    return pixel_size_x > 0.0 && pixel_size_y < 0.0 && width >= 1 &&
           height >= 1;
  }
};

struct TileMeta {
  std::string source_id;
  GeoTransform transform;
  std::int32_t crs_epsg = 0;
  std::optional<proj::GeoPoint> filename_center;
  std::int32_t band_count = 1;
};

enum class TiffErrorKind {
  MalformedTiff,
  MissingGeoTag,
  UnsupportedCrs,
  UnsupportedLayout,
  InvalidMeta,
};

class TiffError : public std::runtime_error {
public:
  TiffError(TiffErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  TiffErrorKind kind() const { return kind_; }

private:
  TiffErrorKind kind_;
};

class PatternMismatch : public std::runtime_error {
public:
  explicit PatternMismatch(const std::string& what)
      : std::runtime_error(what) {}
};

// Parses georeferencing metadata from a classic TIFF. Pixel data is never
// touched; only the tag subset needed for counting geometry is read.
TileMeta parse_tiff_metadata(std::span<const std::uint8_t> bytes);

// Parses the `<lat>_<lon>` filename convention; throws PatternMismatch on
// non-conforming names (callers record the center as absent).
proj::GeoPoint parse_filename_center(const std::string& name);

// Emits a little-endian, uncompressed, single-strip GeoTIFF whose parsed
// metadata equals `meta` field-exact. Deterministic bytes for a given input.
std::vector<std::uint8_t> write_synthetic_geotiff(const TileMeta& meta,
                                                  std::uint8_t fill = 0);

struct ValidationCheck {
  std::string name;
  enum class Status { Pass, Fail, Skipped } status;
  double delta = 0.0;  // measured deviation where applicable
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool all_passed() const {
    for (const auto& c : checks)
      if (c.status == ValidationCheck::Status::Fail) return false;
    return true;
  }
};

ValidationReport validate_tile(const TileMeta& meta, double tolerance_deg);

}  // namespace gridvec::geotiff
