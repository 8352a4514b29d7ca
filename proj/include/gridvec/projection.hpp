#pragma once

#include <stdexcept>
#include <string>

namespace gridvec::proj {

// Spherical earth radius used by EPSG:3857 (Popular Visualisation
// Pseudo-Mercator).
inline constexpr double kEarthRadiusM = 6378137.0;

// Latitude band over which EPSG:3857 is defined.
inline constexpr double kMaxLatitudeDeg = 85.06;

struct GeoPoint {
  double latitude_deg = 0.0;
  double longitude_deg = 0.0;
};

struct ProjectedPoint {
  double easting_m = 0.0;
  double northing_m = 0.0;
};

class OutOfDomain : public std::runtime_error {
public:
  explicit OutOfDomain(const std::string& what) : std::runtime_error(what) {}
};

class OutOfRaster : public std::runtime_error {
public:
  explicit OutOfRaster(const std::string& what) : std::runtime_error(what) {}
};

ProjectedPoint mercator_forward(const GeoPoint& p);
GeoPoint mercator_inverse(const ProjectedPoint& p);

}  // namespace gridvec::proj

namespace gridvec::geotiff {
struct GeoTransform;
}

namespace gridvec::proj {

// Affine pixel-to-map mapping; px/py are fractional pixel coordinates and
// must lie within the raster bounds.
ProjectedPoint pixel_to_projected(const geotiff::GeoTransform& t, double px,
                                  double py);

enum class Axis { Latitude, Longitude };

// Degrees/minutes/seconds in the gdalinfo corner style, e.g. 77d 7'45.33"E.
// Minutes are space-padded to two characters; seconds carry two decimals.
std::string format_dms(double angle_deg, Axis axis);

}  // namespace gridvec::proj
