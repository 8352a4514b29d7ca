#include "gridvec/projection.hpp"

#include "gridvec/geotiff.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

namespace gridvec::proj {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

}  // namespace

ProjectedPoint mercator_forward(const GeoPoint& p) {
  if (std::abs(p.latitude_deg) >= kMaxLatitudeDeg) {
    throw OutOfDomain("latitude " + std::to_string(p.latitude_deg) +
                      " outside the +-85.06 deg validity band");
  }
  const double lat = p.latitude_deg * kDegToRad;
  const double lon = p.longitude_deg * kDegToRad;
  // asinh(tan(lat)) == ln(tan(pi/4 + lat/2)), and is exact at the origin.
  return {kEarthRadiusM * lon, kEarthRadiusM * std::asinh(std::tan(lat))};
}

GeoPoint mercator_inverse(const ProjectedPoint& p) {
  const double max_e = std::numbers::pi * kEarthRadiusM;
  if (std::abs(p.easting_m) > max_e) {
    throw OutOfDomain("easting " + std::to_string(p.easting_m) +
                      " outside +-pi*R");
  }
  return {std::atan(std::sinh(p.northing_m / kEarthRadiusM)) * kRadToDeg,
          (p.easting_m / kEarthRadiusM) * kRadToDeg};
}

ProjectedPoint pixel_to_projected(const geotiff::GeoTransform& t, double px,
                                  double py) {
  if (px < 0.0 || px > t.width || py < 0.0 || py > t.height) {
    throw OutOfRaster("pixel (" + std::to_string(px) + ", " +
                      std::to_string(py) + ") outside raster " +
                      std::to_string(t.width) + "x" + std::to_string(t.height));
  }
  return {t.origin_easting + px * t.pixel_size_x,
          t.origin_northing + py * t.pixel_size_y};
}

std::string format_dms(double angle_deg, Axis axis) {
  char hemi;
  if (axis == Axis::Latitude) {
    hemi = angle_deg < 0.0 ? 'S' : 'N';
  } else {
    hemi = angle_deg < 0.0 ? 'W' : 'E';
  }
  double a = std::abs(angle_deg);
  int deg = static_cast<int>(a);
  double rem = (a - deg) * 60.0;
  int min = static_cast<int>(rem);
  double sec = (rem - min) * 60.0;
  // Round seconds to 2 decimals first, then carry.
  sec = std::round(sec * 100.0) / 100.0;
  if (sec >= 60.0) {
    sec -= 60.0;
    ++min;
  }
  if (min >= 60) {
    min -= 60;
    ++deg;
  }
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%dd%2d'%.2f\"%c", deg, min, sec, hemi);
  return buf;
}

}  // namespace gridvec::proj
