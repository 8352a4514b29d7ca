#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "gridvec/detect.hpp"
#include "gridvec/projection.hpp"

namespace gridvec::grid {

struct GridSpec {
  double min_easting = 0.0;
  double min_northing = 0.0;
  double cell_size = 150.0;
  int n_cols = 1;
  int n_rows = 1;

  bool operator==(const GridSpec&) const = default;
};

struct CellIndex {
  int row = 0;
  int col = 0;
  bool operator==(const CellIndex&) const = default;
};

// Per-class count planes plus the accumulation provenance tallies.
struct CountGrid {
  GridSpec spec;
  double conf_threshold = 0.25;
  // counts[c] is row-major (n_rows x n_cols), row index ascending northward.
  std::vector<std::vector<std::int32_t>> counts;
  std::int64_t accepted = 0;
  std::int64_t skipped = 0;          // out of AOI
  std::int64_t below_threshold = 0;

  std::int32_t& at(int class_id, int row, int col) {
    return counts[class_id][static_cast<std::size_t>(row) * spec.n_cols + col];
  }
  std::int32_t at(int class_id, int row, int col) const {
    return counts[class_id][static_cast<std::size_t>(row) * spec.n_cols + col];
  }
};

class DegenerateAoi : public std::runtime_error {
public:
  explicit DegenerateAoi(const std::string& what) : std::runtime_error(what) {}
};

class SpecMismatch : public std::runtime_error {
public:
  explicit SpecMismatch(const std::string& what) : std::runtime_error(what) {}
};

GridSpec make_grid(const proj::ProjectedPoint& aoi_min,
                   const proj::ProjectedPoint& aoi_max, double cell_size);

// Half-open binning, lower edges inclusive; nullopt when the point falls at
// or beyond the maximum edge.
std::optional<CellIndex> assign_cell(const GridSpec& spec,
                                     const proj::ProjectedPoint& p);

CountGrid zero_grid(const GridSpec& spec, int nc, double conf_threshold);

CountGrid accumulate(const GridSpec& spec,
                     const std::vector<detect::GeoDetection>& dets,
                     const detect::ClassMap& cm, double conf_threshold = 0.25);

// Elementwise sum; commutative monoid with zero_grid as identity.
CountGrid merge(const CountGrid& a, const CountGrid& b);

struct CellCenters {
  std::vector<double> latitudes;   // one per row, ascending
  std::vector<double> longitudes;  // one per column, ascending
};

CellCenters cell_centers(const GridSpec& spec);

}  // namespace gridvec::grid
