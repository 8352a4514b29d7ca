#include "gridvec/grid.hpp"

#include <cmath>

namespace gridvec::grid {

GridSpec make_grid(const proj::ProjectedPoint& aoi_min,
                   const proj::ProjectedPoint& aoi_max, double cell_size) {
  if (cell_size <= 0.0) throw DegenerateAoi("cell_size must be positive");
  const double de = aoi_max.easting_m - aoi_min.easting_m;
  const double dn = aoi_max.northing_m - aoi_min.northing_m;
  if (de <= 0.0 || dn <= 0.0)
    throw DegenerateAoi("AOI extent must be strictly positive on both axes");
  GridSpec spec;
  spec.min_easting = aoi_min.easting_m;
  spec.min_northing = aoi_min.northing_m;
  spec.cell_size = cell_size;
  spec.n_cols = static_cast<int>(std::ceil(de / cell_size));
  spec.n_rows = static_cast<int>(std::ceil(dn / cell_size));
  return spec;
}

std::optional<CellIndex> assign_cell(const GridSpec& spec,
                                     const proj::ProjectedPoint& p) {
  const double fx = (p.easting_m - spec.min_easting) / spec.cell_size;
  const double fy = (p.northing_m - spec.min_northing) / spec.cell_size;
  const int col = static_cast<int>(std::floor(fx));
  const int row = static_cast<int>(std::floor(fy));
  if (col < 0 || col >= spec.n_cols || row < 0 || row >= spec.n_rows)
    return std::nullopt;
  return CellIndex{row, col};
}

CountGrid zero_grid(const GridSpec& spec, int nc, double conf_threshold) {
  CountGrid g;
  g.spec = spec;
  g.conf_threshold = conf_threshold;
  g.counts.assign(nc, std::vector<std::int32_t>(
                          static_cast<std::size_t>(spec.n_rows) * spec.n_cols,
                          0));
  return g;
}

CountGrid accumulate(const GridSpec& spec,
                     const std::vector<detect::GeoDetection>& dets,
                     const detect::ClassMap& cm, double conf_threshold) {
  CountGrid g = zero_grid(spec, cm.nc(), conf_threshold);
  for (const auto& d : dets) {
    // A detection without a confidence counts as accepted.
    if (d.confidence && *d.confidence < conf_threshold) {
      ++g.below_threshold;
      continue;
    }
    const auto cell = assign_cell(spec, d.projected);
    if (!cell) {
      ++g.skipped;
      continue;
    }
    ++g.at(d.class_id, cell->row, cell->col);
    ++g.accepted;
  }
  return g;
}

CountGrid merge(const CountGrid& a, const CountGrid& b) {
  if (a.spec != b.spec || a.counts.size() != b.counts.size() ||
      a.conf_threshold != b.conf_threshold)
    throw SpecMismatch("grids have different specs, class counts, or thresholds");
  CountGrid out = a;
  for (std::size_t c = 0; c < out.counts.size(); ++c)
    for (std::size_t i = 0; i < out.counts[c].size(); ++i)
      out.counts[c][i] += b.counts[c][i];
  out.accepted += b.accepted;
  out.skipped += b.skipped;
  out.below_threshold += b.below_threshold;
  return out;
}

CellCenters cell_centers(const GridSpec& spec) {
  CellCenters cc;
  cc.latitudes.reserve(spec.n_rows);
  cc.longitudes.reserve(spec.n_cols);
  const double center_easting =
      spec.min_easting + spec.n_cols * spec.cell_size / 2.0;
  const double center_northing =
      spec.min_northing + spec.n_rows * spec.cell_size / 2.0;
  for (int i = 0; i < spec.n_rows; ++i) {
    const double n = spec.min_northing + (i + 0.5) * spec.cell_size;
    cc.latitudes.push_back(
        proj::mercator_inverse({center_easting, n}).latitude_deg);
  }
  for (int j = 0; j < spec.n_cols; ++j) {
    const double e = spec.min_easting + (j + 0.5) * spec.cell_size;
    cc.longitudes.push_back(
        proj::mercator_inverse({e, center_northing}).longitude_deg);
  }
  return cc;
}

}  // namespace gridvec::grid
