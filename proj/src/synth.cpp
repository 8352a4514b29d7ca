#include "gridvec/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "gridvec/projection.hpp"

namespace gridvec::synth {

namespace {

std::string format_fixed(double v, int decimals) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

}  // namespace

Scene generate_scene(const SceneSpec& spec) {
  const double aoi_w = spec.aoi_max.easting_m - spec.aoi_min.easting_m;
  const double aoi_h = spec.aoi_max.northing_m - spec.aoi_min.northing_m;
  if (aoi_w <= 0.0 || aoi_h <= 0.0) throw InvalidSpec("degenerate AOI");
  if (spec.tile_width_px < 1 || spec.tile_height_px < 1 ||
      spec.pixel_size_x <= 0.0 || spec.pixel_size_y <= 0.0)
    throw InvalidSpec("bad tile geometry");
  if (spec.objects_per_class.empty())
    throw InvalidSpec("objects_per_class is empty");
  for (int n : spec.objects_per_class)
    if (n < 0) throw InvalidSpec("negative object count");

  const double tile_w = spec.tile_width_px * spec.pixel_size_x;
  const double tile_h = spec.tile_height_px * spec.pixel_size_y;
  const double nx_f = aoi_w / tile_w;
  const double ny_f = aoi_h / tile_h;
  const int nx = static_cast<int>(std::llround(nx_f));
  const int ny = static_cast<int>(std::llround(ny_f));
  if (nx < 1 || ny < 1 || std::abs(nx_f - nx) * tile_w > 1e-6 ||
      std::abs(ny_f - ny) * tile_h > 1e-6)
    throw InvalidSpec("AOI extents must be whole multiples of the tile footprint");

  Scene scene;
  scene.tiles.resize(static_cast<std::size_t>(nx) * ny);
  // Tile (tx, ty): ty counts from the north so tile origin is the upper-left.
  for (int ty = 0; ty < ny; ++ty) {
    for (int tx = 0; tx < nx; ++tx) {
      geotiff::TileMeta meta;
      meta.transform.origin_easting = spec.aoi_min.easting_m + tx * tile_w;
      meta.transform.origin_northing = spec.aoi_max.northing_m - ty * tile_h;
      meta.transform.pixel_size_x = spec.pixel_size_x;
      meta.transform.pixel_size_y = -spec.pixel_size_y;
      meta.transform.width = spec.tile_width_px;
      meta.transform.height = spec.tile_height_px;
      meta.crs_epsg = 3857;
      meta.band_count = 1;
      const auto center = proj::mercator_inverse(
          {meta.transform.origin_easting + tile_w / 2.0,
           meta.transform.origin_northing - tile_h / 2.0});
      meta.filename_center = center;
      meta.source_id = format_fixed(center.latitude_deg, 6) + "_" +
                       format_fixed(center.longitude_deg, 6) + ".tiff";
      scene.tiles[static_cast<std::size_t>(ty) * nx + tx].meta = meta;
    }
  }

  SplitMix64 rng(spec.seed);
  for (std::size_t c = 0; c < spec.objects_per_class.size(); ++c) {
    for (int k = 0; k < spec.objects_per_class[c]; ++k) {
      const double e = spec.aoi_min.easting_m + rng.next_double() * aoi_w;
      const double n = spec.aoi_min.northing_m + rng.next_double() * aoi_h;
      const double conf = 0.3 + 0.7 * rng.next_double();

      const int tx = std::min(
          static_cast<int>((e - spec.aoi_min.easting_m) / tile_w), nx - 1);
      const int ty = std::min(
          static_cast<int>((spec.aoi_max.northing_m - n) / tile_h), ny - 1);
      auto& tile = scene.tiles[static_cast<std::size_t>(ty) * nx + tx];

      const double cx =
          (e - tile.meta.transform.origin_easting) / tile_w;
      const double cy =
          (tile.meta.transform.origin_northing - n) / tile_h;
      tile.label_text += std::to_string(c) + " " + format_fixed(cx, 12) + " " +
                         format_fixed(cy, 12) + " 0.01 0.01 " +
                         format_fixed(conf, 12) + "\n";

      detect::GeoDetection truth;
      truth.class_id = static_cast<int>(c);
      truth.projected = {e, n};
      truth.point = proj::mercator_inverse(truth.projected);
      truth.confidence = conf;
      truth.source_id = tile.meta.source_id;
      scene.truth.push_back(std::move(truth));
    }
  }
  return scene;
}

grid::CountGrid oracle_counts(const Scene& scene, const grid::GridSpec& spec,
                              const detect::ClassMap& cm,
                              double conf_threshold) {
  grid::CountGrid g = grid::zero_grid(spec, cm.nc(), conf_threshold);
  for (const auto& t : scene.truth) {
    if (t.confidence && *t.confidence < conf_threshold) {
      ++g.below_threshold;
      continue;
    }
    // Direct interval-membership scan over every cell; deliberately naive.
    bool placed = false;
    for (int row = 0; row < spec.n_rows && !placed; ++row) {
      const double n0 = spec.min_northing + row * spec.cell_size;
      const double n1 = spec.min_northing + (row + 1) * spec.cell_size;
      if (!(t.projected.northing_m >= n0 && t.projected.northing_m < n1))
        continue;
      for (int col = 0; col < spec.n_cols && !placed; ++col) {
        const double e0 = spec.min_easting + col * spec.cell_size;
        const double e1 = spec.min_easting + (col + 1) * spec.cell_size;
        if (t.projected.easting_m >= e0 && t.projected.easting_m < e1) {
          ++g.at(t.class_id, row, col);
          ++g.accepted;
          placed = true;
        }
      }
    }
    if (!placed) ++g.skipped;
  }
  return g;
}

void write_scene(const Scene& scene, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "tiles");
  std::filesystem::create_directories(dir / "labels");
  for (const auto& tile : scene.tiles) {
    const auto bytes = geotiff::write_synthetic_geotiff(tile.meta, 0x80);
    std::ofstream tf(dir / "tiles" / tile.meta.source_id, std::ios::binary);
    tf.write(reinterpret_cast<const char*>(bytes.data()),
             static_cast<std::streamsize>(bytes.size()));

    std::filesystem::path label_name = tile.meta.source_id;
    label_name.replace_extension(".txt");
    std::ofstream lf(dir / "labels" / label_name, std::ios::binary);
    lf << tile.label_text;
  }
  std::ofstream truth(dir / "truth.tsv", std::ios::binary);
  for (const auto& t : scene.truth) {
    truth << t.class_id << "\t" << format_fixed(t.point.latitude_deg, 9) << "\t"
          << format_fixed(t.point.longitude_deg, 9) << "\t"
          << format_fixed(t.confidence.value_or(1.0), 6) << "\n";
  }
}

}  // namespace gridvec::synth
