#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "gridvec/detect.hpp"
#include "gridvec/geotiff.hpp"
#include "gridvec/grid.hpp"

namespace gridvec::synth {

// splitmix64: state advances by the golden-gamma constant; output runs
// through the published finalizer. Tiny, exactly specifiable, portable.
class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0,1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

private:
  std::uint64_t state_;
};

struct SceneSpec {
  std::uint64_t seed = 0;
  proj::ProjectedPoint aoi_min;
  proj::ProjectedPoint aoi_max;
  double cell_size = 150.0;
  int tile_width_px = 8;
  int tile_height_px = 8;
  double pixel_size_x = 1.0;
  double pixel_size_y = 1.0;  // magnitude; tiles are written north-up
  std::vector<int> objects_per_class;  // ClassMap order
};

struct TileLabels {
  geotiff::TileMeta meta;
  std::string label_text;  // 6-field lines, generation order
};

struct Scene {
  std::vector<TileLabels> tiles;
  std::vector<detect::GeoDetection> truth;  // exact placements
};

class InvalidSpec : public std::runtime_error {
public:
  explicit InvalidSpec(const std::string& what) : std::runtime_error(what) {}
};

// Deterministic function of the SceneSpec: places objects uniformly over the AOI,
// assigns each to its containing tile, and emits 6-field label lines with
// confidence uniform in [0.3, 1.0]. Tile filenames follow <lat>_<lon>.tiff.
Scene generate_scene(const SceneSpec& spec);

// Brute-force counts straight from the truth points by interval membership
// per cell, bypassing the pipeline entirely.
grid::CountGrid oracle_counts(const Scene& scene, const grid::GridSpec& spec,
                              const detect::ClassMap& cm,
                              double conf_threshold);

// Writes .tiff tiles, .txt labels, and truth.tsv (class, lat, lon, conf).
void write_scene(const Scene& scene, const std::filesystem::path& dir);

}  // namespace gridvec::synth
