#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gridvec/detect.hpp"
#include "gridvec/geotiff.hpp"
#include "gridvec/grid.hpp"
#include "gridvec/inventory.hpp"

namespace gridvec::pipeline {

// Stable exit-code contract shared by every subcommand.
enum ExitCode : int {
  kOk = 0,
  kValidationFailure = 1,
  kMissingInput = 2,
  kDataError = 3,
  kConfigError = 4,
};

struct AoiBounds {
  double min_easting = 0.0;
  double min_northing = 0.0;
  double max_easting = 0.0;
  double max_northing = 0.0;
};

struct PipelineConfig {
  std::filesystem::path tiles_dir;
  std::filesystem::path labels_dir;
  std::filesystem::path class_config;
  std::optional<AoiBounds> aoi;  // absent = "from-tiles"
  double cell_size = 150.0;
  double conf_threshold = 0.25;
  std::optional<std::filesystem::path> factors_path;
  std::filesystem::path output_dir = ".";
  int workers = 1;
  std::string timestamp;  // pinned into output attributes
  bool skip_bad = false;
};

struct ManifestEntry {
  std::filesystem::path tile_path;
  std::filesystem::path label_path;  // empty when no labels
  std::string status;                // ok | no-labels | parse-error
  std::optional<geotiff::TileMeta> meta;
  std::string error;
};

struct Manifest {
  std::vector<ManifestEntry> entries;
  std::size_t ok_count() const;
};

Manifest scan_tiles(const std::filesystem::path& tiles_dir,
                    const std::filesystem::path& labels_dir);

void write_manifest(const Manifest& m, std::ostream& out);
Manifest read_manifest(std::istream& in);

struct GridRunReport {
  std::int64_t tiles_processed = 0;
  std::int64_t tiles_failed = 0;
  std::int64_t label_lines = 0;
  std::int64_t accepted = 0;
  std::int64_t skipped = 0;
  std::int64_t below_threshold = 0;
  std::int64_t parse_errors = 0;
};

struct GridRunResult {
  grid::CountGrid grid;
  detect::ClassMap class_map;
  GridRunReport report;
};

// Full counting pipeline over the manifest's ok entries: parse labels,
// geo-map, accumulate over `workers` tile partitions, merge. Output is
// independent of the worker count.
GridRunResult run_grid(const PipelineConfig& cfg, const Manifest& manifest);

// Subcommand entry points; return process exit codes.
int cmd_scan(const PipelineConfig& cfg);
int cmd_grid(const PipelineConfig& cfg,
             const std::optional<std::filesystem::path>& manifest_path);
int cmd_emit(const PipelineConfig& cfg, const std::filesystem::path& counts_nc);
int cmd_render(const std::filesystem::path& counts_nc, const std::string& plane,
               int cell_px, const std::filesystem::path& output_dir);
int cmd_eval(const std::filesystem::path& gt_dir,
             const std::filesystem::path& pred_dir,
             const std::filesystem::path& class_config, double iou_min,
             const std::filesystem::path& output_dir);
int cmd_validate(const std::filesystem::path& tiles_dir, double tolerance_deg,
                 std::ostream& out);

}  // namespace gridvec::pipeline
