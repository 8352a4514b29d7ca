// gridvec: batch pipeline turning geotagged tiles + detection labels into a
// gridded multi-class count inventory, emission fields, and heatmaps.

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "gridvec/pipeline.hpp"
#include "gridvec/synth.hpp"

namespace {

using gridvec::pipeline::AoiBounds;
using gridvec::pipeline::PipelineConfig;

int default_workers() {
  if (const char* env = std::getenv("GRIDVEC_WORKERS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  return 1;
}

std::string now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

std::optional<AoiBounds> parse_aoi(const std::string& s) {
  if (s.empty() || s == "from-tiles") return std::nullopt;
  AoiBounds b;
  char comma;
  std::istringstream in(s);
  if (!(in >> b.min_easting >> comma >> b.min_northing >> comma >>
        b.max_easting >> comma >> b.max_northing) ||
      comma != ',')
    throw CLI::ValidationError("--aoi",
                               "expected minE,minN,maxE,maxN or from-tiles");
  return b;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gridded vehicle-count inventory pipeline"};
  app.require_subcommand(1);

  PipelineConfig cfg;
  cfg.workers = default_workers();
  std::string aoi_str = "from-tiles";
  std::string timestamp;
  std::string factors;
  std::string manifest_path;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--tiles", cfg.tiles_dir, "directory of .tiff tiles");
    sub->add_option("--labels", cfg.labels_dir, "directory of .txt label files");
    sub->add_option("--classes", cfg.class_config, "class config file");
    sub->add_option("--out", cfg.output_dir, "output directory");
    sub->add_option("--workers", cfg.workers, "parallel tile workers");
  };

  auto* scan = app.add_subcommand("scan", "discover and pair tiles with labels");
  add_common(scan);

  auto* grid = app.add_subcommand("grid", "count detections onto the grid");
  add_common(grid);
  grid->add_option("--aoi", aoi_str, "minE,minN,maxE,maxN or from-tiles");
  grid->add_option("--cell-size", cfg.cell_size, "grid cell size in meters");
  grid->add_option("--conf", cfg.conf_threshold, "confidence threshold");
  grid->add_option("--timestamp", timestamp, "pinned creation timestamp");
  grid->add_option("--manifest", manifest_path, "use an existing manifest.tsv");
  grid->add_flag("--skip-bad", cfg.skip_bad, "skip unreadable tiles");

  std::string counts_nc = "counts.nc";
  auto* emit = app.add_subcommand("emit", "apply emission factors");
  emit->add_option("--counts", counts_nc, "counts netCDF file");
  emit->add_option("--factors", factors, "emission factor config")->required();
  emit->add_option("--out", cfg.output_dir, "output directory");

  std::string plane = "total";
  int cell_px = 8;
  auto* render = app.add_subcommand("render", "render a density heatmap");
  render->add_option("--counts", counts_nc, "counts netCDF file");
  render->add_option("--plane", plane, "class label or 'total'");
  render->add_option("--cell-px", cell_px, "pixels per grid cell");
  render->add_option("--out", cfg.output_dir, "output directory");

  std::string gt_dir, pred_dir;
  double iou_min = 0.5;
  auto* eval = app.add_subcommand("eval", "detection-quality metrics");
  eval->add_option("--gt", gt_dir, "ground-truth label directory")->required();
  eval->add_option("--pred", pred_dir, "prediction label directory")->required();
  eval->add_option("--classes", cfg.class_config, "class config file");
  eval->add_option("--iou-min", iou_min, "matching IoU threshold");
  eval->add_option("--out", cfg.output_dir, "output directory");

  gridvec::synth::SceneSpec scene_spec;
  scene_spec.objects_per_class = {10, 10, 10, 10};
  std::string synth_aoi = "0,0,3000,3000";
  std::vector<int> objects;
  auto* synth = app.add_subcommand("synth", "generate a synthetic fixture scene");
  synth->add_option("--seed", scene_spec.seed, "splitmix64 seed");
  synth->add_option("--aoi", synth_aoi, "minE,minN,maxE,maxN");
  synth->add_option("--tile-width-px", scene_spec.tile_width_px, "tile width");
  synth->add_option("--tile-height-px", scene_spec.tile_height_px, "tile height");
  synth->add_option("--pixel-size-x", scene_spec.pixel_size_x, "m/pixel");
  synth->add_option("--pixel-size-y", scene_spec.pixel_size_y, "m/pixel");
  synth->add_option("--objects", objects, "objects per class (ClassMap order)");
  synth->add_option("--out", cfg.output_dir, "output directory")->required();

  double tolerance = 1e-4;
  auto* validate = app.add_subcommand("validate", "gdalinfo-lite tile report");
  validate->add_option("--tiles", cfg.tiles_dir, "directory of tiles")
      ->required();
  validate->add_option("--tolerance", tolerance,
                       "filename-center tolerance in degrees");

  CLI11_PARSE(app, argc, argv);

  using namespace gridvec;
  try {
    if (scan->parsed()) return pipeline::cmd_scan(cfg);
    if (grid->parsed()) {
      cfg.aoi = parse_aoi(aoi_str);
      cfg.timestamp = timestamp.empty() ? now_iso8601() : timestamp;
      return pipeline::cmd_grid(
          cfg, manifest_path.empty()
                   ? std::nullopt
                   : std::optional<std::filesystem::path>(manifest_path));
    }
    if (emit->parsed()) {
      cfg.factors_path = factors;
      return pipeline::cmd_emit(cfg, counts_nc);
    }
    if (render->parsed())
      return pipeline::cmd_render(counts_nc, plane, cell_px, cfg.output_dir);
    if (eval->parsed())
      return pipeline::cmd_eval(gt_dir, pred_dir, cfg.class_config, iou_min,
                                cfg.output_dir);
    if (synth->parsed()) {
      const auto aoi = parse_aoi(synth_aoi);
      if (!aoi) throw CLI::ValidationError("--aoi", "explicit bounds required");
      scene_spec.aoi_min = {aoi->min_easting, aoi->min_northing};
      scene_spec.aoi_max = {aoi->max_easting, aoi->max_northing};
      if (!objects.empty()) scene_spec.objects_per_class = objects;
      const auto scene = synth::generate_scene(scene_spec);
      synth::write_scene(scene, cfg.output_dir);
      std::cout << "wrote " << scene.tiles.size() << " tiles, "
                << scene.truth.size() << " truth points\n";
      return pipeline::kOk;
    }
    if (validate->parsed())
      return pipeline::cmd_validate(cfg.tiles_dir, tolerance, std::cout);
  } catch (const synth::InvalidSpec& ex) {
    std::cerr << "gridvec: " << ex.what() << "\n";
    return pipeline::kConfigError;
  } catch (const std::exception& ex) {
    std::cerr << "gridvec: " << ex.what() << "\n";
    return pipeline::kDataError;
  }
  return pipeline::kConfigError;
}
