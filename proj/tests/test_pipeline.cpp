#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "gridvec/pipeline.hpp"
#include "gridvec/render.hpp"
#include "gridvec/synth.hpp"

using namespace gridvec;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

synth::SceneSpec scene_spec(std::uint64_t seed, int tiles_per_side,
                            const std::vector<int>& objects) {
  synth::SceneSpec s;
  s.seed = seed;
  s.aoi_min = {8585000, 3317000};
  s.aoi_max = {8585000 + 300.0 * tiles_per_side,
               3317000 + 300.0 * tiles_per_side};
  s.cell_size = 150;
  s.tile_width_px = 300;
  s.tile_height_px = 300;
  s.pixel_size_x = 1.0;
  s.pixel_size_y = 1.0;
  s.objects_per_class = objects;
  return s;
}

pipeline::PipelineConfig base_config(const fs::path& root) {
  pipeline::PipelineConfig cfg;
  cfg.tiles_dir = root / "tiles";
  cfg.labels_dir = root / "labels";
  cfg.output_dir = root / "out";
  cfg.timestamp = "2026-08-26T00:00:00Z";
  return cfg;
}

std::vector<std::uint8_t> slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("scan classifies tiles as ok, no-labels, and parse-error") {
  TempDir tmp("gridvec_pipe_scan");
  const auto scene =
      synth::generate_scene(scene_spec(7, 2, {3, 3, 3, 3}));
  synth::write_scene(scene, tmp.path);
  // Remove one label file and corrupt one tile.
  fs::path removed_label, corrupted_tile;
  int i = 0;
  for (const auto& tile : scene.tiles) {
    fs::path label = tmp.path / "labels" / tile.meta.source_id;
    label.replace_extension(".txt");
    if (i == 1) {
      removed_label = label;
      fs::remove(label);
    }
    if (i == 2) {
      corrupted_tile = tmp.path / "tiles" / tile.meta.source_id;
      std::ofstream out(corrupted_tile, std::ios::binary);
      out << "not a tiff";
    }
    ++i;
  }
  const auto m = pipeline::scan_tiles(tmp.path / "tiles", tmp.path / "labels");
  REQUIRE(m.entries.size() == 4);
  int ok = 0, nolab = 0, bad = 0;
  for (const auto& e : m.entries) {
    if (e.status == "ok") ++ok;
    if (e.status == "no-labels") ++nolab;
    if (e.status == "parse-error") ++bad;
    if (e.status == "ok") {
      REQUIRE(e.meta.has_value());
      CHECK(e.meta->crs_epsg == 3857);
      CHECK(!e.label_path.empty());
    }
  }
  CHECK(ok == 2);
  CHECK(nolab == 1);
  CHECK(bad == 1);
  CHECK(m.ok_count() == 2);
}

TEST_CASE("manifests round-trip through the TSV form") {
  TempDir tmp("gridvec_pipe_manifest");
  const auto scene = synth::generate_scene(scene_spec(8, 2, {1, 1, 1, 1}));
  synth::write_scene(scene, tmp.path);
  const auto m = pipeline::scan_tiles(tmp.path / "tiles", tmp.path / "labels");
  std::stringstream ss;
  pipeline::write_manifest(m, ss);
  const auto back = pipeline::read_manifest(ss);
  REQUIRE(back.entries.size() == m.entries.size());
  for (std::size_t i = 0; i < m.entries.size(); ++i) {
    CHECK(back.entries[i].tile_path == m.entries[i].tile_path);
    CHECK(back.entries[i].label_path == m.entries[i].label_path);
    CHECK(back.entries[i].status == m.entries[i].status);
  }
}

TEST_CASE("run_grid output matches the brute-force oracle") {
  TempDir tmp("gridvec_pipe_oracle");
  const auto spec = scene_spec(21, 3, {20, 15, 30, 10});
  const auto scene = synth::generate_scene(spec);
  synth::write_scene(scene, tmp.path);

  auto cfg = base_config(tmp.path);
  cfg.aoi = pipeline::AoiBounds{spec.aoi_min.easting_m, spec.aoi_min.northing_m,
                                spec.aoi_max.easting_m, spec.aoi_max.northing_m};
  const auto manifest =
      pipeline::scan_tiles(cfg.tiles_dir, cfg.labels_dir);
  const auto result = pipeline::run_grid(cfg, manifest);

  const auto cm = detect::default_class_map();
  const grid::GridSpec gspec = grid::make_grid(spec.aoi_min, spec.aoi_max, 150);
  const auto oracle = synth::oracle_counts(scene, gspec, cm, 0.25);
  CHECK(result.grid.counts == oracle.counts);
  CHECK(result.grid.accepted == oracle.accepted);
  CHECK(result.grid.below_threshold == oracle.below_threshold);
  CHECK(result.report.tiles_processed == 9);
  CHECK(result.report.label_lines == 75);
  CHECK(result.report.accepted + result.report.skipped +
            result.report.below_threshold ==
        result.report.label_lines);
}

TEST_CASE("counts.nc bytes are identical for 1 and 8 workers") {
  TempDir tmp("gridvec_pipe_workers");
  const auto spec = scene_spec(33, 4, {40, 40, 40, 40});
  const auto scene = synth::generate_scene(spec);
  synth::write_scene(scene, tmp.path);

  auto run = [&](int workers) {
    auto cfg = base_config(tmp.path);
    cfg.workers = workers;
    cfg.output_dir = tmp.path / ("out" + std::to_string(workers));
    const int rc = pipeline::cmd_grid(cfg, std::nullopt);
    REQUIRE(rc == pipeline::kOk);
    return slurp(cfg.output_dir / "counts.nc");
  };
  const auto one = run(1);
  const auto eight = run(8);
  CHECK(one == eight);
}

TEST_CASE("cmd_grid then cmd_emit appends emission planes") {
  TempDir tmp("gridvec_pipe_emit");
  const auto scene = synth::generate_scene(scene_spec(5, 2, {6, 6, 6, 6}));
  synth::write_scene(scene, tmp.path);

  auto cfg = base_config(tmp.path);
  REQUIRE(pipeline::cmd_grid(cfg, std::nullopt) == pipeline::kOk);

  const fs::path factors = tmp.path / "factors.txt";
  {
    std::ofstream out(factors);
    out << "car = 2.5\nbus = 10\nbrick_kilns = 0.5\nmiscellaneous = 1\n";
  }
  cfg.factors_path = factors;
  REQUIRE(pipeline::cmd_emit(cfg, cfg.output_dir / "counts.nc") ==
          pipeline::kOk);

  const auto ds = inventory::read_netcdf(slurp(cfg.output_dir / "emissions.nc"));
  const std::map<std::string, double> f{{"car", 2.5},
                                        {"bus", 10},
                                        {"brick_kilns", 0.5},
                                        {"miscellaneous", 1}};
  for (const auto& [name, factor] : f) {
    const auto* counts = ds.find("count_" + name);
    const auto* emis = ds.find("emis_" + name);
    REQUIRE(counts != nullptr);
    REQUIRE(emis != nullptr);
    const auto& cv = std::get<std::vector<std::int32_t>>(counts->data);
    const auto& ev = std::get<std::vector<float>>(emis->data);
    REQUIRE(cv.size() == ev.size());
    for (std::size_t i = 0; i < cv.size(); ++i)
      CHECK(ev[i] == static_cast<float>(cv[i] * factor));
  }
}

TEST_CASE("cmd_emit requires a factor file covering every class") {
  TempDir tmp("gridvec_pipe_emit_err");
  const auto scene = synth::generate_scene(scene_spec(5, 2, {2, 2, 2, 2}));
  synth::write_scene(scene, tmp.path);
  auto cfg = base_config(tmp.path);
  REQUIRE(pipeline::cmd_grid(cfg, std::nullopt) == pipeline::kOk);

  CHECK(pipeline::cmd_emit(cfg, cfg.output_dir / "counts.nc") ==
        pipeline::kConfigError);  // no --factors
  const fs::path factors = tmp.path / "factors.txt";
  {
    std::ofstream out(factors);
    out << "car = 1\n";  // missing the other classes
  }
  cfg.factors_path = factors;
  CHECK(pipeline::cmd_emit(cfg, cfg.output_dir / "counts.nc") ==
        pipeline::kConfigError);
  CHECK(pipeline::cmd_emit(cfg, tmp.path / "nope.nc") ==
        pipeline::kMissingInput);
}

TEST_CASE("cmd_render emits a decodable PPM per plane") {
  TempDir tmp("gridvec_pipe_render");
  const auto scene = synth::generate_scene(scene_spec(6, 2, {9, 9, 9, 9}));
  synth::write_scene(scene, tmp.path);
  auto cfg = base_config(tmp.path);
  REQUIRE(pipeline::cmd_grid(cfg, std::nullopt) == pipeline::kOk);

  const auto nc = cfg.output_dir / "counts.nc";
  CHECK(pipeline::cmd_render(nc, "total", 4, cfg.output_dir) == pipeline::kOk);
  CHECK(pipeline::cmd_render(nc, "car", 4, cfg.output_dir) == pipeline::kOk);
  CHECK(pipeline::cmd_render(nc, "spaceships", 4, cfg.output_dir) ==
        pipeline::kConfigError);
  CHECK(pipeline::cmd_render(tmp.path / "nope.nc", "total", 4,
                             cfg.output_dir) == pipeline::kMissingInput);
  const auto img =
      render::decode_ppm(slurp(cfg.output_dir / "heatmap_total.ppm"));
  CHECK(img.width == 4 * 4);
  CHECK(img.height == 4 * 4);
}

TEST_CASE("cmd_validate prints the georeference block and checks") {
  TempDir tmp("gridvec_pipe_validate");
  const auto scene = synth::generate_scene(scene_spec(6, 2, {1, 1, 1, 1}));
  synth::write_scene(scene, tmp.path);
  std::stringstream out;
  const int rc = pipeline::cmd_validate(tmp.path / "tiles", 1e-4, out);
  CHECK(rc == pipeline::kOk);
  const std::string text = out.str();
  CHECK(text.find("Size is 300, 300") != std::string::npos);
  CHECK(text.find("Upper Left") != std::string::npos);
  CHECK(text.find("Lower Right") != std::string::npos);
  CHECK(text.find("Center") != std::string::npos);
  CHECK(text.find("CRS: EPSG:3857") != std::string::npos);
  CHECK(text.find("FAIL") == std::string::npos);
  CHECK(pipeline::cmd_validate(tmp.path / "missing", 1e-4, out) ==
        pipeline::kMissingInput);
}

TEST_CASE("cmd_grid exit codes for missing and unusable inputs") {
  TempDir tmp("gridvec_pipe_codes");
  auto cfg = base_config(tmp.path);
  CHECK(pipeline::cmd_grid(cfg, std::nullopt) == pipeline::kMissingInput);
  fs::create_directories(cfg.tiles_dir);
  fs::create_directories(cfg.labels_dir);
  CHECK(pipeline::cmd_grid(cfg, std::nullopt) == pipeline::kMissingInput);
  // A bad class config is a config error, not a data error.
  const auto scene = synth::generate_scene(scene_spec(6, 2, {1, 1, 1, 1}));
  synth::write_scene(scene, tmp.path);
  const fs::path badcfg = tmp.path / "classes.yaml";
  {
    std::ofstream out(badcfg);
    out << "nc: 4\nnames: ['a', 'b']\n";
  }
  cfg.class_config = badcfg;
  CHECK(pipeline::cmd_grid(cfg, std::nullopt) == pipeline::kConfigError);
}

TEST_CASE("malformed labels fail the run unless --skip-bad is set") {
  TempDir tmp("gridvec_pipe_skipbad");
  const auto scene = synth::generate_scene(scene_spec(6, 2, {5, 5, 5, 5}));
  synth::write_scene(scene, tmp.path);
  // Poison one label file.
  fs::path poisoned;
  for (const auto& e : fs::directory_iterator(tmp.path / "labels")) {
    poisoned = e.path();
    break;
  }
  {
    std::ofstream out(poisoned, std::ios::app);
    out << "9 0.5 0.5 0.1 0.1 0.8\n";  // class id out of range
  }
  auto cfg = base_config(tmp.path);
  CHECK(pipeline::cmd_grid(cfg, std::nullopt) == pipeline::kDataError);
  cfg.skip_bad = true;
  cfg.output_dir = tmp.path / "out_skip";
  CHECK(pipeline::cmd_grid(cfg, std::nullopt) == pipeline::kOk);
  // The report accounts for the failed tile.
  std::ifstream report(cfg.output_dir / "report.txt");
  std::string text((std::istreambuf_iterator<char>(report)),
                   std::istreambuf_iterator<char>());
  CHECK(text.find("tiles_failed=1") != std::string::npos);
  CHECK(text.find("parse_errors=1") != std::string::npos);
  CHECK(text.find("tiles_processed=3") != std::string::npos);
}
