// Acceptance gate: seven end-to-end criteria, one pass/fail line each.
// Exit status 0 only when every criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "gridvec/detect.hpp"
#include "gridvec/evalkit.hpp"
#include "gridvec/geotiff.hpp"
#include "gridvec/grid.hpp"
#include "gridvec/inventory.hpp"
#include "gridvec/pipeline.hpp"
#include "gridvec/projection.hpp"
#include "gridvec/render.hpp"
#include "gridvec/synth.hpp"

using namespace gridvec;
namespace fs = std::filesystem;

namespace {

int g_checks_failed = 0;

void expect(bool ok, const std::string& what) {
  if (!ok) {
    ++g_checks_failed;
    std::cerr << "    check failed: " << what << "\n";
  }
}

double arcsec(double deg) { return deg * 3600.0; }

// Reference tile: published georeference of the 1169x826 example tile.
geotiff::TileMeta reference_tile() {
  geotiff::TileMeta meta;
  meta.transform.origin_easting = 8585989.719322871416807;
  meta.transform.origin_northing = 3317620.858127291314304;
  meta.transform.pixel_size_x = 0.181473787118728;
  meta.transform.pixel_size_y = -0.181598062952868;
  meta.transform.width = 1169;
  meta.transform.height = 826;
  meta.crs_epsg = 3857;
  meta.band_count = 4;
  meta.source_id = "28.542510_77.130210.tiff";
  return meta;
}

struct Anchor {
  const char* name;
  double px, py;          // pixel coordinates
  double easting, northing;  // published, 3 decimals
  double lon_deg, lat_deg;   // published DMS converted to degrees
};

constexpr double dms(double d, double m, double s) {
  return d + m / 60.0 + s / 3600.0;
}

const Anchor kAnchors[] = {
    {"Upper Left", 0, 0, 8585989.719, 3317620.858, dms(77, 7, 45.33),
     dms(28, 32, 35.17)},
    {"Lower Left", 0, 826, 8585989.719, 3317470.858, dms(77, 7, 45.33),
     dms(28, 32, 30.91)},
    {"Upper Right", 1169, 0, 8586201.862, 3317620.858, dms(77, 7, 52.19),
     dms(28, 32, 35.17)},
    {"Lower Right", 1169, 826, 8586201.862, 3317470.858, dms(77, 7, 52.19),
     dms(28, 32, 30.91)},
    {"Center", 1169 / 2.0, 826 / 2.0, 8586095.791, 3317545.858,
     dms(77, 7, 48.76), dms(28, 32, 33.04)},
};

bool criterion1_georeference() {
  const auto bytes = geotiff::write_synthetic_geotiff(reference_tile());
  auto meta = geotiff::parse_tiff_metadata(bytes);
  meta.source_id = "28.542510_77.130210.tiff";
  meta.filename_center = geotiff::parse_filename_center(meta.source_id);

  for (const auto& a : kAnchors) {
    const auto p = proj::pixel_to_projected(meta.transform, a.px, a.py);
    expect(std::abs(p.easting_m - a.easting) <= 0.001,
           std::string(a.name) + " easting");
    expect(std::abs(p.northing_m - a.northing) <= 0.001,
           std::string(a.name) + " northing");
    const auto g = proj::mercator_inverse(p);
    expect(std::abs(arcsec(g.longitude_deg - a.lon_deg)) <= 0.05,
           std::string(a.name) + " longitude DMS");
    expect(std::abs(arcsec(g.latitude_deg - a.lat_deg)) <= 0.05,
           std::string(a.name) + " latitude DMS");
  }

  // Filename center vs geotransform-derived center within 1e-4 degrees.
  const auto center = proj::mercator_inverse(proj::pixel_to_projected(
      meta.transform, meta.transform.width / 2.0, meta.transform.height / 2.0));
  expect(std::abs(center.latitude_deg - 28.542510) <= 1e-4, "center latitude");
  expect(std::abs(center.longitude_deg - 77.130210) <= 1e-4,
         "center longitude");
  const auto report = geotiff::validate_tile(meta, 1e-4);
  expect(report.all_passed(), "validate_tile on the reference fixture");
  return g_checks_failed == 0;
}

bool criterion2_projection_roundtrip() {
  // (0,0) <-> (0,0)
  const auto origin = proj::mercator_forward({0.0, 0.0});
  expect(origin.easting_m == 0.0 && origin.northing_m == 0.0,
         "(0,0) forward");
  const auto back = proj::mercator_inverse({0.0, 0.0});
  expect(back.latitude_deg == 0.0 && back.longitude_deg == 0.0,
         "(0,0) inverse");

  synth::SplitMix64 rng(2);
  double prev_northing = -1e18;
  for (int i = 0; i < 10000; ++i) {
    const double lat = -85.0 + rng.next_double() * 170.0;
    const double lon = -180.0 + rng.next_double() * 360.0;
    const auto p = proj::mercator_forward({lat, lon});
    const auto g = proj::mercator_inverse(p);
    if (std::abs(g.latitude_deg - lat) > 1e-9 ||
        std::abs(g.longitude_deg - lon) > 1e-9) {
      expect(false, "round-trip exceeded 1e-9 degrees");
      return false;
    }
    (void)prev_northing;
  }
  // Monotonicity along each axis.
  for (int i = 1; i <= 84; ++i) {
    expect(proj::mercator_forward({double(i), 0}).northing_m >
               proj::mercator_forward({double(i - 1), 0}).northing_m,
           "northing monotone in latitude");
    expect(proj::mercator_forward({0, double(i)}).easting_m >
               proj::mercator_forward({0, double(i - 1)}).easting_m,
           "easting monotone in longitude");
  }
  return g_checks_failed == 0;
}

bool criterion3_oracle_equivalence() {
  const auto cm = detect::default_class_map();
  synth::SplitMix64 meta_rng(3);
  const double kThresholds[] = {0.0, 0.25, 0.5, 0.9};

  for (int scene_i = 0; scene_i < 200; ++scene_i) {
    synth::SceneSpec spec;
    spec.seed = meta_rng.next();
    // Tiles are 300 m (8 px at 37.5 m/px); grid cells 150 m, so an
    // n-tile-per-side scene grids to 2n x 2n cells (up to 40x40).
    const int ntx = 1 + static_cast<int>(meta_rng.next() % 20);
    const int nty = 1 + static_cast<int>(meta_rng.next() % 20);
    spec.aoi_min = {8.5e6 + meta_rng.next_double() * 1e4,
                    3.3e6 + meta_rng.next_double() * 1e4};
    spec.aoi_max = {spec.aoi_min.easting_m + 300.0 * ntx,
                    spec.aoi_min.northing_m + 300.0 * nty};
    spec.cell_size = 150;
    spec.tile_width_px = 8;
    spec.tile_height_px = 8;
    spec.pixel_size_x = 37.5;
    spec.pixel_size_y = 37.5;
    const int budget = scene_i % 20 == 0 ? 5000 : 400;
    spec.objects_per_class.assign(4, 0);
    for (int c = 0; c < 4; ++c)
      spec.objects_per_class[c] = static_cast<int>(meta_rng.next() % (budget / 4));

    const auto scene = synth::generate_scene(spec);
    const auto gspec = grid::make_grid(spec.aoi_min, spec.aoi_max, 150);

    for (double t : kThresholds) {
      // In-memory pipeline: parse emitted labels, geo-map, accumulate, merge.
      auto pipeline_grid = grid::zero_grid(gspec, cm.nc(), t);
      for (const auto& tile : scene.tiles) {
        const auto dets = detect::parse_yolo_labels(tile.label_text, cm);
        const auto geo = detect::detections_to_geo(dets, tile.meta);
        pipeline_grid =
            grid::merge(pipeline_grid, grid::accumulate(gspec, geo, cm, t));
      }
      const auto oracle = synth::oracle_counts(scene, gspec, cm, t);
      if (pipeline_grid.counts != oracle.counts ||
          pipeline_grid.accepted != oracle.accepted ||
          pipeline_grid.below_threshold != oracle.below_threshold ||
          pipeline_grid.skipped != oracle.skipped) {
        expect(false, "pipeline/oracle mismatch, scene " +
                          std::to_string(scene_i) + " threshold " +
                          std::to_string(t));
        return false;
      }
    }
  }

  // Merge monoid laws on random grids.
  synth::SplitMix64 rng(303);
  grid::GridSpec spec{0, 0, 150, 9, 7};
  auto random_grid = [&]() {
    auto g = grid::zero_grid(spec, 4, 0.25);
    for (auto& plane : g.counts)
      for (auto& v : plane) {
        v = static_cast<std::int32_t>(rng.next() % 5);
        g.accepted += v;
      }
    return g;
  };
  auto equal = [](const grid::CountGrid& a, const grid::CountGrid& b) {
    return a.counts == b.counts && a.accepted == b.accepted &&
           a.skipped == b.skipped && a.below_threshold == b.below_threshold;
  };
  for (int i = 0; i < 50; ++i) {
    const auto a = random_grid(), b = random_grid(), c = random_grid();
    const auto zero = grid::zero_grid(spec, 4, 0.25);
    expect(equal(grid::merge(a, zero), a), "merge identity");
    expect(equal(grid::merge(a, b), grid::merge(b, a)), "merge commutativity");
    expect(equal(grid::merge(grid::merge(a, b), c),
                 grid::merge(a, grid::merge(b, c))),
           "merge associativity");
  }
  return g_checks_failed == 0;
}

bool criterion4_netcdf(const fs::path& workdir) {
  const auto cm = detect::default_class_map();
  synth::SplitMix64 rng(4);

  for (int i = 0; i < 100; ++i) {
    const int rows = 1 + static_cast<int>(rng.next() % 12);
    const int cols = 1 + static_cast<int>(rng.next() % 12);
    grid::GridSpec spec{8.5e6 + rng.next_double() * 1e5,
                        3.3e6 + rng.next_double() * 1e5, 150, cols, rows};
    auto g = grid::zero_grid(spec, cm.nc(), 0.25);
    for (auto& plane : g.counts)
      for (auto& v : plane) v = static_cast<std::int32_t>(rng.next() % 100);
    inventory::EmissionFactorTable table;
    for (const auto& name : cm.names)
      table.factors[name] = rng.next_double() * 10;
    const auto ds = inventory::build_inventory(
        g, cm, i % 2 ? &table : nullptr, "2026-08-26T00:00:00Z", "acceptance");
    const auto bytes = inventory::write_netcdf(ds);
    expect(bytes.size() >= 4 && bytes[0] == 'C' && bytes[1] == 'D' &&
               bytes[2] == 'F' && bytes[3] == 0x01,
           "magic bytes");
    if (!(inventory::read_netcdf(bytes) == ds)) {
      expect(false, "round-trip mismatch, dataset " + std::to_string(i));
      return false;
    }
  }

  // Truncation sweep.
  grid::GridSpec spec{0, 0, 150, 5, 4};
  auto g = grid::zero_grid(spec, cm.nc(), 0.25);
  g.at(1, 2, 3) = 7;
  const auto bytes = inventory::write_netcdf(
      inventory::build_inventory(g, cm, nullptr, "2026-08-26T00:00:00Z", "a"));
  for (std::size_t cut = 0; cut < bytes.size(); ++cut) {
    bool threw = false;
    try {
      (void)inventory::read_netcdf(std::span(bytes.data(), cut));
    } catch (const inventory::NetcdfError&) {
      threw = true;
    } catch (...) {
    }
    if (!threw) {
      expect(false, "truncation at " + std::to_string(cut) + " not rejected");
      return false;
    }
  }

  // Worker-count variation with a pinned timestamp.
  synth::SceneSpec sspec;
  sspec.seed = 44;
  sspec.aoi_min = {8585000, 3317000};
  sspec.aoi_max = {8585000 + 300.0 * 6, 3317000 + 300.0 * 6};
  sspec.tile_width_px = 8;
  sspec.tile_height_px = 8;
  sspec.pixel_size_x = 37.5;
  sspec.pixel_size_y = 37.5;
  sspec.objects_per_class = {100, 100, 100, 100};
  const auto scene = synth::generate_scene(sspec);
  const auto dir = workdir / "nc_workers";
  fs::remove_all(dir);
  synth::write_scene(scene, dir);
  auto run = [&](int workers) {
    pipeline::PipelineConfig cfg;
    cfg.tiles_dir = dir / "tiles";
    cfg.labels_dir = dir / "labels";
    cfg.workers = workers;
    cfg.timestamp = "2026-08-26T00:00:00Z";
    cfg.output_dir = dir / ("out" + std::to_string(workers));
    expect(pipeline::cmd_grid(cfg, std::nullopt) == pipeline::kOk, "cmd_grid");
    std::ifstream in(cfg.output_dir / "counts.nc", std::ios::binary);
    return std::vector<char>((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  };
  expect(run(1) == run(8), "counts.nc identical across worker counts");
  fs::remove_all(dir);
  return g_checks_failed == 0;
}

// Exhaustive assignment oracle: enumerate, over predictions in confidence
// order, every injective assignment to ground-truth boxes (or none) with
// IoU >= iou_min, and keep the lexicographically greatest IoU sequence.
// Unmatched slots rank below any match.
struct ExhaustiveOracle {
  const std::vector<eval::LabeledBox>& gt;
  const std::vector<eval::LabeledBox>& preds;
  double iou_min;
  std::vector<int> order;       // pred indices, descending confidence
  std::vector<double> best_seq;
  std::vector<int> best_assign;  // per order slot: gt index or -1

  void search(std::size_t slot, std::vector<bool>& taken,
              std::vector<double>& seq, std::vector<int>& assign) {
    if (slot == order.size()) {
      if (best_assign.empty() || seq > best_seq) {
        best_seq = seq;
        best_assign = assign;
      }
      return;
    }
    const int p = order[slot];
    for (std::size_t g = 0; g < gt.size(); ++g) {
      if (taken[g]) continue;
      const double v = eval::iou(gt[g], preds[p]);
      if (v < iou_min) continue;
      taken[g] = true;
      seq.push_back(v);
      assign.push_back(static_cast<int>(g));
      search(slot + 1, taken, seq, assign);
      taken[g] = false;
      seq.pop_back();
      assign.pop_back();
    }
    seq.push_back(-1.0);  // unmatched slot ranks below any IoU
    assign.push_back(-1);
    search(slot + 1, taken, seq, assign);
    seq.pop_back();
    assign.pop_back();
  }

  std::vector<int> run() {
    order.resize(preds.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [this](int a, int b) {
      return preds[a].confidence.value_or(0) > preds[b].confidence.value_or(0);
    });
    std::vector<bool> taken(gt.size(), false);
    std::vector<double> seq;
    std::vector<int> assign;
    search(0, taken, seq, assign);
    return best_assign;  // parallel to `order`
  }
};

bool criterion5_metrics() {
  const int nc = 3;
  synth::SplitMix64 rng(5);
  auto random_box = [&](bool with_conf) {
    eval::LabeledBox b;
    b.class_id = static_cast<int>(rng.next() % nc);
    b.w = 0.05 + rng.next_double() * 0.25;
    b.h = 0.05 + rng.next_double() * 0.25;
    b.cx = b.w / 2 + rng.next_double() * (1 - b.w);
    b.cy = b.h / 2 + rng.next_double() * (1 - b.h);
    if (with_conf) b.confidence = rng.next_double();
    return b;
  };

  // Perfect detector: F1 = 1 at every threshold.
  {
    std::vector<std::vector<eval::LabeledBox>> gt_imgs, pred_imgs;
    for (int img = 0; img < 3; ++img) {
      std::vector<eval::LabeledBox> gt;
      for (int i = 0; i < 6; ++i) gt.push_back(random_box(false));
      auto preds = gt;
      for (auto& p : preds) p.confidence = 1.0;
      gt_imgs.push_back(gt);
      pred_imgs.push_back(preds);
    }
    const auto curve = eval::f1_confidence_curve(gt_imgs, pred_imgs, nc, 0.5,
                                                 eval::default_thresholds());
    for (const auto& pt : curve.points)
      expect(pt.all_class_f1 == 1.0, "perfect detector F1");
    // Empty detector: F1 = 0 everywhere.
    std::vector<std::vector<eval::LabeledBox>> empty(gt_imgs.size());
    const auto zero = eval::f1_confidence_curve(gt_imgs, empty, nc, 0.5,
                                                eval::default_thresholds());
    for (const auto& pt : zero.points)
      expect(pt.all_class_f1 == 0.0, "empty detector F1");
  }

  // Greedy matching equals the exhaustive assignment oracle (>= 500 cases).
  for (int trial = 0; trial < 500; ++trial) {
    const int ng = static_cast<int>(rng.next() % 6);
    const int np = static_cast<int>(rng.next() % 6);
    std::vector<eval::LabeledBox> gt, preds;
    for (int i = 0; i < ng; ++i) gt.push_back(random_box(false));
    for (int i = 0; i < np; ++i) preds.push_back(random_box(true));
    // Overlap some predictions with gt so matches occur.
    for (std::size_t i = 0; i + 1 < preds.size() && i < gt.size(); i += 2) {
      preds[i] = gt[i];
      preds[i].cx += rng.next_double() * 0.05;
      preds[i].confidence = rng.next_double();
    }
    const double iou_min = trial % 2 ? 0.5 : 0.2;
    const auto got = eval::match_detections(gt, preds, iou_min);
    ExhaustiveOracle oracle{gt, preds, iou_min, {}, {}, {}};
    const auto want = oracle.run();
    // Compare slot-by-slot in confidence order.
    std::vector<int> got_assign(preds.size(), -1);
    for (const auto& pr : got.pairs) got_assign[pr.pred_index] = pr.gt_index;
    for (std::size_t slot = 0; slot < oracle.order.size(); ++slot) {
      if (got_assign[oracle.order[slot]] != want[slot]) {
        expect(false, "greedy/exhaustive mismatch, trial " +
                          std::to_string(trial));
        return false;
      }
    }
    // Confusion totals conserve box counts.
    const auto cmx = eval::confusion_matrix(got, gt, preds, nc);
    expect(cmx.total() == static_cast<std::int64_t>(
                              gt.size() + got.unmatched_preds.size()),
           "confusion total conservation");
  }

  // Recall non-increasing in the threshold.
  {
    std::vector<std::vector<eval::LabeledBox>> gt_imgs, pred_imgs;
    for (int img = 0; img < 4; ++img) {
      std::vector<eval::LabeledBox> gt;
      for (int i = 0; i < 8; ++i) gt.push_back(random_box(false));
      std::vector<eval::LabeledBox> preds;
      for (std::size_t i = 0; i < gt.size(); ++i) {
        auto p = gt[i];
        p.cx += rng.next_double() * 0.03;
        p.confidence = rng.next_double();
        preds.push_back(p);
      }
      gt_imgs.push_back(gt);
      pred_imgs.push_back(preds);
    }
    const auto thresholds = eval::default_thresholds();
    const auto curve =
        eval::f1_confidence_curve(gt_imgs, pred_imgs, nc, 0.5, thresholds);
    // Recompute recall per threshold from matches; assert non-increasing.
    double prev = 2.0;
    for (double t : thresholds) {
      long tp = 0, fn = 0;
      for (std::size_t img = 0; img < gt_imgs.size(); ++img) {
        std::vector<eval::LabeledBox> kept;
        for (const auto& p : pred_imgs[img])
          if (p.confidence.value_or(0) >= t) kept.push_back(p);
        const auto m = eval::match_detections(gt_imgs[img], kept, 0.5);
        for (const auto& pr : m.pairs) {
          if (gt_imgs[img][pr.gt_index].class_id ==
              kept[pr.pred_index].class_id)
            ++tp;
          else
            ++fn;
        }
        fn += static_cast<long>(m.missed_gt.size());
      }
      const double recall =
          (tp + fn) == 0 ? 0.0 : static_cast<double>(tp) / (tp + fn);
      expect(recall <= prev + 1e-12, "recall non-increasing");
      prev = recall;
    }
    (void)curve;
  }
  return g_checks_failed == 0;
}

bool criterion6_heatmaps() {
  const auto cm = detect::default_class_map();
  const auto scale = render::hot_scale();

  // Determinism on a random grid.
  synth::SplitMix64 rng(6);
  auto g = grid::zero_grid({0, 0, 150, 10, 8}, cm.nc(), 0.25);
  for (auto& plane : g.counts)
    for (auto& v : plane) v = static_cast<std::int32_t>(rng.next() % 25);
  const auto a = render::encode_ppm(render::render_heatmap(g, cm, "total", 3, scale));
  const auto b = render::encode_ppm(render::render_heatmap(g, cm, "total", 3, scale));
  expect(a == b, "repeated renders byte-identical");

  // All-zero grid: uniform stop-0 color.
  const auto zero = grid::zero_grid({0, 0, 150, 4, 4}, cm.nc(), 0.25);
  const auto zimg = render::render_heatmap(zero, cm, "total", 2, scale);
  for (const auto& px : zimg.pixels)
    if (px != render::Rgb{0, 0, 0}) {
      expect(false, "zero grid not uniform stop-0");
      return false;
    }

  // Single hot cell: exactly cell_px^2 stop-1 pixels.
  auto hot = grid::zero_grid({0, 0, 150, 6, 5}, cm.nc(), 0.25);
  hot.at(0, 3, 2) = 11;
  const int cell_px = 4;
  const auto himg = render::render_heatmap(hot, cm, "total", cell_px, scale);
  int nhot = 0;
  for (const auto& px : himg.pixels)
    if (px == render::Rgb{255, 255, 255}) ++nhot;
  expect(nhot == cell_px * cell_px, "single hot cell pixel count");

  // Northernmost row renders at the image top.
  auto north = grid::zero_grid({0, 0, 150, 2, 3}, cm.nc(), 0.25);
  north.at(0, 2, 1) = 1;  // grid row 2 = max northing
  const auto nimg = render::render_heatmap(north, cm, "total", 1, scale);
  expect(nimg.at(1, 0) == render::Rgb{255, 255, 255},
         "north row at image top");
  expect(nimg.at(1, 2) == render::Rgb{0, 0, 0}, "south row at image bottom");
  return g_checks_failed == 0;
}

bool criterion7_throughput(const fs::path& workdir) {
  // 20,000 tiles (160 x 125), ~50,000 detections.
  synth::SceneSpec spec;
  spec.seed = 7;
  spec.aoi_min = {8500000, 3300000};
  spec.aoi_max = {8500000 + 300.0 * 160, 3300000 + 300.0 * 125};
  spec.cell_size = 150;
  spec.tile_width_px = 8;
  spec.tile_height_px = 8;
  spec.pixel_size_x = 37.5;
  spec.pixel_size_y = 37.5;
  spec.objects_per_class = {12500, 12500, 12500, 12500};

  const auto dir = workdir / "throughput";
  fs::remove_all(dir);
  std::cerr << "    generating 20,000-tile corpus...\n";
  const auto scene = synth::generate_scene(spec);
  synth::write_scene(scene, dir);

  const auto t0 = std::chrono::steady_clock::now();
  auto run = [&](int workers) {
    pipeline::PipelineConfig cfg;
    cfg.tiles_dir = dir / "tiles";
    cfg.labels_dir = dir / "labels";
    cfg.workers = workers;
    cfg.timestamp = "2026-08-26T00:00:00Z";
    cfg.output_dir = dir / ("out" + std::to_string(workers));
    expect(pipeline::cmd_scan(cfg) == pipeline::kOk, "cmd_scan");
    expect(pipeline::cmd_grid(cfg, std::nullopt) == pipeline::kOk, "cmd_grid");
    std::ifstream in(cfg.output_dir / "counts.nc", std::ios::binary);
    return std::vector<char>((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  };
  const auto nc8 = run(8);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  expect(elapsed < 60.0,
         "scan+grid wall time " + std::to_string(elapsed) + " s");

  const auto nc1 = run(1);
  expect(nc1 == nc8, "workers=1 and workers=8 byte-identical");

  // Sanity: the manifest lists all 20,000 tiles as ok.
  const auto manifest =
      pipeline::scan_tiles(dir / "tiles", dir / "labels");
  expect(manifest.entries.size() == 20000, "20,000 manifest entries");
  expect(manifest.ok_count() == 20000, "all entries ok");
  fs::remove_all(dir);
  return g_checks_failed == 0;
}

}  // namespace

int main() {
  const fs::path workdir = fs::temp_directory_path() / "gridvec_acceptance";
  fs::create_directories(workdir);

  struct Criterion {
    const char* label;
    std::function<bool()> fn;
  };
  const Criterion criteria[] = {
      {"1 georeference fixture", [] { return criterion1_georeference(); }},
      {"2 projection round-trip", [] { return criterion2_projection_roundtrip(); }},
      {"3 oracle equivalence", [] { return criterion3_oracle_equivalence(); }},
      {"4 netcdf conformance", [&] { return criterion4_netcdf(workdir); }},
      {"5 metrics machinery", [] { return criterion5_metrics(); }},
      {"6 heatmap determinism", [] { return criterion6_heatmaps(); }},
      {"7 throughput smoke", [&] { return criterion7_throughput(workdir); }},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    g_checks_failed = 0;
    bool ok = false;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      ok = c.fn();
    } catch (const std::exception& ex) {
      std::cerr << "    exception: " << ex.what() << "\n";
      ok = false;
    }
    const double sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    std::printf("criterion %-28s %s  (%.2f s)\n", c.label,
                ok ? "PASS" : "FAIL", sec);
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  fs::remove_all(workdir);
  return failures == 0 ? 0 : 1;
}
