#include "gridvec/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <thread>

#include "gridvec/evalkit.hpp"
#include "gridvec/render.hpp"
#include "gridvec/synth.hpp"

namespace gridvec::pipeline {

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& p) {
  const std::string s = read_file(p);
  return {s.begin(), s.end()};
}

void write_bytes(const std::filesystem::path& p,
                 std::span<const std::uint8_t> bytes) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    if (tab == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

detect::ClassMap load_class_map(const PipelineConfig& cfg) {
  if (cfg.class_config.empty()) return detect::default_class_map();
  return detect::parse_class_config(read_file(cfg.class_config));
}

// Bounding box of all tile footprints, extents snapped up to whole cells.
AoiBounds aoi_from_tiles(const Manifest& m, double cell_size) {
  AoiBounds b{std::numeric_limits<double>::max(),
              std::numeric_limits<double>::max(),
              std::numeric_limits<double>::lowest(),
              std::numeric_limits<double>::lowest()};
  bool any = false;
  for (const auto& e : m.entries) {
    if (!e.meta) continue;
    const auto& t = e.meta->transform;
    b.min_easting = std::min(b.min_easting, t.origin_easting);
    b.max_easting =
        std::max(b.max_easting, t.origin_easting + t.width * t.pixel_size_x);
    b.max_northing = std::max(b.max_northing, t.origin_northing);
    b.min_northing =
        std::min(b.min_northing, t.origin_northing + t.height * t.pixel_size_y);
    any = true;
  }
  if (!any) throw std::runtime_error("no parsed tiles to derive an AOI from");
  const auto spec = grid::make_grid({b.min_easting, b.min_northing},
                                    {b.max_easting, b.max_northing}, cell_size);
  b.max_easting = b.min_easting + spec.n_cols * cell_size;
  b.max_northing = b.min_northing + spec.n_rows * cell_size;
  return b;
}

}  // namespace

std::size_t Manifest::ok_count() const {
  std::size_t n = 0;
  for (const auto& e : entries)
    if (e.status == "ok") ++n;
  return n;
}

Manifest scan_tiles(const std::filesystem::path& tiles_dir,
                    const std::filesystem::path& labels_dir) {
  Manifest m;
  std::vector<std::filesystem::path> paths;
  for (const auto& entry : std::filesystem::directory_iterator(tiles_dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension().string();
    if (ext == ".tiff" || ext == ".tif") paths.push_back(entry.path());
  }
  std::sort(paths.begin(), paths.end());

  for (const auto& p : paths) {
    ManifestEntry e;
    e.tile_path = p;
    try {
      const auto bytes = read_bytes(p);
      auto meta = geotiff::parse_tiff_metadata(bytes);
      meta.source_id = p.filename().string();
      try {
        meta.filename_center = geotiff::parse_filename_center(meta.source_id);
      } catch (const geotiff::PatternMismatch&) {
        // Non-fatal; the geotransform is the authoritative georeference.
      }
      e.meta = std::move(meta);
      std::filesystem::path label =
          labels_dir / p.filename().replace_extension(".txt");
      if (std::filesystem::exists(label)) {
        e.label_path = label;
        e.status = "ok";
      } else {
        e.status = "no-labels";
      }
    } catch (const std::exception& ex) {
      e.status = "parse-error";
      e.error = ex.what();
    }
    m.entries.push_back(std::move(e));
  }
  return m;
}

void write_manifest(const Manifest& m, std::ostream& out) {
  out << "tile\tlabel\tstatus\twidth\theight\torigin_easting\torigin_northing"
         "\tpixel_size_x\tpixel_size_y\tepsg\terror\n";
  for (const auto& e : m.entries) {
    out << e.tile_path.string() << "\t" << e.label_path.string() << "\t"
        << e.status;
    if (e.meta) {
      const auto& t = e.meta->transform;
      char buf[160];
      std::snprintf(buf, sizeof(buf), "\t%d\t%d\t%.9f\t%.9f\t%.15g\t%.15g\t%d",
                    t.width, t.height, t.origin_easting, t.origin_northing,
                    t.pixel_size_x, t.pixel_size_y, e.meta->crs_epsg);
      out << buf;
    } else {
      out << "\t\t\t\t\t\t\t";
    }
    out << "\t" << e.error << "\n";
  }
}

Manifest read_manifest(std::istream& in) {
  Manifest m;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first) {  // header
      first = false;
      continue;
    }
    if (line.empty()) continue;
    const auto f = split_tabs(line);
    if (f.size() < 3) throw std::runtime_error("malformed manifest line");
    ManifestEntry e;
    e.tile_path = f[0];
    e.label_path = f[1];
    e.status = f[2];
    m.entries.push_back(std::move(e));
  }
  return m;
}

GridRunResult run_grid(const PipelineConfig& cfg, const Manifest& manifest) {
  const detect::ClassMap cm = load_class_map(cfg);

  std::vector<const ManifestEntry*> work;
  for (const auto& e : manifest.entries)
    if (e.status == "ok") work.push_back(&e);

  const AoiBounds aoi =
      cfg.aoi ? *cfg.aoi : aoi_from_tiles(manifest, cfg.cell_size);
  const grid::GridSpec spec =
      grid::make_grid({aoi.min_easting, aoi.min_northing},
                      {aoi.max_easting, aoi.max_northing}, cfg.cell_size);

  const int workers = std::max(1, cfg.workers);
  struct PartialResult {
    grid::CountGrid grid;
    std::int64_t label_lines = 0;
    std::int64_t tiles_processed = 0;
    std::int64_t tiles_failed = 0;
    std::int64_t parse_errors = 0;
    std::string error;
  };
  std::vector<PartialResult> partials(workers);

  auto process_range = [&](int wi, std::size_t begin, std::size_t end) {
    PartialResult& pr = partials[wi];
    pr.grid = grid::zero_grid(spec, cm.nc(), cfg.conf_threshold);
    for (std::size_t i = begin; i < end; ++i) {
      const ManifestEntry& entry = *work[i];
      try {
        geotiff::TileMeta meta;
        if (entry.meta) {
          meta = *entry.meta;
        } else {
          const auto bytes = read_bytes(entry.tile_path);
          meta = geotiff::parse_tiff_metadata(bytes);
          meta.source_id = entry.tile_path.filename().string();
        }
        const std::string label_text = read_file(entry.label_path);
        std::vector<detect::Detection> dets;
        try {
          dets = detect::parse_yolo_labels(label_text, cm);
        } catch (const detect::LabelError&) {
          ++pr.parse_errors;
          ++pr.tiles_failed;
          if (!cfg.skip_bad) throw;
          continue;
        }
        pr.label_lines += static_cast<std::int64_t>(dets.size());
        const auto geo = detect::detections_to_geo(dets, meta);
        pr.grid = grid::merge(
            pr.grid, grid::accumulate(spec, geo, cm, cfg.conf_threshold));
        ++pr.tiles_processed;
      } catch (const std::exception& ex) {
        ++pr.tiles_failed;
        if (!cfg.skip_bad) {
          pr.error = entry.tile_path.string() + ": " + ex.what();
          return;
        }
      }
    }
  };

  if (workers == 1) {
    process_range(0, 0, work.size());
  } else {
    std::vector<std::thread> threads;
    const std::size_t chunk = (work.size() + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const std::size_t begin = std::min(work.size(), w * chunk);
      const std::size_t end = std::min(work.size(), begin + chunk);
      threads.emplace_back(process_range, w, begin, end);
    }
    for (auto& t : threads) t.join();
  }

  GridRunResult result;
  result.class_map = cm;
  result.grid = grid::zero_grid(spec, cm.nc(), cfg.conf_threshold);
  for (const auto& pr : partials) {
    if (!pr.error.empty()) throw std::runtime_error(pr.error);
    if (pr.grid.counts.empty()) continue;  // worker had no range
    result.grid = grid::merge(result.grid, pr.grid);
    result.report.label_lines += pr.label_lines;
    result.report.tiles_processed += pr.tiles_processed;
    result.report.tiles_failed += pr.tiles_failed;
    result.report.parse_errors += pr.parse_errors;
  }
  result.report.accepted = result.grid.accepted;
  result.report.skipped = result.grid.skipped;
  result.report.below_threshold = result.grid.below_threshold;
  return result;
}

int cmd_scan(const PipelineConfig& cfg) {
  if (!std::filesystem::is_directory(cfg.tiles_dir)) {
    std::cerr << "gridvec: tiles directory " << cfg.tiles_dir
              << " does not exist\n";
    return kMissingInput;
  }
  const Manifest m = scan_tiles(cfg.tiles_dir, cfg.labels_dir);
  std::filesystem::create_directories(cfg.output_dir);
  std::ofstream out(cfg.output_dir / "manifest.tsv", std::ios::binary);
  write_manifest(m, out);
  std::cout << "scanned " << m.entries.size() << " tiles, " << m.ok_count()
            << " ok\n";
  return m.ok_count() >= 1 ? kOk : kMissingInput;
}

int cmd_grid(const PipelineConfig& cfg,
             const std::optional<std::filesystem::path>& manifest_path) {
  Manifest manifest;
  try {
    if (manifest_path) {
      std::ifstream in(*manifest_path);
      if (!in) {
        std::cerr << "gridvec: cannot open manifest " << *manifest_path << "\n";
        return kMissingInput;
      }
      manifest = read_manifest(in);
      // Re-parse tile metadata; the manifest stores pairing, not geometry.
      for (auto& e : manifest.entries) {
        if (e.status != "ok") continue;
        try {
          auto meta = geotiff::parse_tiff_metadata(read_bytes(e.tile_path));
          meta.source_id = e.tile_path.filename().string();
          e.meta = std::move(meta);
        } catch (const std::exception& ex) {
          e.status = "parse-error";
          e.error = ex.what();
        }
      }
    } else {
      if (!std::filesystem::is_directory(cfg.tiles_dir)) {
        std::cerr << "gridvec: tiles directory " << cfg.tiles_dir
                  << " does not exist\n";
        return kMissingInput;
      }
      manifest = scan_tiles(cfg.tiles_dir, cfg.labels_dir);
    }
    if (manifest.ok_count() == 0) {
      std::cerr << "gridvec: no usable tile/label pairs\n";
      return kMissingInput;
    }

    const GridRunResult result = run_grid(cfg, manifest);
    const auto ds = inventory::build_inventory(
        result.grid, result.class_map, nullptr, cfg.timestamp, "gridvec 0.1.0");
    std::filesystem::create_directories(cfg.output_dir);
    write_bytes(cfg.output_dir / "counts.nc", inventory::write_netcdf(ds));

    std::ofstream report(cfg.output_dir / "report.txt", std::ios::binary);
    report << "tiles_processed=" << result.report.tiles_processed << "\n"
           << "tiles_failed=" << result.report.tiles_failed << "\n"
           << "label_lines=" << result.report.label_lines << "\n"
           << "accepted=" << result.report.accepted << "\n"
           << "skipped=" << result.report.skipped << "\n"
           << "below_threshold=" << result.report.below_threshold << "\n"
           << "parse_errors=" << result.report.parse_errors << "\n";
    std::cout << "accepted " << result.report.accepted << " detections ("
              << result.report.skipped << " outside AOI, "
              << result.report.below_threshold << " below threshold)\n";
    return kOk;
  } catch (const detect::ConfigError& ex) {
    std::cerr << "gridvec: " << ex.what() << "\n";
    return kConfigError;
  } catch (const std::exception& ex) {
    std::cerr << "gridvec: " << ex.what() << "\n";
    return kDataError;
  }
}

int cmd_emit(const PipelineConfig& cfg,
             const std::filesystem::path& counts_nc) {
  if (!cfg.factors_path) {
    std::cerr << "gridvec: --factors is required for emit\n";
    return kConfigError;
  }
  try {
    if (!std::filesystem::exists(counts_nc)) {
      std::cerr << "gridvec: " << counts_nc << " not found\n";
      return kMissingInput;
    }
    const auto ds = inventory::read_netcdf(read_bytes(counts_nc));

    // Reconstruct class order from the count_<class> variables.
    detect::ClassMap cm;
    for (const auto& v : ds.variables)
      if (v.name.starts_with("count_")) cm.names.push_back(v.name.substr(6));
    if (cm.nc() == 0) {
      std::cerr << "gridvec: no count variables in " << counts_nc << "\n";
      return kDataError;
    }

    std::vector<std::string> warnings;
    const auto table = inventory::load_emission_factors(
        read_file(*cfg.factors_path), cm, &warnings);
    for (const auto& w : warnings) std::cerr << "gridvec: warning: " << w << "\n";

    inventory::InventoryDataset out = ds;
    for (const auto& name : cm.names) {
      const auto* counts = ds.find("count_" + name);
      const auto& iv = std::get<std::vector<std::int32_t>>(counts->data);
      const double factor = table.factors.at(name);
      std::vector<float> emis(iv.size());
      for (std::size_t i = 0; i < iv.size(); ++i)
        emis[i] = static_cast<float>(iv[i] * factor);
      inventory::NcVariable v;
      v.name = "emis_" + name;
      v.dim_ids = counts->dim_ids;
      v.attributes = {{"units", table.unit}, {"class", name}};
      v.data = std::move(emis);
      out.variables.push_back(std::move(v));
    }
    std::filesystem::create_directories(cfg.output_dir);
    write_bytes(cfg.output_dir / "emissions.nc", inventory::write_netcdf(out));
    return kOk;
  } catch (const inventory::FactorError& ex) {
    std::cerr << "gridvec: " << ex.what() << "\n";
    return kConfigError;
  } catch (const std::exception& ex) {
    std::cerr << "gridvec: " << ex.what() << "\n";
    return kDataError;
  }
}

namespace {

// Rebuilds a CountGrid view from a counts.nc dataset for rendering.
grid::CountGrid grid_from_dataset(const inventory::InventoryDataset& ds,
                                  detect::ClassMap& cm) {
  const auto* lat = ds.find("latitude");
  const auto* lon = ds.find("longitude");
  if (!lat || !lon) throw std::runtime_error("missing coordinate variables");
  grid::CountGrid g;
  g.spec.n_rows = static_cast<int>(
      std::get<std::vector<double>>(lat->data).size());
  g.spec.n_cols = static_cast<int>(
      std::get<std::vector<double>>(lon->data).size());
  for (const auto& v : ds.variables) {
    if (!v.name.starts_with("count_")) continue;
    cm.names.push_back(v.name.substr(6));
    g.counts.push_back(std::get<std::vector<std::int32_t>>(v.data));
  }
  if (g.counts.empty()) throw std::runtime_error("no count variables");
  return g;
}

}  // namespace

int cmd_render(const std::filesystem::path& counts_nc, const std::string& plane,
               int cell_px, const std::filesystem::path& output_dir) {
  try {
    if (!std::filesystem::exists(counts_nc)) {
      std::cerr << "gridvec: " << counts_nc << " not found\n";
      return kMissingInput;
    }
    const auto ds = inventory::read_netcdf(read_bytes(counts_nc));
    detect::ClassMap cm;
    const grid::CountGrid g = grid_from_dataset(ds, cm);
    const auto img =
        render::render_heatmap(g, cm, plane, cell_px, render::hot_scale());
    std::filesystem::create_directories(output_dir);
    write_bytes(output_dir / ("heatmap_" + plane + ".ppm"),
                render::encode_ppm(img));
    return kOk;
  } catch (const render::RenderError& ex) {
    std::cerr << "gridvec: " << ex.what() << "\n";
    return kConfigError;
  } catch (const std::exception& ex) {
    std::cerr << "gridvec: " << ex.what() << "\n";
    return kDataError;
  }
}

int cmd_eval(const std::filesystem::path& gt_dir,
             const std::filesystem::path& pred_dir,
             const std::filesystem::path& class_config, double iou_min,
             const std::filesystem::path& output_dir) {
  try {
    const detect::ClassMap cm =
        class_config.empty() ? detect::default_class_map()
                             : detect::parse_class_config(read_file(class_config));

    std::vector<std::filesystem::path> gt_files;
    for (const auto& entry : std::filesystem::directory_iterator(gt_dir))
      if (entry.path().extension() == ".txt") gt_files.push_back(entry.path());
    std::sort(gt_files.begin(), gt_files.end());

    std::vector<std::vector<eval::LabeledBox>> gt_by_image, preds_by_image;
    for (const auto& gt_path : gt_files) {
      const auto pred_path = pred_dir / gt_path.filename();
      if (!std::filesystem::exists(pred_path)) continue;
      auto to_boxes = [&cm](const std::string& text) {
        std::vector<eval::LabeledBox> boxes;
        for (const auto& d : detect::parse_yolo_labels(text, cm))
          boxes.push_back({d.class_id, d.cx, d.cy, d.w, d.h, d.confidence});
        return boxes;
      };
      gt_by_image.push_back(to_boxes(read_file(gt_path)));
      preds_by_image.push_back(to_boxes(read_file(pred_path)));
    }
    if (gt_by_image.empty()) {
      std::cerr << "gridvec: no ground-truth/prediction pairs\n";
      return kMissingInput;
    }

    const auto thresholds = eval::default_thresholds();
    const auto curve = eval::f1_confidence_curve(gt_by_image, preds_by_image,
                                                 cm.nc(), iou_min, thresholds);
    const auto peak = eval::peak_f1(curve);

    // Pool all images into one confusion matrix at the default threshold.
    std::vector<eval::LabeledBox> all_gt, all_preds;
    eval::ConfusionMatrix pooled;
    pooled.nc = cm.nc();
    pooled.entries.assign(static_cast<std::size_t>(cm.nc() + 1) * (cm.nc() + 1),
                          0);
    for (std::size_t i = 0; i < gt_by_image.size(); ++i) {
      const auto m =
          eval::match_detections(gt_by_image[i], preds_by_image[i], iou_min);
      const auto cmx =
          eval::confusion_matrix(m, gt_by_image[i], preds_by_image[i], cm.nc());
      for (std::size_t k = 0; k < pooled.entries.size(); ++k)
        pooled.entries[k] += cmx.entries[k];
    }

    std::filesystem::create_directories(output_dir);
    {
      std::ofstream out(output_dir / "confusion_matrix.tsv", std::ios::binary);
      out << "pred\\gt";
      for (const auto& n : cm.names) out << "\t" << n;
      out << "\tbackground\n";
      for (int p = 0; p <= cm.nc(); ++p) {
        out << (p < cm.nc() ? cm.names[p] : "background");
        for (int g = 0; g <= cm.nc(); ++g) out << "\t" << pooled.at(p, g);
        out << "\n";
      }
    }
    {
      std::ofstream out(output_dir / "metrics.tsv", std::ios::binary);
      out << "threshold";
      for (const auto& n : cm.names) out << "\tf1_" << n;
      out << "\tf1_all\n";
      char buf[64];
      for (const auto& pt : curve.points) {
        std::snprintf(buf, sizeof(buf), "%.3f", pt.threshold);
        out << buf;
        for (double f : pt.per_class_f1) {
          std::snprintf(buf, sizeof(buf), "\t%.6f", f);
          out << buf;
        }
        std::snprintf(buf, sizeof(buf), "\t%.6f\n", pt.all_class_f1);
        out << buf;
      }
    }
    {
      // Simple curve plot: threshold on x, all-class F1 on y.
      const int w = 400, h = 200;
      render::RasterImage img;
      img.width = w;
      img.height = h;
      img.pixels.assign(static_cast<std::size_t>(w) * h, {255, 255, 255});
      for (const auto& pt : curve.points) {
        const int x = std::min(w - 1, static_cast<int>(pt.threshold * (w - 1)));
        const int y =
            h - 1 - std::min(h - 1, static_cast<int>(pt.all_class_f1 * (h - 1)));
        img.at(x, y) = {200, 0, 0};
      }
      write_bytes(output_dir / "f1_curve.ppm", render::encode_ppm(img));
    }
    char line[80];
    std::snprintf(line, sizeof(line), "peak_f1=%.6f at conf=%.3f\n", peak.f1,
                  peak.confidence);
    std::cout << line;
    {
      std::ofstream out(output_dir / "report.txt", std::ios::binary);
      out << line;
    }
    return kOk;
  } catch (const std::exception& ex) {
    std::cerr << "gridvec: " << ex.what() << "\n";
    return kDataError;
  }
}

int cmd_validate(const std::filesystem::path& tiles_dir, double tolerance_deg,
                 std::ostream& out) {
  if (!std::filesystem::is_directory(tiles_dir)) {
    std::cerr << "gridvec: tiles directory " << tiles_dir << " does not exist\n";
    return kMissingInput;
  }
  const Manifest m = scan_tiles(tiles_dir, tiles_dir);
  if (m.entries.empty()) {
    std::cerr << "gridvec: no tiles found\n";
    return kMissingInput;
  }

  bool all_ok = true;
  char buf[160];
  for (const auto& e : m.entries) {
    out << ">>> " << e.tile_path.filename().string() << "\n";
    if (!e.meta) {
      out << "parse error: " << e.error << "\n\n";
      all_ok = false;
      continue;
    }
    const auto& t = e.meta->transform;
    out << "Size is " << t.width << ", " << t.height << "\n";
    std::snprintf(buf, sizeof(buf), "Origin = (%.15f,%.15f)\n",
                  t.origin_easting, t.origin_northing);
    out << buf;
    std::snprintf(buf, sizeof(buf), "Pixel Size = (%.15f,%.15f)\n",
                  t.pixel_size_x, t.pixel_size_y);
    out << buf;
    out << "CRS: EPSG:" << e.meta->crs_epsg << "\n";

    auto corner = [&](const char* name, double px, double py) {
      const auto p = proj::pixel_to_projected(t, px, py);
      const auto g = proj::mercator_inverse(p);
      std::snprintf(buf, sizeof(buf), "%-11s (%12.3f,%12.3f) ( %s, %s)\n", name,
                    p.easting_m, p.northing_m,
                    proj::format_dms(g.longitude_deg, proj::Axis::Longitude).c_str(),
                    proj::format_dms(g.latitude_deg, proj::Axis::Latitude).c_str());
      out << buf;
    };
    corner("Upper Left", 0, 0);
    corner("Lower Left", 0, t.height);
    corner("Upper Right", t.width, 0);
    corner("Lower Right", t.width, t.height);
    corner("Center", t.width / 2.0, t.height / 2.0);

    const auto report = geotiff::validate_tile(*e.meta, tolerance_deg);
    for (const auto& check : report.checks) {
      const char* status =
          check.status == geotiff::ValidationCheck::Status::Pass    ? "pass"
          : check.status == geotiff::ValidationCheck::Status::Fail ? "FAIL"
                                                                    : "skipped";
      out << check.name << ": " << status << " (" << check.detail << ")\n";
    }
    if (!report.all_passed()) all_ok = false;
    out << "\n";
  }
  return all_ok ? kOk : kValidationFailure;
}

}  // namespace gridvec::pipeline
