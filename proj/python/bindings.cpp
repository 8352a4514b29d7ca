#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "gridvec/detect.hpp"
#include "gridvec/evalkit.hpp"
#include "gridvec/geotiff.hpp"
#include "gridvec/grid.hpp"
#include "gridvec/inventory.hpp"
#include "gridvec/pipeline.hpp"
#include "gridvec/projection.hpp"
#include "gridvec/render.hpp"
#include "gridvec/synth.hpp"

namespace py = pybind11;
using namespace gridvec;

namespace {

py::array_t<std::int32_t> counts_plane(const grid::CountGrid& g, int class_id) {
  if (class_id < 0 || class_id >= static_cast<int>(g.counts.size()))
    throw py::index_error("class_id out of range");
  py::array_t<std::int32_t> arr({g.spec.n_rows, g.spec.n_cols});
  std::memcpy(arr.mutable_data(), g.counts[class_id].data(),
              g.counts[class_id].size() * sizeof(std::int32_t));
  return arr;
}

std::span<const std::uint8_t> as_span(const py::bytes& b) {
  char* data;
  py::ssize_t size;
  if (PyBytes_AsStringAndSize(b.ptr(), &data, &size) != 0)
    throw py::error_already_set();
  return {reinterpret_cast<const std::uint8_t*>(data),
          static_cast<std::size_t>(size)};
}

py::bytes to_bytes(const std::vector<std::uint8_t>& v) {
  return py::bytes(reinterpret_cast<const char*>(v.data()), v.size());
}

}  // namespace

PYBIND11_MODULE(_gridvec, m) {
  m.doc() = "gridded vehicle-count inventory pipeline";

  // projection
  py::class_<proj::GeoPoint>(m, "GeoPoint")
      .def(py::init<double, double>(), py::arg("latitude_deg"),
           py::arg("longitude_deg"))
      .def_readwrite("latitude_deg", &proj::GeoPoint::latitude_deg)
      .def_readwrite("longitude_deg", &proj::GeoPoint::longitude_deg);
  py::class_<proj::ProjectedPoint>(m, "ProjectedPoint")
      .def(py::init<double, double>(), py::arg("easting_m"),
           py::arg("northing_m"))
      .def_readwrite("easting_m", &proj::ProjectedPoint::easting_m)
      .def_readwrite("northing_m", &proj::ProjectedPoint::northing_m);
  m.def("mercator_forward", &proj::mercator_forward);
  m.def("mercator_inverse", &proj::mercator_inverse);
  m.def("pixel_to_projected", &proj::pixel_to_projected);
  m.def("format_dms", [](double angle, const std::string& axis) {
    return proj::format_dms(angle, axis == "lat" ? proj::Axis::Latitude
                                                 : proj::Axis::Longitude);
  });

  // geotiff
  py::class_<geotiff::GeoTransform>(m, "GeoTransform")
      .def(py::init<>())
      .def_readwrite("origin_easting", &geotiff::GeoTransform::origin_easting)
      .def_readwrite("origin_northing", &geotiff::GeoTransform::origin_northing)
      .def_readwrite("pixel_size_x", &geotiff::GeoTransform::pixel_size_x)
      .def_readwrite("pixel_size_y", &geotiff::GeoTransform::pixel_size_y)
      .def_readwrite("width", &geotiff::GeoTransform::width)
      .def_readwrite("height", &geotiff::GeoTransform::height);
  py::class_<geotiff::TileMeta>(m, "TileMeta")
      .def(py::init<>())
      .def_readwrite("source_id", &geotiff::TileMeta::source_id)
      .def_readwrite("transform", &geotiff::TileMeta::transform)
      .def_readwrite("crs_epsg", &geotiff::TileMeta::crs_epsg)
      .def_readwrite("filename_center", &geotiff::TileMeta::filename_center)
      .def_readwrite("band_count", &geotiff::TileMeta::band_count);
  m.def("parse_tiff_metadata", [](const py::bytes& b) {
    return geotiff::parse_tiff_metadata(as_span(b));
  });
  m.def(
      "write_synthetic_geotiff",
      [](const geotiff::TileMeta& meta, std::uint8_t fill) {
        return to_bytes(geotiff::write_synthetic_geotiff(meta, fill));
      },
      py::arg("meta"), py::arg("fill") = 0);
  m.def("parse_filename_center", &geotiff::parse_filename_center);

  // detect
  py::class_<detect::ClassMap>(m, "ClassMap")
      .def(py::init<std::vector<std::string>>())
      .def_readwrite("names", &detect::ClassMap::names)
      .def_property_readonly("nc", &detect::ClassMap::nc);
  py::class_<detect::Detection>(m, "Detection")
      .def(py::init<>())
      .def_readwrite("class_id", &detect::Detection::class_id)
      .def_readwrite("cx", &detect::Detection::cx)
      .def_readwrite("cy", &detect::Detection::cy)
      .def_readwrite("w", &detect::Detection::w)
      .def_readwrite("h", &detect::Detection::h)
      .def_readwrite("confidence", &detect::Detection::confidence);
  py::class_<detect::GeoDetection>(m, "GeoDetection")
      .def(py::init<>())
      .def_readwrite("class_id", &detect::GeoDetection::class_id)
      .def_readwrite("point", &detect::GeoDetection::point)
      .def_readwrite("projected", &detect::GeoDetection::projected)
      .def_readwrite("confidence", &detect::GeoDetection::confidence)
      .def_readwrite("source_id", &detect::GeoDetection::source_id);
  m.def("default_class_map", &detect::default_class_map);
  m.def("parse_class_config", &detect::parse_class_config);
  m.def("parse_yolo_labels", &detect::parse_yolo_labels);
  m.def("detections_to_geo", &detect::detections_to_geo);

  // grid
  py::class_<grid::GridSpec>(m, "GridSpec")
      .def(py::init<>())
      .def_readwrite("min_easting", &grid::GridSpec::min_easting)
      .def_readwrite("min_northing", &grid::GridSpec::min_northing)
      .def_readwrite("cell_size", &grid::GridSpec::cell_size)
      .def_readwrite("n_cols", &grid::GridSpec::n_cols)
      .def_readwrite("n_rows", &grid::GridSpec::n_rows);
  py::class_<grid::CountGrid>(m, "CountGrid")
      .def_readonly("spec", &grid::CountGrid::spec)
      .def_readonly("conf_threshold", &grid::CountGrid::conf_threshold)
      .def_readonly("accepted", &grid::CountGrid::accepted)
      .def_readonly("skipped", &grid::CountGrid::skipped)
      .def_readonly("below_threshold", &grid::CountGrid::below_threshold)
      .def("plane", &counts_plane, py::arg("class_id"));
  m.def("make_grid", &grid::make_grid);
  m.def("assign_cell",
        [](const grid::GridSpec& spec, const proj::ProjectedPoint& p)
            -> std::optional<std::pair<int, int>> {
          const auto cell = grid::assign_cell(spec, p);
          if (!cell) return std::nullopt;
          return std::make_pair(cell->row, cell->col);
        });
  m.def("accumulate", &grid::accumulate, py::arg("spec"), py::arg("dets"),
        py::arg("cm"), py::arg("conf_threshold") = 0.25);
  m.def("merge", &grid::merge);
  m.def("cell_centers", [](const grid::GridSpec& spec) {
    const auto cc = grid::cell_centers(spec);
    return std::make_pair(cc.latitudes, cc.longitudes);
  });

  // inventory
  py::class_<inventory::EmissionFactorTable>(m, "EmissionFactorTable")
      .def(py::init<>())
      .def_readwrite("factors", &inventory::EmissionFactorTable::factors)
      .def_readwrite("unit", &inventory::EmissionFactorTable::unit);
  m.def("load_emission_factors",
        [](const std::string& text, const detect::ClassMap& cm) {
          return inventory::load_emission_factors(text, cm);
        });
  py::class_<inventory::InventoryDataset>(m, "InventoryDataset")
      .def("dimension_names",
           [](const inventory::InventoryDataset& ds) {
             std::vector<std::string> names;
             for (const auto& d : ds.dimensions) names.push_back(d.name);
             return names;
           })
      .def("variable_names",
           [](const inventory::InventoryDataset& ds) {
             std::vector<std::string> names;
             for (const auto& v : ds.variables) names.push_back(v.name);
             return names;
           })
      .def("variable_data",
           [](const inventory::InventoryDataset& ds, const std::string& name)
               -> py::object {
             const auto* v = ds.find(name);
             if (!v) throw py::key_error(name);
             return std::visit(
                 [](const auto& data) -> py::object { return py::cast(data); },
                 v->data);
           })
      .def("__eq__", [](const inventory::InventoryDataset& a,
                        const inventory::InventoryDataset& b) { return a == b; });
  m.def("build_inventory",
        [](const grid::CountGrid& g, const detect::ClassMap& cm,
           const std::optional<inventory::EmissionFactorTable>& factors,
           const std::string& timestamp, const std::string& source) {
          return inventory::build_inventory(
              g, cm, factors ? &*factors : nullptr, timestamp, source);
        },
        py::arg("grid"), py::arg("cm"), py::arg("factors") = std::nullopt,
        py::arg("timestamp") = "", py::arg("source") = "gridvec");
  m.def("write_netcdf", [](const inventory::InventoryDataset& ds) {
    return to_bytes(inventory::write_netcdf(ds));
  });
  m.def("read_netcdf", [](const py::bytes& b) {
    return inventory::read_netcdf(as_span(b));
  });

  // evalkit
  py::class_<eval::LabeledBox>(m, "LabeledBox")
      .def(py::init<>())
      .def(py::init([](int cls, double cx, double cy, double w, double h,
                       std::optional<double> conf) {
             return eval::LabeledBox{cls, cx, cy, w, h, conf};
           }),
           py::arg("class_id"), py::arg("cx"), py::arg("cy"), py::arg("w"),
           py::arg("h"), py::arg("confidence") = std::nullopt)
      .def_readwrite("class_id", &eval::LabeledBox::class_id)
      .def_readwrite("confidence", &eval::LabeledBox::confidence);
  m.def("iou", &eval::iou);
  py::class_<eval::MatchResult>(m, "MatchResult")
      .def_property_readonly("pairs",
                             [](const eval::MatchResult& r) {
                               std::vector<std::tuple<int, int, double>> out;
                               for (const auto& p : r.pairs)
                                 out.emplace_back(p.gt_index, p.pred_index,
                                                  p.iou);
                               return out;
                             })
      .def_readonly("missed_gt", &eval::MatchResult::missed_gt)
      .def_readonly("unmatched_preds", &eval::MatchResult::unmatched_preds);
  m.def("match_detections", &eval::match_detections, py::arg("gt"),
        py::arg("preds"), py::arg("iou_min") = 0.5);
  py::class_<eval::F1Curve>(m, "F1Curve")
      .def("points", [](const eval::F1Curve& c) {
        std::vector<std::tuple<double, std::vector<double>, double>> out;
        for (const auto& p : c.points)
          out.emplace_back(p.threshold, p.per_class_f1, p.all_class_f1);
        return out;
      });
  m.def("f1_confidence_curve", &eval::f1_confidence_curve, py::arg("gt_by_image"),
        py::arg("preds_by_image"), py::arg("nc"), py::arg("iou_min") = 0.5,
        py::arg("thresholds") = eval::default_thresholds());
  m.def("peak_f1", [](const eval::F1Curve& c) {
    const auto p = eval::peak_f1(c);
    return std::make_pair(p.confidence, p.f1);
  });

  // render
  py::class_<render::RasterImage>(m, "RasterImage")
      .def_readonly("width", &render::RasterImage::width)
      .def_readonly("height", &render::RasterImage::height);
  m.def(
      "render_heatmap",
      [](const grid::CountGrid& g, const detect::ClassMap& cm,
         const std::string& plane, int cell_px) {
        return render::render_heatmap(g, cm, plane, cell_px,
                                      render::hot_scale());
      },
      py::arg("grid"), py::arg("cm"), py::arg("plane") = "total",
      py::arg("cell_px") = 8);
  m.def("encode_ppm", [](const render::RasterImage& img) {
    return to_bytes(render::encode_ppm(img));
  });

  // synth
  py::class_<synth::SceneSpec>(m, "SceneSpec")
      .def(py::init<>())
      .def_readwrite("seed", &synth::SceneSpec::seed)
      .def_readwrite("aoi_min", &synth::SceneSpec::aoi_min)
      .def_readwrite("aoi_max", &synth::SceneSpec::aoi_max)
      .def_readwrite("cell_size", &synth::SceneSpec::cell_size)
      .def_readwrite("tile_width_px", &synth::SceneSpec::tile_width_px)
      .def_readwrite("tile_height_px", &synth::SceneSpec::tile_height_px)
      .def_readwrite("pixel_size_x", &synth::SceneSpec::pixel_size_x)
      .def_readwrite("pixel_size_y", &synth::SceneSpec::pixel_size_y)
      .def_readwrite("objects_per_class", &synth::SceneSpec::objects_per_class);
  py::class_<synth::Scene>(m, "Scene")
      .def_property_readonly("n_tiles",
                             [](const synth::Scene& s) { return s.tiles.size(); })
      .def_readonly("truth", &synth::Scene::truth);
  m.def("generate_scene", &synth::generate_scene);
  m.def("oracle_counts", &synth::oracle_counts);
  m.def("write_scene", &synth::write_scene);
}
