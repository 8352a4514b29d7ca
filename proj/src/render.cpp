#include "gridvec/render.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace gridvec::render {

ColorScale hot_scale() {
  return {{
      {0.00, {0, 0, 0}},        // black
      {0.25, {139, 0, 0}},      // dark red
      {0.50, {255, 165, 0}},    // orange
      {0.75, {255, 255, 0}},    // yellow
      {1.00, {255, 255, 255}},  // white
  }};
}

Rgb colormap(double value, double vmin, double vmax, const ColorScale& scale) {
  const double clamped = std::clamp(value, vmin, vmax);
  const double t = vmax > vmin ? (clamped - vmin) / (vmax - vmin) : 0.0;

  const auto& stops = scale.stops;
  std::size_t hi = 1;
  while (hi + 1 < stops.size() && stops[hi].position < t) ++hi;
  const auto& a = stops[hi - 1];
  const auto& b = stops[hi];
  const double span = b.position - a.position;
  const double f = span > 0.0 ? (t - a.position) / span : 0.0;

  Rgb out;
  for (int c = 0; c < 3; ++c) {
    const double v = a.color[c] + f * (b.color[c] - a.color[c]);
    out[c] = static_cast<std::uint8_t>(
        std::clamp(std::floor(v + 0.5), 0.0, 255.0));
  }
  return out;
}

RasterImage render_heatmap(const grid::CountGrid& g, const detect::ClassMap& cm,
                           const std::string& plane, int cell_px,
                           const ColorScale& scale) {
  if (cell_px < 1) throw RenderError("cell_px must be >= 1");

  // Resolve the plane into a row-major value array.
  std::vector<double> values(
      static_cast<std::size_t>(g.spec.n_rows) * g.spec.n_cols, 0.0);
  if (plane == "total") {
    for (const auto& cls : g.counts)
      for (std::size_t i = 0; i < cls.size(); ++i) values[i] += cls[i];
  } else {
    int cls = -1;
    for (int c = 0; c < cm.nc(); ++c)
      if (cm.names[c] == plane) cls = c;
    if (cls < 0 || cls >= static_cast<int>(g.counts.size()))
      throw RenderError("unknown plane '" + plane + "'");
    for (std::size_t i = 0; i < values.size(); ++i)
      values[i] = g.counts[cls][i];
  }
  const double vmax = *std::max_element(values.begin(), values.end());

  RasterImage img;
  img.width = g.spec.n_cols * cell_px;
  img.height = g.spec.n_rows * cell_px;
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
  for (int row = 0; row < g.spec.n_rows; ++row) {
    // Grid rows ascend northward; image row 0 is the northernmost.
    const int img_row0 = (g.spec.n_rows - 1 - row) * cell_px;
    for (int col = 0; col < g.spec.n_cols; ++col) {
      const Rgb color = colormap(
          values[static_cast<std::size_t>(row) * g.spec.n_cols + col], 0.0,
          vmax, scale);
      for (int dy = 0; dy < cell_px; ++dy)
        for (int dx = 0; dx < cell_px; ++dx)
          img.at(col * cell_px + dx, img_row0 + dy) = color;
    }
  }
  return img;
}

std::vector<std::uint8_t> encode_ppm(const RasterImage& img) {
  char header[64];
  const int n = std::snprintf(header, sizeof(header), "P6\n%d %d\n255\n",
                              img.width, img.height);
  std::vector<std::uint8_t> out(header, header + n);
  out.reserve(out.size() + img.pixels.size() * 3);
  for (const auto& px : img.pixels)
    out.insert(out.end(), px.begin(), px.end());
  return out;
}

RasterImage decode_ppm(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  auto token = [&]() -> std::string {
    while (pos < bytes.size() &&
           (bytes[pos] == ' ' || bytes[pos] == '\n' || bytes[pos] == '\t' ||
            bytes[pos] == '\r'))
      ++pos;
    std::string t;
    while (pos < bytes.size() && !std::isspace(bytes[pos]))
      t.push_back(static_cast<char>(bytes[pos++]));
    return t;
  };
  if (token() != "P6") throw RenderError("not a binary PPM");
  RasterImage img;
  const std::string w = token(), h = token(), maxval = token();
  auto to_int = [](const std::string& s) {
    int v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
      throw RenderError("bad PPM header token");
    return v;
  };
  img.width = to_int(w);
  img.height = to_int(h);
  if (to_int(maxval) != 255) throw RenderError("only maxval 255 supported");
  if (img.width <= 0 || img.height <= 0) throw RenderError("bad dimensions");
  ++pos;  // single whitespace after maxval
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
  if (pos + 3 * n > bytes.size()) throw RenderError("truncated pixel data");
  img.pixels.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    img.pixels[i] = {bytes[pos + 3 * i], bytes[pos + 3 * i + 1],
                     bytes[pos + 3 * i + 2]};
  return img;
}

}  // namespace gridvec::render
