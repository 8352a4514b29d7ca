#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gridvec/detect.hpp"
#include "gridvec/grid.hpp"

namespace gridvec::render {

using Rgb = std::array<std::uint8_t, 3>;

struct RasterImage {
  int width = 0;
  int height = 0;
  std::vector<Rgb> pixels;  // row-major

  Rgb& at(int x, int y) {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
  Rgb at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
};

struct ColorStop {
  double position;  // in [0,1], ascending; first 0, last 1
  Rgb color;
};

struct ColorScale {
  std::vector<ColorStop> stops;
};

class RenderError : public std::runtime_error {
public:
  explicit RenderError(const std::string& what) : std::runtime_error(what) {}
};

// black -> dark red -> orange -> yellow -> white, evenly spaced.
ColorScale hot_scale();

// Clamp to [vmin,vmax], normalize (0 when vmin==vmax), interpolate linearly
// between bracketing stops, round half up per channel.
Rgb colormap(double value, double vmin, double vmax, const ColorScale& scale);

// plane: a class label or "total". Image row 0 is the northernmost grid row.
RasterImage render_heatmap(const grid::CountGrid& g, const detect::ClassMap& cm,
                           const std::string& plane, int cell_px,
                           const ColorScale& scale);

std::vector<std::uint8_t> encode_ppm(const RasterImage& img);
RasterImage decode_ppm(std::span<const std::uint8_t> bytes);

}  // namespace gridvec::render
