#include "gridvec/detect.hpp"

#include <charconv>
#include <set>
#include <sstream>

#include "gridvec/projection.hpp"

namespace gridvec::detect {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

double parse_double(std::string_view tok, int line) {
  double v;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw LabelError(line, "non-numeric token '" + std::string(tok) + "'");
  return v;
}

}  // namespace

ClassMap default_class_map() {
  return {{"brick_kilns", "bus", "car", "miscellaneous"}};
}

ClassMap parse_class_config(const std::string& text) {
  std::optional<int> nc;
  std::optional<std::vector<std::string>> names;

  std::istringstream in(text);
  std::string raw;
  while (std::getline(in, raw)) {
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line.starts_with("nc:")) {
      const std::string v = trim(line.substr(3));
      int n;
      const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
      if (ec != std::errc{} || ptr != v.data() + v.size())
        throw ConfigError("nc is not an integer: '" + v + "'");
      nc = n;
    } else if (line.starts_with("names:")) {
      std::string v = trim(line.substr(6));
      if (v.empty() || v.front() != '[' || v.back() != ']')
        throw ConfigError("names must be an inline bracketed list");
      v = v.substr(1, v.size() - 2);
      std::vector<std::string> list;
      std::size_t pos = 0;
      while (pos < v.size()) {
        while (pos < v.size() && (v[pos] == ' ' || v[pos] == '\t')) ++pos;
        if (pos >= v.size()) break;
        const char quote = v[pos];
        if (quote != '\'' && quote != '"')
          throw ConfigError("names entries must be quoted");
        const auto close = v.find(quote, pos + 1);
        if (close == std::string::npos)
          throw ConfigError("unterminated quote in names list");
        list.push_back(v.substr(pos + 1, close - pos - 1));
        pos = close + 1;
        while (pos < v.size() && (v[pos] == ' ' || v[pos] == '\t')) ++pos;
        if (pos < v.size()) {
          if (v[pos] != ',') throw ConfigError("expected comma in names list");
          ++pos;
        }
      }
      names = std::move(list);
    }
    // train/val/test path lines and anything else are ignored.
  }

  if (!nc || !names) throw ConfigError("missing nc: or names: entry");
  if (*nc != static_cast<int>(names->size()))
    throw ConfigError("nc=" + std::to_string(*nc) + " does not match " +
                      std::to_string(names->size()) + " listed names");
  std::set<std::string> unique(names->begin(), names->end());
  if (unique.size() != names->size())
    throw ConfigError("duplicate class names");
  for (const auto& n : *names)
    if (n.empty()) throw ConfigError("empty class name");
  return {std::move(*names)};
}

std::vector<Detection> parse_yolo_labels(const std::string& text,
                                         const ClassMap& cm) {
  std::vector<Detection> out;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::istringstream ls(trim(raw));
    std::vector<std::string> toks;
    std::string tok;
    while (ls >> tok) toks.push_back(tok);
    if (toks.empty()) continue;
    if (toks.size() != 5 && toks.size() != 6)
      throw LabelError(line_no, "expected 5 or 6 fields, got " +
                                    std::to_string(toks.size()));
    Detection d;
    int cls;
    const auto [ptr, ec] =
        std::from_chars(toks[0].data(), toks[0].data() + toks[0].size(), cls);
    if (ec != std::errc{} || ptr != toks[0].data() + toks[0].size())
      throw LabelError(line_no, "non-integer class '" + toks[0] + "'");
    if (cls < 0 || cls >= cm.nc())
      throw LabelError(line_no, "class_id " + std::to_string(cls) +
                                    " out of range for " +
                                    std::to_string(cm.nc()) + " classes");
    d.class_id = cls;
    d.cx = parse_double(toks[1], line_no);
    d.cy = parse_double(toks[2], line_no);
    d.w = parse_double(toks[3], line_no);
    d.h = parse_double(toks[4], line_no);
    if (d.cx < 0.0 || d.cx > 1.0 || d.cy < 0.0 || d.cy > 1.0)
      throw LabelError(line_no, "center outside [0,1]");
    if (d.w <= 0.0 || d.w > 1.0 || d.h <= 0.0 || d.h > 1.0)
      throw LabelError(line_no, "box size outside (0,1]");
    if (toks.size() == 6) {
      const double conf = parse_double(toks[5], line_no);
      if (conf < 0.0 || conf > 1.0)
        throw LabelError(line_no, "confidence outside [0,1]");
      d.confidence = conf;
    }
    out.push_back(d);
  }
  return out;
}

std::vector<GeoDetection> detections_to_geo(const std::vector<Detection>& dets,
                                            const geotiff::TileMeta& tile) {
  std::vector<GeoDetection> out;
  out.reserve(dets.size());
  for (const auto& d : dets) {
    GeoDetection g;
    g.class_id = d.class_id;
    g.projected = proj::pixel_to_projected(tile.transform,
                                           d.cx * tile.transform.width,
                                           d.cy * tile.transform.height);
    g.point = proj::mercator_inverse(g.projected);
    g.confidence = d.confidence;
    g.source_id = tile.source_id;
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace gridvec::detect
