#include "gridvec/geotiff.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <regex>

#include "gridvec/projection.hpp"

namespace gridvec::geotiff {

namespace {

// TIFF tag numbers read by the parser.
constexpr std::uint16_t kTagImageWidth = 256;
constexpr std::uint16_t kTagImageLength = 257;
constexpr std::uint16_t kTagBitsPerSample = 258;
constexpr std::uint16_t kTagCompression = 259;
constexpr std::uint16_t kTagStripOffsets = 273;
constexpr std::uint16_t kTagSamplesPerPixel = 277;
constexpr std::uint16_t kTagStripByteCounts = 279;
constexpr std::uint16_t kTagModelPixelScale = 33550;
constexpr std::uint16_t kTagModelTiepoint = 33922;
constexpr std::uint16_t kTagGeoKeyDirectory = 34735;

constexpr std::uint16_t kGeoKeyProjectedCSType = 3072;

// TIFF field types.
constexpr std::uint16_t kTypeShort = 3;
constexpr std::uint16_t kTypeLong = 4;
constexpr std::uint16_t kTypeDouble = 12;

std::size_t type_size(std::uint16_t type) {
  switch (type) {
    case 1:  // BYTE
    case 2:  // ASCII
    case 6:  // SBYTE
    case 7:  // UNDEFINED
      return 1;
    case kTypeShort:
    case 8:  // SSHORT
      return 2;
    case kTypeLong:
    case 9:   // SLONG
    case 11:  // FLOAT
      return 4;
    case 5:   // RATIONAL
    case 10:  // SRATIONAL
    case kTypeDouble:
      return 8;
    default:
      return 0;
  }
}

std::uint16_t bswap(std::uint16_t v) { return __builtin_bswap16(v); }
std::uint32_t bswap(std::uint32_t v) { return __builtin_bswap32(v); }
std::uint64_t bswap(std::uint64_t v) { return __builtin_bswap64(v); }

[[noreturn]] void malformed(const std::string& what) {
  throw TiffError(TiffErrorKind::MalformedTiff, what);
}

// Bounds-checked little/big-endian reader over the raw file bytes.
class ByteReader {
public:
  ByteReader(std::span<const std::uint8_t> bytes, bool big_endian)
      : bytes_(bytes), big_endian_(big_endian) {}

  std::uint16_t u16(std::size_t off) const {
    check(off, 2);
    std::uint16_t v;
    std::memcpy(&v, bytes_.data() + off, 2);
    return big_endian_ ? bswap(v) : may_swap(v);
  }

  std::uint32_t u32(std::size_t off) const {
    check(off, 4);
    std::uint32_t v;
    std::memcpy(&v, bytes_.data() + off, 4);
    return big_endian_ ? bswap(v) : may_swap(v);
  }

  double f64(std::size_t off) const {
    check(off, 8);
    std::uint64_t v;
    std::memcpy(&v, bytes_.data() + off, 8);
    if (big_endian_ != (std::endian::native == std::endian::big))
      v = bswap(v);
    return std::bit_cast<double>(v);
  }

  std::size_t size() const { return bytes_.size(); }

private:
  void check(std::size_t off, std::size_t n) const {
    if (off + n > bytes_.size() || off + n < off)
      malformed("read past end of file at offset " + std::to_string(off));
  }

  template <class T>
  T may_swap(T v) const {
    if constexpr (std::endian::native == std::endian::big)
      return bswap(v);
    else
      return v;
  }

  std::span<const std::uint8_t> bytes_;
  bool big_endian_;
};

struct IfdEntry {
  std::uint16_t tag = 0;
  std::uint16_t type = 0;
  std::uint32_t count = 0;
  std::size_t value_offset = 0;  // offset of the value data in the file
};

// Resolves where an entry's payload lives: inline when it fits in 4 bytes,
// otherwise at the offset stored in the value field.
IfdEntry read_entry(const ByteReader& r, std::size_t entry_off) {
  IfdEntry e;
  e.tag = r.u16(entry_off);
  e.type = r.u16(entry_off + 2);
  e.count = r.u32(entry_off + 4);
  const std::size_t ts = type_size(e.type);
  if (ts == 0) malformed("unknown field type " + std::to_string(e.type));
  const std::uint64_t payload = static_cast<std::uint64_t>(ts) * e.count;
  if (payload <= 4) {
    e.value_offset = entry_off + 8;
  } else {
    e.value_offset = r.u32(entry_off + 8);
    if (e.value_offset + payload > r.size())
      malformed("tag " + std::to_string(e.tag) + " payload out of range");
  }
  return e;
}

// Integer value of a SHORT or LONG entry (first element).
std::uint32_t entry_uint(const ByteReader& r, const IfdEntry& e) {
  if (e.count < 1) malformed("tag " + std::to_string(e.tag) + " empty");
  if (e.type == kTypeShort) return r.u16(e.value_offset);
  if (e.type == kTypeLong) return r.u32(e.value_offset);
  malformed("tag " + std::to_string(e.tag) + " has non-integer type");
}

void append_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void append_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i)
    out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

void append_f64(std::vector<std::uint8_t>& out, double d) {
  std::uint64_t v = std::bit_cast<std::uint64_t>(d);
  if constexpr (std::endian::native == std::endian::big) v = bswap(v);
  for (int i = 0; i < 8; ++i)
    out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

}  // namespace

TileMeta parse_tiff_metadata(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8) malformed("file shorter than the TIFF header");
  bool big_endian;
  if (bytes[0] == 'I' && bytes[1] == 'I') {
    big_endian = false;
  } else if (bytes[0] == 'M' && bytes[1] == 'M') {
    big_endian = true;
  } else {
    malformed("bad byte-order mark");
  }
  ByteReader r(bytes, big_endian);
  const std::uint16_t magic = r.u16(2);
  if (magic == 43)
    malformed("BigTIFF is not supported");
  if (magic != 42) malformed("bad magic number " + std::to_string(magic));

  const std::uint32_t ifd_off = r.u32(4);
  if (ifd_off < 8 || ifd_off + 2 > bytes.size()) malformed("IFD offset out of range");
  const std::uint16_t n_entries = r.u16(ifd_off);
  if (n_entries == 0) malformed("empty IFD");
  if (ifd_off + 2 + 12u * n_entries + 4 > bytes.size())
    malformed("truncated IFD");

  TileMeta meta;
  meta.band_count = 1;  // SamplesPerPixel default
  bool have_width = false, have_height = false;
  bool have_scale = false, have_tiepoint = false, have_geokeys = false;

  for (std::uint16_t i = 0; i < n_entries; ++i) {
    const IfdEntry e = read_entry(r, ifd_off + 2 + 12u * i);
    switch (e.tag) {
      case kTagImageWidth:
        meta.transform.width = static_cast<std::int32_t>(entry_uint(r, e));
        have_width = true;
        break;
      case kTagImageLength:
        meta.transform.height = static_cast<std::int32_t>(entry_uint(r, e));
        have_height = true;
        break;
      case kTagSamplesPerPixel:
        meta.band_count = static_cast<std::int32_t>(entry_uint(r, e));
        break;
      case kTagModelPixelScale: {
        if (e.type != kTypeDouble || e.count < 2)
          malformed("ModelPixelScale must hold at least 2 doubles");
        meta.transform.pixel_size_x = r.f64(e.value_offset);
        meta.transform.pixel_size_y = -r.f64(e.value_offset + 8);
        have_scale = true;
        break;
      }
      case kTagModelTiepoint: {
        if (e.type != kTypeDouble || e.count < 6)
          malformed("ModelTiepoint must hold at least 6 doubles");
        const double i_px = r.f64(e.value_offset);
        const double j_px = r.f64(e.value_offset + 8);
        if (i_px != 0.0 || j_px != 0.0)
          throw TiffError(TiffErrorKind::UnsupportedLayout,
                          "tiepoint not anchored at raster pixel (0,0)");
        meta.transform.origin_easting = r.f64(e.value_offset + 24);
        meta.transform.origin_northing = r.f64(e.value_offset + 32);
        have_tiepoint = true;
        break;
      }
      case kTagGeoKeyDirectory: {
        if (e.type != kTypeShort || e.count < 4)
          malformed("GeoKeyDirectory must hold shorts");
        const std::uint16_t n_keys = r.u16(e.value_offset + 6);
        if (4u * (n_keys + 1u) > e.count) malformed("GeoKeyDirectory truncated");
        for (std::uint16_t k = 0; k < n_keys; ++k) {
          const std::size_t key_off = e.value_offset + 8u + 8u * k;
          if (r.u16(key_off) == kGeoKeyProjectedCSType &&
              r.u16(key_off + 2) == 0) {
            meta.crs_epsg = r.u16(key_off + 6);
            have_geokeys = true;
          }
        }
        break;
      }
      default:
        break;  // all other tags are skipped by offset arithmetic
    }
  }

  if (!have_width || !have_height) malformed("missing image dimensions");
  if (!have_scale)
    throw TiffError(TiffErrorKind::MissingGeoTag, "ModelPixelScale absent");
  if (!have_tiepoint)
    throw TiffError(TiffErrorKind::MissingGeoTag, "ModelTiepoint absent");
  if (!have_geokeys)
    throw TiffError(TiffErrorKind::MissingGeoTag,
                    "GeoKeyDirectory absent or lacks ProjectedCSTypeGeoKey");
  if (meta.crs_epsg != 3857)
    throw TiffError(TiffErrorKind::UnsupportedCrs,
                    "CRS EPSG:" + std::to_string(meta.crs_epsg) +
                        " is not EPSG:3857");
  if (!meta.transform.valid())
    malformed("geotransform violates north-up invariants");
  return meta;
}

proj::GeoPoint parse_filename_center(const std::string& name) {
  static const std::regex pattern(
      R"(^(-?\d+\.\d+)_(-?\d+\.\d+)(?:\.[A-Za-z0-9]+)?$)");
  const std::string base = std::filesystem::path(name).filename().string();
  std::smatch m;
  if (!std::regex_match(base, m, pattern))
    throw PatternMismatch("name '" + base +
                          "' does not match the <lat>_<lon> convention");
  return {std::stod(m[1].str()), std::stod(m[2].str())};
}

std::vector<std::uint8_t> write_synthetic_geotiff(const TileMeta& meta,
                                                  std::uint8_t fill) {
  if (!meta.transform.valid() || meta.band_count < 1)
    throw TiffError(TiffErrorKind::InvalidMeta,
                    "meta violates GeoTransform invariants");

  const std::uint32_t width = static_cast<std::uint32_t>(meta.transform.width);
  const std::uint32_t height = static_cast<std::uint32_t>(meta.transform.height);
  const std::uint32_t bands = static_cast<std::uint32_t>(meta.band_count);
  const std::uint64_t strip_bytes64 =
      static_cast<std::uint64_t>(width) * height * bands;
  if (strip_bytes64 > (1u << 30))
    throw TiffError(TiffErrorKind::InvalidMeta,
                    "synthetic tile payload exceeds 1 GiB");
  const std::uint32_t strip_bytes = static_cast<std::uint32_t>(strip_bytes64);

  // Layout: header (8) | IFD | external arrays | pixel strip.
  const std::uint16_t n_entries = 10;
  const std::uint32_t ifd_off = 8;
  const std::uint32_t ifd_size = 2 + 12u * n_entries + 4;
  std::uint32_t cursor = ifd_off + ifd_size;

  const std::uint32_t bits_off = bands > 2 ? cursor : 0;
  if (bands > 2) cursor += 2 * bands;
  if (cursor % 2) ++cursor;  // keep doubles word-aligned
  const std::uint32_t scale_off = cursor;
  cursor += 3 * 8;
  const std::uint32_t tiepoint_off = cursor;
  cursor += 6 * 8;
  const std::uint32_t geokey_off = cursor;
  cursor += 4 * 2 * 2;  // header + 1 key, 4 shorts each
  const std::uint32_t strip_off = cursor;

  std::vector<std::uint8_t> out;
  out.reserve(strip_off + strip_bytes);
  out.push_back('I');
  out.push_back('I');
  append_u16(out, 42);
  append_u32(out, ifd_off);

  append_u16(out, n_entries);
  auto entry = [&out](std::uint16_t tag, std::uint16_t type,
                      std::uint32_t count, std::uint32_t value) {
    append_u16(out, tag);
    append_u16(out, type);
    append_u32(out, count);
    append_u32(out, value);
  };
  // Tags must appear in ascending order per the TIFF 6.0 baseline.
  entry(kTagImageWidth, kTypeLong, 1, width);
  entry(kTagImageLength, kTypeLong, 1, height);
  if (bands > 2) {
    entry(kTagBitsPerSample, kTypeShort, bands, bits_off);
  } else if (bands == 2) {
    entry(kTagBitsPerSample, kTypeShort, 2, 8u | (8u << 16));
  } else {
    entry(kTagBitsPerSample, kTypeShort, 1, 8);
  }
  entry(kTagCompression, kTypeShort, 1, 1);  // none
  entry(kTagStripOffsets, kTypeLong, 1, strip_off);
  entry(kTagSamplesPerPixel, kTypeShort, 1, bands);
  entry(kTagStripByteCounts, kTypeLong, 1, strip_bytes);
  entry(kTagModelPixelScale, kTypeDouble, 3, scale_off);
  entry(kTagModelTiepoint, kTypeDouble, 6, tiepoint_off);
  entry(kTagGeoKeyDirectory, kTypeShort, 8, geokey_off);
  append_u32(out, 0);  // next IFD

  if (bands > 2)
    for (std::uint32_t b = 0; b < bands; ++b) append_u16(out, 8);
  while (out.size() < scale_off) out.push_back(0);

  append_f64(out, meta.transform.pixel_size_x);
  append_f64(out, -meta.transform.pixel_size_y);
  append_f64(out, 0.0);

  // Tiepoint anchored at raster (0,0).
  append_f64(out, 0.0);
  append_f64(out, 0.0);
  append_f64(out, 0.0);
  append_f64(out, meta.transform.origin_easting);
  append_f64(out, meta.transform.origin_northing);
  append_f64(out, 0.0);

  // GeoKeyDirectory: version header (1,1,0,1) then ProjectedCSTypeGeoKey.
  append_u16(out, 1);
  append_u16(out, 1);
  append_u16(out, 0);
  append_u16(out, 1);
  append_u16(out, kGeoKeyProjectedCSType);
  append_u16(out, 0);
  append_u16(out, 1);
  append_u16(out, static_cast<std::uint16_t>(meta.crs_epsg));

  out.insert(out.end(), strip_bytes, fill);
  return out;
}

ValidationReport validate_tile(const TileMeta& meta, double tolerance_deg) {
  ValidationReport report;
  using Status = ValidationCheck::Status;

  report.checks.push_back(
      {"crs_epsg_3857",
       meta.crs_epsg == 3857 ? Status::Pass : Status::Fail, 0.0,
       "EPSG:" + std::to_string(meta.crs_epsg)});

  const bool signs_ok =
      meta.transform.pixel_size_x > 0.0 && meta.transform.pixel_size_y < 0.0;
  report.checks.push_back({"pixel_size_signs",
                           signs_ok ? Status::Pass : Status::Fail, 0.0,
                           signs_ok ? "north-up" : "not north-up"});

  if (!meta.filename_center) {
    report.checks.push_back(
        {"filename_center_agreement", Status::Skipped, 0.0, "no center"});
    return report;
  }
  const auto center_proj = proj::pixel_to_projected(
      meta.transform, meta.transform.width / 2.0, meta.transform.height / 2.0);
  const auto center_geo = proj::mercator_inverse(center_proj);
  const double dlat =
      std::abs(center_geo.latitude_deg - meta.filename_center->latitude_deg);
  const double dlon =
      std::abs(center_geo.longitude_deg - meta.filename_center->longitude_deg);
  const double delta = std::max(dlat, dlon);
  report.checks.push_back(
      {"filename_center_agreement",
       delta <= tolerance_deg ? Status::Pass : Status::Fail, delta,
       "max |delta| " + std::to_string(delta) + " deg"});
  return report;
}

}  // namespace gridvec::geotiff
