#include "gridvec/inventory.hpp"

#include <bit>
#include <cstring>
#include <limits>
#include <sstream>

namespace gridvec::inventory {

namespace {

constexpr std::int32_t kTagDimension = 0x0A;
constexpr std::int32_t kTagVariable = 0x0B;
constexpr std::int32_t kTagAttribute = 0x0C;
constexpr std::int64_t kMaxOffset = std::numeric_limits<std::int32_t>::max();

std::size_t nc_type_size(NcType t) {
  switch (t) {
    case NcType::Byte:
    case NcType::Char:
      return 1;
    case NcType::Short:
      return 2;
    case NcType::Int:
    case NcType::Float:
      return 4;
    case NcType::Double:
      return 8;
  }
  return 0;
}

[[noreturn]] void fail(NetcdfErrorKind kind, const std::string& what) {
  throw NetcdfError(kind, what);
}

// --- encoding ---------------------------------------------------------------

class Encoder {
public:
  std::vector<std::uint8_t> out;

  void u8(std::uint8_t v) { out.push_back(v); }

  void i32(std::int32_t v) {
    const auto u = static_cast<std::uint32_t>(v);
    out.push_back(static_cast<std::uint8_t>(u >> 24));
    out.push_back(static_cast<std::uint8_t>(u >> 16));
    out.push_back(static_cast<std::uint8_t>(u >> 8));
    out.push_back(static_cast<std::uint8_t>(u));
  }

  void f32(float v) { i32(std::bit_cast<std::int32_t>(v)); }

  void f64(double v) {
    const auto u = std::bit_cast<std::uint64_t>(v);
    for (int i = 7; i >= 0; --i)
      out.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
  }

  void pad4() {
    while (out.size() % 4) out.push_back(0);
  }

  void name(const std::string& s) {
    i32(static_cast<std::int32_t>(s.size()));
    out.insert(out.end(), s.begin(), s.end());
    pad4();
  }

  void attr_value(const AttrValue& v) {
    if (const auto* s = std::get_if<std::string>(&v)) {
      i32(static_cast<std::int32_t>(NcType::Char));
      i32(static_cast<std::int32_t>(s->size()));
      out.insert(out.end(), s->begin(), s->end());
    } else if (const auto* iv = std::get_if<std::vector<std::int32_t>>(&v)) {
      i32(static_cast<std::int32_t>(NcType::Int));
      i32(static_cast<std::int32_t>(iv->size()));
      for (auto x : *iv) i32(x);
    } else if (const auto* fv = std::get_if<std::vector<float>>(&v)) {
      i32(static_cast<std::int32_t>(NcType::Float));
      i32(static_cast<std::int32_t>(fv->size()));
      for (auto x : *fv) f32(x);
    } else {
      const auto& dv = std::get<std::vector<double>>(v);
      i32(static_cast<std::int32_t>(NcType::Double));
      i32(static_cast<std::int32_t>(dv.size()));
      for (auto x : dv) f64(x);
    }
    pad4();
  }

  void attr_list(const std::vector<NcAttribute>& atts) {
    if (atts.empty()) {
      i32(0);  // ABSENT tag
      i32(0);
    } else {
      i32(kTagAttribute);
      i32(static_cast<std::int32_t>(atts.size()));
      for (const auto& a : atts) {
        name(a.name);
        attr_value(a.value);
      }
    }
  }
};

// --- decoding ---------------------------------------------------------------

class Decoder {
public:
  explicit Decoder(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t pos() const { return pos_; }
  std::size_t size() const { return bytes_.size(); }

  std::int32_t i32() {
    need(4);
    std::int32_t v = (static_cast<std::int32_t>(bytes_[pos_]) << 24) |
                     (bytes_[pos_ + 1] << 16) | (bytes_[pos_ + 2] << 8) |
                     bytes_[pos_ + 3];
    pos_ += 4;
    return v;
  }

  float f32_at(std::size_t off) const {
    std::uint32_t u = (static_cast<std::uint32_t>(bytes_[off]) << 24) |
                      (bytes_[off + 1] << 16) | (bytes_[off + 2] << 8) |
                      bytes_[off + 3];
    return std::bit_cast<float>(u);
  }

  double f64_at(std::size_t off) const {
    std::uint64_t u = 0;
    for (int i = 0; i < 8; ++i) u = (u << 8) | bytes_[off + i];
    return std::bit_cast<double>(u);
  }

  std::string name() {
    const std::int32_t len = i32();
    if (len < 0) fail(NetcdfErrorKind::MalformedHeader, "negative name length");
    need(static_cast<std::size_t>(len));
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_),
                  static_cast<std::size_t>(len));
    pos_ += static_cast<std::size_t>(len);
    skip_pad();
    return s;
  }

  void skip_pad() {
    while (pos_ % 4) {
      need(1);
      ++pos_;
    }
  }

  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size())
      fail(NetcdfErrorKind::Truncated,
           "unexpected end of file at offset " + std::to_string(pos_));
  }

  void need_at(std::size_t off, std::size_t n) const {
    if (off + n > bytes_.size() || off + n < off)
      fail(NetcdfErrorKind::Truncated, "variable data past end of file");
  }

  void advance(std::size_t n) {
    need(n);
    pos_ += n;
  }

  const std::uint8_t* data() const { return bytes_.data(); }

private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

AttrValue decode_attr_value(Decoder& d) {
  const std::int32_t type = d.i32();
  const std::int32_t nelems = d.i32();
  if (nelems < 0)
    fail(NetcdfErrorKind::MalformedHeader, "negative attribute length");
  const std::size_t n = static_cast<std::size_t>(nelems);
  // Bound-check against the remaining bytes before any allocation so a
  // corrupt element count raises Truncated instead of exhausting memory.
  const std::size_t elem_size = nc_type_size(static_cast<NcType>(type));
  if (elem_size == 0)
    fail(NetcdfErrorKind::MalformedHeader,
         "unknown attribute type " + std::to_string(type));
  d.need(n * elem_size);
  AttrValue v;
  switch (static_cast<NcType>(type)) {
    case NcType::Char: {
      d.need(n);
      std::string s(reinterpret_cast<const char*>(d.data() + d.pos()), n);
      d.advance(n);
      v = std::move(s);
      break;
    }
    case NcType::Byte: {
      std::vector<std::int32_t> iv(n);
      for (std::size_t i = 0; i < n; ++i) {
        d.need(1);
        iv[i] = static_cast<std::int8_t>(d.data()[d.pos()]);
        d.advance(1);
      }
      v = std::move(iv);
      break;
    }
    case NcType::Short: {
      std::vector<std::int32_t> iv(n);
      for (std::size_t i = 0; i < n; ++i) {
        d.need(2);
        iv[i] = static_cast<std::int16_t>((d.data()[d.pos()] << 8) |
                                          d.data()[d.pos() + 1]);
        d.advance(2);
      }
      v = std::move(iv);
      break;
    }
    case NcType::Int: {
      std::vector<std::int32_t> iv(n);
      for (std::size_t i = 0; i < n; ++i) iv[i] = d.i32();
      v = std::move(iv);
      break;
    }
    case NcType::Float: {
      std::vector<float> fv(n);
      for (std::size_t i = 0; i < n; ++i) {
        d.need(4);
        fv[i] = d.f32_at(d.pos());
        d.advance(4);
      }
      v = std::move(fv);
      break;
    }
    case NcType::Double: {
      std::vector<double> dv(n);
      for (std::size_t i = 0; i < n; ++i) {
        d.need(8);
        dv[i] = d.f64_at(d.pos());
        d.advance(8);
      }
      v = std::move(dv);
      break;
    }
    default:
      fail(NetcdfErrorKind::MalformedHeader,
           "unknown attribute type " + std::to_string(type));
  }
  d.skip_pad();
  return v;
}

std::vector<NcAttribute> decode_attr_list(Decoder& d) {
  const std::int32_t tag = d.i32();
  const std::int32_t nelems = d.i32();
  if (tag == 0 && nelems == 0) return {};
  if (tag != kTagAttribute || nelems < 0)
    fail(NetcdfErrorKind::MalformedHeader, "bad attribute list tag");
  // Each attribute occupies at least 12 header bytes; reject counts the
  // remaining input cannot possibly hold before reserving storage.
  if (static_cast<std::size_t>(nelems) > (d.size() - d.pos()) / 12)
    fail(NetcdfErrorKind::Truncated, "attribute count exceeds file size");
  std::vector<NcAttribute> atts;
  atts.reserve(static_cast<std::size_t>(nelems));
  for (std::int32_t i = 0; i < nelems; ++i) {
    NcAttribute a;
    a.name = d.name();
    a.value = decode_attr_value(d);
    atts.push_back(std::move(a));
  }
  return atts;
}

}  // namespace

NcType NcVariable::type() const {
  if (std::holds_alternative<std::string>(data)) return NcType::Char;
  if (std::holds_alternative<std::vector<std::int32_t>>(data))
    return NcType::Int;
  if (std::holds_alternative<std::vector<float>>(data)) return NcType::Float;
  return NcType::Double;
}

std::int64_t NcVariable::element_count() const {
  return std::visit(
      [](const auto& v) { return static_cast<std::int64_t>(v.size()); }, data);
}

const NcVariable* InventoryDataset::find(const std::string& name) const {
  for (const auto& v : variables)
    if (v.name == name) return &v;
  return nullptr;
}

std::vector<std::uint8_t> write_netcdf(const InventoryDataset& ds) {
  Encoder enc;
  enc.out.insert(enc.out.end(), {'C', 'D', 'F', 0x01});
  enc.i32(0);  // numrecs; no record variables

  if (ds.dimensions.empty()) {
    enc.i32(0);
    enc.i32(0);
  } else {
    enc.i32(kTagDimension);
    enc.i32(static_cast<std::int32_t>(ds.dimensions.size()));
    for (const auto& dim : ds.dimensions) {
      enc.name(dim.name);
      enc.i32(dim.length);
    }
  }

  enc.attr_list(ds.global_attributes);

  // Variable list; begin offsets are patched once the header size is known.
  std::vector<std::size_t> begin_positions;
  std::vector<std::int64_t> vsizes;
  if (ds.variables.empty()) {
    enc.i32(0);
    enc.i32(0);
  } else {
    enc.i32(kTagVariable);
    enc.i32(static_cast<std::int32_t>(ds.variables.size()));
    for (const auto& var : ds.variables) {
      enc.name(var.name);
      enc.i32(static_cast<std::int32_t>(var.dim_ids.size()));
      for (int id : var.dim_ids) enc.i32(id);
      enc.attr_list(var.attributes);
      enc.i32(static_cast<std::int32_t>(var.type()));
      const std::int64_t raw =
          var.element_count() *
          static_cast<std::int64_t>(nc_type_size(var.type()));
      const std::int64_t vsize = (raw + 3) / 4 * 4;
      if (vsize > kMaxOffset)
        fail(NetcdfErrorKind::TooLarge, "variable " + var.name +
                                            " exceeds CDF-1 size limits");
      vsizes.push_back(vsize);
      enc.i32(static_cast<std::int32_t>(vsize));
      begin_positions.push_back(enc.out.size());
      enc.i32(0);  // begin placeholder
    }
  }

  // Data section starts at the first 4-byte boundary after the header.
  std::int64_t offset = static_cast<std::int64_t>((enc.out.size() + 3) / 4 * 4);
  for (std::size_t i = 0; i < begin_positions.size(); ++i) {
    if (offset > kMaxOffset)
      fail(NetcdfErrorKind::TooLarge, "data section exceeds CDF-1 offsets");
    const auto u = static_cast<std::uint32_t>(offset);
    enc.out[begin_positions[i]] = static_cast<std::uint8_t>(u >> 24);
    enc.out[begin_positions[i] + 1] = static_cast<std::uint8_t>(u >> 16);
    enc.out[begin_positions[i] + 2] = static_cast<std::uint8_t>(u >> 8);
    enc.out[begin_positions[i] + 3] = static_cast<std::uint8_t>(u);
    offset += vsizes[i];
  }

  enc.pad4();
  for (const auto& var : ds.variables) {
    std::visit(
        [&enc](const auto& data) {
          using T = std::decay_t<decltype(data)>;
          if constexpr (std::is_same_v<T, std::string>) {
            enc.out.insert(enc.out.end(), data.begin(), data.end());
          } else if constexpr (std::is_same_v<T, std::vector<std::int32_t>>) {
            for (auto x : data) enc.i32(x);
          } else if constexpr (std::is_same_v<T, std::vector<float>>) {
            for (auto x : data) enc.f32(x);
          } else {
            for (auto x : data) enc.f64(x);
          }
        },
        var.data);
    enc.pad4();
  }
  return std::move(enc.out);
}

InventoryDataset read_netcdf(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4)
    fail(NetcdfErrorKind::Truncated, "shorter than the magic bytes");
  if (bytes[0] != 'C' || bytes[1] != 'D' || bytes[2] != 'F')
    fail(NetcdfErrorKind::BadMagic, "not a netCDF classic file");
  if (bytes[3] == 0x02 || bytes[3] == 0x05)
    fail(NetcdfErrorKind::UnsupportedVersion,
         "CDF-" + std::to_string(bytes[3]) + " offsets are not supported");
  if (bytes[3] != 0x01)
    fail(NetcdfErrorKind::BadMagic,
         "unknown version byte " + std::to_string(bytes[3]));

  Decoder d(bytes);
  d.advance(4);
  const std::int32_t numrecs = d.i32();
  if (numrecs != 0)
    fail(NetcdfErrorKind::MalformedHeader,
         "record variables are not supported");

  InventoryDataset ds;

  const std::int32_t dim_tag = d.i32();
  const std::int32_t n_dims = d.i32();
  if (!(dim_tag == kTagDimension || (dim_tag == 0 && n_dims == 0)) || n_dims < 0)
    fail(NetcdfErrorKind::MalformedHeader, "bad dimension list tag");
  for (std::int32_t i = 0; i < n_dims; ++i) {
    NcDimension dim;
    dim.name = d.name();
    dim.length = d.i32();
    if (dim.length <= 0)
      fail(NetcdfErrorKind::MalformedHeader,
           "record or non-positive dimension '" + dim.name + "'");
    ds.dimensions.push_back(std::move(dim));
  }

  ds.global_attributes = decode_attr_list(d);

  const std::int32_t var_tag = d.i32();
  const std::int32_t n_vars = d.i32();
  if (!(var_tag == kTagVariable || (var_tag == 0 && n_vars == 0)) || n_vars < 0)
    fail(NetcdfErrorKind::MalformedHeader, "bad variable list tag");

  for (std::int32_t i = 0; i < n_vars; ++i) {
    NcVariable var;
    var.name = d.name();
    const std::int32_t ndims = d.i32();
    if (ndims < 0)
      fail(NetcdfErrorKind::MalformedHeader, "negative dimension count");
    std::int64_t nelems = 1;
    for (std::int32_t k = 0; k < ndims; ++k) {
      const std::int32_t id = d.i32();
      if (id < 0 || id >= static_cast<std::int32_t>(ds.dimensions.size()))
        fail(NetcdfErrorKind::MalformedHeader,
             "dimension id " + std::to_string(id) + " out of range");
      var.dim_ids.push_back(id);
      nelems *= ds.dimensions[static_cast<std::size_t>(id)].length;
      if (nelems > kMaxOffset)
        fail(NetcdfErrorKind::TooLarge,
             "variable '" + var.name + "' exceeds CDF-1 size limits");
    }
    var.attributes = decode_attr_list(d);
    const std::int32_t type = d.i32();
    const std::size_t elem_size = nc_type_size(static_cast<NcType>(type));
    if (elem_size == 0)
      fail(NetcdfErrorKind::MalformedHeader,
           "unknown variable type " + std::to_string(type));
    d.i32();  // vsize (informational; recomputed below)
    const std::int32_t begin = d.i32();
    if (begin < 0)
      fail(NetcdfErrorKind::MalformedHeader, "negative data offset");

    const std::size_t off = static_cast<std::size_t>(begin);
    const std::size_t n = static_cast<std::size_t>(nelems);
    // Data is stored 4-byte aligned with zero padding; the pad bytes are part
    // of the on-disk layout, so a file missing them is truncated.
    d.need_at(off, (n * elem_size + 3) / 4 * 4);
    switch (static_cast<NcType>(type)) {
      case NcType::Char: {
        var.data = std::string(reinterpret_cast<const char*>(d.data() + off), n);
        break;
      }
      case NcType::Byte: {
        std::vector<std::int32_t> iv(n);
        for (std::size_t k = 0; k < n; ++k)
          iv[k] = static_cast<std::int8_t>(d.data()[off + k]);
        var.data = std::move(iv);
        break;
      }
      case NcType::Short: {
        std::vector<std::int32_t> iv(n);
        for (std::size_t k = 0; k < n; ++k)
          iv[k] = static_cast<std::int16_t>((d.data()[off + 2 * k] << 8) |
                                            d.data()[off + 2 * k + 1]);
        var.data = std::move(iv);
        break;
      }
      case NcType::Int: {
        std::vector<std::int32_t> iv(n);
        for (std::size_t k = 0; k < n; ++k) {
          std::uint32_t u = 0;
          for (int b = 0; b < 4; ++b) u = (u << 8) | d.data()[off + 4 * k + b];
          iv[k] = static_cast<std::int32_t>(u);
        }
        var.data = std::move(iv);
        break;
      }
      case NcType::Float: {
        std::vector<float> fv(n);
        for (std::size_t k = 0; k < n; ++k) fv[k] = d.f32_at(off + 4 * k);
        var.data = std::move(fv);
        break;
      }
      case NcType::Double: {
        std::vector<double> dv(n);
        for (std::size_t k = 0; k < n; ++k) dv[k] = d.f64_at(off + 8 * k);
        var.data = std::move(dv);
        break;
      }
    }
    ds.variables.push_back(std::move(var));
  }
  return ds;
}

EmissionFactorTable load_emission_factors(const std::string& text,
                                          const detect::ClassMap& cm,
                                          std::vector<std::string>* warnings) {
  EmissionFactorTable table;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    std::string line = hash == std::string::npos ? raw : raw.substr(0, hash);
    const auto begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos) continue;
    const auto end = line.find_last_not_of(" \t\r");
    line = line.substr(begin, end - begin + 1);

    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw FactorError("line " + std::to_string(line_no) +
                        ": expected `class_label = value`");
    std::string label = line.substr(0, eq);
    label.erase(label.find_last_not_of(" \t") + 1);
    std::string value_str = line.substr(eq + 1);
    value_str.erase(0, value_str.find_first_not_of(" \t"));

    if (label == "unit") {
      table.unit = value_str;
      continue;
    }

    std::size_t consumed = 0;
    double value;
    try {
      value = std::stod(value_str, &consumed);
    } catch (const std::exception&) {
      throw FactorError("line " + std::to_string(line_no) +
                        ": non-numeric factor '" + value_str + "'");
    }
    if (consumed != value_str.size())
      throw FactorError("line " + std::to_string(line_no) +
                        ": trailing junk after factor");
    if (value < 0.0)
      throw FactorError("negative factor for '" + label + "'");

    bool known = false;
    for (const auto& n : cm.names) known = known || n == label;
    if (!known) {
      if (warnings)
        warnings->push_back("unknown class label '" + label + "' ignored");
      continue;
    }
    table.factors[label] = value;
  }
  for (const auto& n : cm.names)
    if (!table.factors.contains(n))
      throw FactorError("missing emission factor for class '" + n + "'");
  return table;
}

std::vector<std::vector<float>> counts_to_emissions(
    const grid::CountGrid& g, const detect::ClassMap& cm,
    const EmissionFactorTable& table) {
  std::vector<std::vector<float>> emis(g.counts.size());
  for (std::size_t c = 0; c < g.counts.size(); ++c) {
    const double factor = table.factors.at(cm.names[c]);
    emis[c].resize(g.counts[c].size());
    for (std::size_t i = 0; i < g.counts[c].size(); ++i)
      emis[c][i] = static_cast<float>(g.counts[c][i] * factor);
  }
  return emis;
}

InventoryDataset build_inventory(const grid::CountGrid& g,
                                 const detect::ClassMap& cm,
                                 const EmissionFactorTable* factors,
                                 const std::string& timestamp,
                                 const std::string& source) {
  const auto centers = grid::cell_centers(g.spec);
  InventoryDataset ds;
  ds.dimensions = {{"lat", g.spec.n_rows}, {"lon", g.spec.n_cols}};
  ds.global_attributes = {
      {"cell_size_m", std::vector<double>{g.spec.cell_size}},
      {"crs", std::string("EPSG:3857")},
      {"conf_threshold", std::vector<double>{g.conf_threshold}},
      {"source", source},
      {"created", timestamp},
  };

  NcVariable lat;
  lat.name = "latitude";
  lat.dim_ids = {0};
  lat.attributes = {{"units", std::string("degrees_north")}};
  lat.data = centers.latitudes;
  ds.variables.push_back(std::move(lat));

  NcVariable lon;
  lon.name = "longitude";
  lon.dim_ids = {1};
  lon.attributes = {{"units", std::string("degrees_east")}};
  lon.data = centers.longitudes;
  ds.variables.push_back(std::move(lon));

  for (std::size_t c = 0; c < g.counts.size(); ++c) {
    NcVariable v;
    v.name = "count_" + cm.names[c];
    v.dim_ids = {0, 1};
    v.attributes = {{"units", std::string("objects per cell")},
                    {"class", cm.names[c]}};
    v.data = g.counts[c];
    ds.variables.push_back(std::move(v));
  }

  if (factors) {
    const auto emis = counts_to_emissions(g, cm, *factors);
    for (std::size_t c = 0; c < emis.size(); ++c) {
      NcVariable v;
      v.name = "emis_" + cm.names[c];
      v.dim_ids = {0, 1};
      v.attributes = {{"units", factors->unit}, {"class", cm.names[c]}};
      v.data = emis[c];
      ds.variables.push_back(std::move(v));
    }
  }
  return ds;
}

}  // namespace gridvec::inventory
