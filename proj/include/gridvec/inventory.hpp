#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "gridvec/detect.hpp"
#include "gridvec/grid.hpp"

namespace gridvec::inventory {

struct EmissionFactorTable {
  std::map<std::string, double> factors;  // class label -> factor
  std::string unit = "g vehicle-1 h-1";

  bool operator==(const EmissionFactorTable&) const = default;
};

class FactorError : public std::runtime_error {
public:
  explicit FactorError(const std::string& what) : std::runtime_error(what) {}
};

// `class_label = value` lines, `#` comments. Unknown labels warn and are
// ignored; a missing or negative factor for an active class throws.
EmissionFactorTable load_emission_factors(const std::string& text,
                                          const detect::ClassMap& cm,
                                          std::vector<std::string>* warnings =
                                              nullptr);

// emis[c] = counts[c] * factor[c], row-major per class.
std::vector<std::vector<float>> counts_to_emissions(
    const grid::CountGrid& g, const detect::ClassMap& cm,
    const EmissionFactorTable& table);

// --- netCDF-3 classic (CDF-1) data model -----------------------------------

enum class NcType : std::int32_t {
  Byte = 1,
  Char = 2,
  Short = 3,
  Int = 4,
  Float = 5,
  Double = 6,
};

using AttrValue = std::variant<std::string, std::vector<std::int32_t>,
                               std::vector<float>, std::vector<double>>;

struct NcAttribute {
  std::string name;
  AttrValue value;
  bool operator==(const NcAttribute&) const = default;
};

struct NcDimension {
  std::string name;
  std::int32_t length = 0;
  bool operator==(const NcDimension&) const = default;
};

// Char variables carry their data as a string; numeric variables as vectors.
using VarData = std::variant<std::string, std::vector<std::int32_t>,
                             std::vector<float>, std::vector<double>>;

struct NcVariable {
  std::string name;
  std::vector<int> dim_ids;
  std::vector<NcAttribute> attributes;
  VarData data;
  bool operator==(const NcVariable&) const = default;

  NcType type() const;
  std::int64_t element_count() const;
};

struct InventoryDataset {
  std::vector<NcDimension> dimensions;
  std::vector<NcAttribute> global_attributes;
  std::vector<NcVariable> variables;
  bool operator==(const InventoryDataset&) const = default;

  const NcVariable* find(const std::string& name) const;
};

enum class NetcdfErrorKind {
  BadMagic,
  Truncated,
  UnsupportedVersion,
  MalformedHeader,
  TooLarge,
};

class NetcdfError : public std::runtime_error {
public:
  NetcdfError(NetcdfErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  NetcdfErrorKind kind() const { return kind_; }

private:
  NetcdfErrorKind kind_;
};

std::vector<std::uint8_t> write_netcdf(const InventoryDataset& ds);
InventoryDataset read_netcdf(std::span<const std::uint8_t> bytes);

// Assembles the netCDF-facing dataset from a merged grid: lat/lon coordinate
// vectors, count_<class> planes, and optional emis_<class> planes.
InventoryDataset build_inventory(const grid::CountGrid& g,
                                 const detect::ClassMap& cm,
                                 const EmissionFactorTable* factors,
                                 const std::string& timestamp,
                                 const std::string& source);

}  // namespace gridvec::inventory
