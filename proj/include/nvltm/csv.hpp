#pragma once

#include <string>
#include <vector>

#include "nvltm/spectral.hpp"
#include "nvltm/trace.hpp"

namespace nvltm {

struct Column {
  std::string name;
  std::string unit;  // empty for dimensionless
  std::vector<double> values;
};

struct Table {
  std::vector<Column> columns;

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().values.size(); }
  const Column& at(const std::string& name) const;
  void validate() const;  // rectangular, named columns
};

// UTF-8, comma separated, header "name [unit]", 17 significant digits,
// LF line endings. Round-trips doubles bit-exactly.
void export_csv(const Table& table, const std::string& path);
Table import_csv(const std::string& path);

Table trace_table(const TimeTrace& trace, std::size_t decimate = 1);
Table spectrum_table(const SpectralDensity& sd);

// Load-time validation included: frequency axis must be strictly increasing.
SpectralDensity spectrum_from_table(const Table& table);
TimeTrace trace_from_table(const Table& table);

}  // namespace nvltm
