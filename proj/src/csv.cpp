#include "nvltm/csv.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "nvltm/errors.hpp"

namespace nvltm {

namespace {

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string header_field(const Column& c) {
  return c.unit.empty() ? c.name : c.name + " [" + c.unit + "]";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

const Column& Table::at(const std::string& name) const {
  for (const auto& c : columns)
    if (c.name == name) return c;
  throw InvalidInput("Table: no column named " + name);
}

void Table::validate() const {
  if (columns.empty()) throw InvalidInput("Table: no columns");
  const std::size_t n = columns.front().values.size();
  for (const auto& c : columns) {
    if (c.name.empty()) throw InvalidInput("Table: unnamed column");
    if (c.values.size() != n) throw InvalidInput("Table: ragged columns");
  }
}

void export_csv(const Table& table, const std::string& path) {
  table.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("export_csv: cannot open " + path);

  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out << ',';
    out << header_field(table.columns[c]);
  }
  out << '\n';
  const std::size_t rows = table.rows();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      if (c) out << ',';
      out << format_g17(table.columns[c].values[r]);
    }
    out << '\n';
  }
  if (!out) throw IoError("export_csv: write failed for " + path);
}

Table import_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("import_csv: cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw IoError("import_csv: empty file " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();

  Table table;
  for (const auto& field : split_csv_line(line)) {
    Column col;
    const auto open = field.find(" [");
    if (open != std::string::npos && field.back() == ']') {
      col.name = field.substr(0, open);
      col.unit = field.substr(open + 2, field.size() - open - 3);
    } else {
      col.name = field;
    }
    table.columns.push_back(std::move(col));
  }

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != table.columns.size())
      throw IoError("import_csv: " + path + ": wrong field count on line " +
                    std::to_string(line_no));
    for (std::size_t c = 0; c < fields.size(); ++c) {
      char* end = nullptr;
      const double v = std::strtod(fields[c].c_str(), &end);
      if (end == fields[c].c_str())
        throw IoError("import_csv: " + path + ": bad number on line " +
                      std::to_string(line_no));
      table.columns[c].values.push_back(v);
    }
  }
  table.validate();
  return table;
}

Table trace_table(const TimeTrace& trace, std::size_t decimate) {
  trace.validate();
  if (decimate == 0) decimate = 1;
  Table t;
  Column time{"time", "s", {}};
  Column volts{"voltage", "V", {}};
  for (std::size_t i = 0; i < trace.samples.size(); i += decimate) {
    time.values.push_back(trace.time_at(i));
    volts.values.push_back(trace.samples[i]);
  }
  t.columns = {std::move(time), std::move(volts)};
  return t;
}

Table spectrum_table(const SpectralDensity& sd) {
  sd.validate();
  Table t;
  t.columns = {Column{"frequency", "Hz", sd.freqs}, Column{"density", sd.units, sd.values}};
  return t;
}

SpectralDensity spectrum_from_table(const Table& table) {
  table.validate();
  SpectralDensity sd;
  sd.freqs = table.at("frequency").values;
  sd.values = table.at("density").values;
  sd.units = table.at("density").unit;
  sd.validate();  // enforces the strictly increasing axis on load
  return sd;
}

TimeTrace trace_from_table(const Table& table) {
  table.validate();
  const auto& time = table.at("time").values;
  const auto& volts = table.at("voltage").values;
  if (time.size() < 2) throw InvalidInput("trace_from_table: need at least 2 samples");
  TimeTrace trace;
  trace.t0 = time.front();
  trace.fs = 1.0 / (time[1] - time[0]);
  trace.samples = volts;
  trace.validate();
  return trace;
}

}  // namespace nvltm
