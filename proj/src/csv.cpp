#include "plcp/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "plcp/error.hpp"

namespace plcp {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
  const std::string where = " at row " + std::to_string(row) + ", column " + std::to_string(col + 1);
  if (cell.empty()) throw DataError("missing value" + where);
  if (cell == "inf" || cell == "+inf") return kInfinity;
  if (cell == "-inf") return -kInfinity;
  double value = 0.0;
  const char* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, value);
  if (ec != std::errc() || ptr != end) throw DataError("cannot parse '" + cell + "'" + where);
  return value;
}

}  // namespace

std::size_t Table::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw DataError("column '" + name + "' not found");
  return static_cast<std::size_t>(it - header.begin());
}

Table parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  Table table;
  bool have_header = false;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    if (!have_header) {
      table.header = split_line(line);
      for (std::size_t c = 0; c < table.header.size(); ++c) {
        if (table.header[c].empty()) throw DataError("empty column name in header at column " + std::to_string(c + 1));
      }
      have_header = true;
      continue;
    }
    ++row;
    const auto cells = split_line(line);
    if (cells.size() < table.header.size()) {
      throw DataError("missing value at row " + std::to_string(row) + ", column " +
                      std::to_string(cells.size() + 1));
    }
    if (cells.size() > table.header.size()) {
      throw DataError("too many values at row " + std::to_string(row));
    }
    Vector values(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) values[c] = parse_cell(cells[c], row, c);
    table.rows.push_back(std::move(values));
  }
  if (!have_header) throw DataError("empty file");
  if (table.rows.empty()) throw DataError("empty dataset");
  return table;
}

Table load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_csv(text.str());
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string format_csv(const Table& table) {
  std::string out;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c) out += ',';
    out += table.header[c];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += format_double(row[c]);
    }
    out += '\n';
  }
  return out;
}

void save_csv(const std::filesystem::path& path, const Table& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << format_csv(table);
}

LabeledTable to_labeled(const Table& table, const CsvSchema& schema) {
  const std::size_t label = table.column(schema.label);
  std::vector<std::size_t> preds;
  for (const auto& name : schema.predictions) preds.push_back(table.column(name));
  std::vector<std::size_t> feats;
  LabeledTable out;
  if (schema.features.empty()) {
    for (std::size_t c = 0; c < table.header.size(); ++c) {
      if (c == label || std::find(preds.begin(), preds.end(), c) != preds.end()) continue;
      feats.push_back(c);
    }
  } else {
    for (const auto& name : schema.features) feats.push_back(table.column(name));
  }
  if (feats.empty()) throw DataError("dataset has no feature columns");
  for (std::size_t c : feats) out.feature_names.push_back(table.header[c]);
  out.samples.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    LabeledSample sample;
    for (std::size_t c : feats) {
      if (!std::isfinite(row[c])) throw DataError("non-finite feature at row " + std::to_string(r + 1));
      sample.x.push_back(row[c]);
    }
    sample.y = row[label];
    out.samples.push_back(std::move(sample));
    if (!preds.empty()) {
      Vector p;
      for (std::size_t c : preds) p.push_back(row[c]);
      out.predictions.push_back(std::move(p));
    }
  }
  return out;
}

Table from_labeled(std::span<const LabeledSample> samples, const std::string& label) {
  Table table;
  if (samples.empty()) return table;
  const std::size_t d = samples.front().x.size();
  for (std::size_t k = 0; k < d; ++k) table.header.push_back("x" + std::to_string(k));
  table.header.push_back(label);
  for (const auto& s : samples) {
    Vector row = s.x;
    row.push_back(s.y);
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace plcp
