#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "plcp/types.hpp"

namespace plcp {

/// A rectangular numeric table with a header row.
struct Table {
  std::vector<std::string> header;
  std::vector<Vector> rows;

  /// Index of a named column; throws DataError when absent.
  std::size_t column(const std::string& name) const;
};

/// Parses comma-separated numeric text with a header. Errors name the data
/// row (1-based, header excluded) and column of the offending cell.
Table parse_csv(const std::string& text);
Table load_csv(const std::filesystem::path& path);
std::string format_csv(const Table& table);
void save_csv(const std::filesystem::path& path, const Table& table);

/// %.17g, with "inf"/"-inf"/"nan" for non-finite values.
std::string format_double(double value);

/// Which columns of a table hold features, the label, and predictions.
struct CsvSchema {
  std::string label = "y";
  /// Empty means every column that is not the label or a prediction.
  std::vector<std::string> features;
  std::vector<std::string> predictions;
};

struct LabeledTable {
  std::vector<std::string> feature_names;
  std::vector<LabeledSample> samples;
  /// Row j holds the prediction columns of sample j (empty when none are named).
  std::vector<Vector> predictions;
};

LabeledTable to_labeled(const Table& table, const CsvSchema& schema);
Table from_labeled(std::span<const LabeledSample> samples, const std::string& label = "y");

}  // namespace plcp
