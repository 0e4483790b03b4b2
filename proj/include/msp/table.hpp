#pragma once

#include "msp/types.hpp"

#include <string>
#include <vector>

namespace msp {

/// Malformed or unreadable input data (CSV tables, sidecar files).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Row-oriented numeric table keyed by a task id column. Column zero is the
/// task id; the last column is the response; everything between is a feature.
struct RawTaskTable {
  std::vector<std::string> columns;  // includes "task_id" first
  struct Row {
    std::string task_id;
    std::vector<double> values;      // features..., response
  };
  std::vector<Row> rows;

  Index feature_count() const { return static_cast<Index>(columns.size()) - 2; }
  const std::string& response_column() const { return columns.back(); }
};

RawTaskTable read_task_table(const std::string& path);
void write_task_table(const RawTaskTable& table, const std::string& path);

/// Flattens a dataset into the table schema (task ids "0".."T-1", feature
/// columns f0..f{d-1}, response y) for round-trips through the file format.
RawTaskTable to_raw_table(const MultiTaskDataset& data);

}  // namespace msp
