#include "msp/table.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace msp {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& cell, std::size_t line_no) {
  double v = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end)
    throw DataError("task table line " + std::to_string(line_no) + ": bad number '" + cell +
                    "'");
  return v;
}

}  // namespace

RawTaskTable read_task_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open task table: " + path);
  RawTaskTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (line_no == 1) {
      if (cells.size() < 3)
        throw DataError("task table needs task_id, at least one feature, and a response");
      table.columns = cells;
      continue;
    }
    if (cells.size() != table.columns.size())
      throw DataError("task table line " + std::to_string(line_no) + ": expected " +
                      std::to_string(table.columns.size()) + " cells, got " +
                      std::to_string(cells.size()));
    RawTaskTable::Row row;
    row.task_id = cells.front();
    row.values.reserve(cells.size() - 1);
    for (std::size_t i = 1; i < cells.size(); ++i)
      row.values.push_back(parse_number(cells[i], line_no));
    table.rows.push_back(std::move(row));
  }
  if (table.columns.empty()) throw DataError("task table is empty: " + path);
  return table;
}

void write_task_table(const RawTaskTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write task table: " + path);
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i > 0) out << ',';
    out << table.columns[i];
  }
  out << '\n';
  out.precision(17);
  for (const auto& row : table.rows) {
    out << row.task_id;
    for (double v : row.values) out << ',' << v;
    out << '\n';
  }
}

RawTaskTable to_raw_table(const MultiTaskDataset& data) {
  RawTaskTable table;
  table.columns.push_back("task_id");
  for (Index j = 0; j < data.dim(); ++j) table.columns.push_back("f" + std::to_string(j));
  table.columns.push_back("y");
  for (Index t = 0; t < data.task_count(); ++t) {
    const TaskData& task = data.tasks[static_cast<std::size_t>(t)];
    for (Index i = 0; i < task.samples(); ++i) {
      RawTaskTable::Row row;
      row.task_id = std::to_string(t);
      row.values.reserve(static_cast<std::size_t>(data.dim()) + 1);
      for (Index j = 0; j < data.dim(); ++j) row.values.push_back(task.design(i, j));
      row.values.push_back(task.response(i));
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

}  // namespace msp
