#include "selftune/csv.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

namespace selftune {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Index CsvTable::col(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<Index>(i);
  return -1;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    // trim surrounding whitespace
    const auto a = cell.find_first_not_of(" \t\r");
    const auto b = cell.find_last_not_of(" \t\r");
    out.push_back(a == std::string::npos ? "" : cell.substr(a, b - a + 1));
  }
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_double(const std::string& cell, const std::string& path,
                    std::size_t lineno) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (cell.empty() || end != cell.c_str() + cell.size() || errno == ERANGE)
    throw std::runtime_error("csv: non-numeric cell '" + cell + "' at " +
                             path + ":" + std::to_string(lineno));
  return v;
}

}  // namespace

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("csv: cannot open " + path);

  CsvTable table;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split_line(line);
    if (!have_header) {
      table.header = cells;
      have_header = true;
      continue;
    }
    if (cells.size() != table.header.size())
      throw std::runtime_error("csv: ragged row at " + path + ":" +
                               std::to_string(lineno));
    std::vector<double> row(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c)
      row[c] = parse_double(cells[c], path, lineno);
    table.rows.push_back(std::move(row));
  }
  if (!have_header) throw std::runtime_error("csv: empty file " + path);
  return table;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("csv: cannot write " + path);
  for (std::size_t i = 0; i < header.size(); ++i)
    out << header[i] << (i + 1 < header.size() ? "," : "");
  out << "\n";
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw std::logic_error("csv: row width mismatch writing " + path);
    for (std::size_t i = 0; i < row.size(); ++i)
      out << format_double(row[i]) << (i + 1 < row.size() ? "," : "");
    out << "\n";
  }
  if (!out) throw std::runtime_error("csv: write failed for " + path);
}

PointCloud load_csv_dataset(const std::string& path) {
  const CsvTable table = read_csv(path);
  if (table.rows.empty())
    throw std::runtime_error("csv: no data rows in " + path);

  const Index t_col = table.col("t");
  const Index label_col = table.col("label");
  std::vector<Index> coord_cols;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    const Index ci = static_cast<Index>(c);
    if (ci == t_col || ci == label_col) continue;
    coord_cols.push_back(ci);
  }
  if (coord_cols.empty())
    throw std::runtime_error("csv: no coordinate columns in " + path);

  const Index n = static_cast<Index>(table.rows.size());
  PointCloud cloud;
  cloud.coords.resize(n, static_cast<Index>(coord_cols.size()));
  if (t_col >= 0) cloud.param = Vec(n);
  if (label_col >= 0) cloud.labels = IVec(n);
  for (Index i = 0; i < n; ++i) {
    const auto& row = table.rows[i];
    for (std::size_t c = 0; c < coord_cols.size(); ++c)
      cloud.coords(i, static_cast<Index>(c)) = row[coord_cols[c]];
    if (t_col >= 0) (*cloud.param)[i] = row[t_col];
    if (label_col >= 0)
      (*cloud.labels)[i] = static_cast<int>(std::lround(row[label_col]));
  }
  return cloud;
}

void save_csv_dataset(const std::string& path, const PointCloud& cloud) {
  cloud.check_consistent();
  std::vector<std::string> header;
  if (cloud.param) header.push_back("t");
  for (Index c = 0; c < cloud.dim(); ++c)
    header.push_back("x" + std::to_string(c + 1));
  if (cloud.labels) header.push_back("label");

  std::vector<std::vector<double>> rows;
  rows.reserve(cloud.size());
  for (Index i = 0; i < cloud.size(); ++i) {
    std::vector<double> row;
    row.reserve(header.size());
    if (cloud.param) row.push_back((*cloud.param)[i]);
    for (Index c = 0; c < cloud.dim(); ++c) row.push_back(cloud.coords(i, c));
    if (cloud.labels) row.push_back(static_cast<double>((*cloud.labels)[i]));
    rows.push_back(std::move(row));
  }
  write_csv(path, header, rows);
}

}  // namespace selftune
