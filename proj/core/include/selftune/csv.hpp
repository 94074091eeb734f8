#pragma once

#include <string>
#include <vector>

#include "selftune/types.hpp"

namespace selftune {

// Minimal numeric CSV with a mandatory header row. '#' lines are comments.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  // column index by name, -1 when absent
  Index col(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);

// rows written with %.17g so values round-trip exactly
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

// Point-cloud exchange format. Columns: optional `t` (intrinsic coordinate),
// coordinates `x1..xD`, optional integer `label`.
PointCloud load_csv_dataset(const std::string& path);
void save_csv_dataset(const std::string& path, const PointCloud& cloud);

std::string format_double(double v);  // %.17g

}  // namespace selftune
