#include "tbnls/csv.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace tbnls {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvTable::CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {
  if (columns_.empty()) throw std::invalid_argument("csv: no columns");
}

void CsvTable::add_row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_double(v));
  add_row_text(std::move(cells));
}

void CsvTable::add_row_text(std::vector<std::string> cells) {
  if (cells.size() != columns_.size())
    throw std::invalid_argument("csv: row has " + std::to_string(cells.size()) +
                                " cells, expected " + std::to_string(columns_.size()));
  rows_.push_back(std::move(cells));
}

void CsvTable::write(std::ostream& os) const {
  auto line = [&os](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << '\n';
  };
  line(columns_);
  for (const auto& r : rows_) line(r);
}

std::string CsvTable::str() const {
  std::ostringstream os;
  write(os);
  return os.str();
}

}  // namespace tbnls
