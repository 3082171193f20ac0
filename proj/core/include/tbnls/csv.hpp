#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace tbnls {

/// Round-trip formatting: 17 significant digits, "nan"/"inf" spelled out.
std::string format_double(double v);

/// Comma-separated table with a one-line header and a fixed column order.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns);

  const std::vector<std::string>& columns() const { return columns_; }
  std::size_t rows() const { return rows_.size(); }

  void add_row(const std::vector<double>& values);
  /// Cells already formatted (for text columns).
  void add_row_text(std::vector<std::string> cells);

  void write(std::ostream& os) const;
  std::string str() const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace tbnls
