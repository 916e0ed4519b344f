#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace rsb {

/// Shortest round-trip decimal form; "nan", "inf", "-inf" for non-finite.
std::string format_double(double v);

/// Tidy CSV with a fixed header. Every row is flushed as written so a
/// failed run leaves the rows produced so far.
class CsvWriter {
 public:
  using Cell = std::variant<double, std::int64_t, std::uint64_t, std::string, bool>;

  CsvWriter(const std::string& path, std::vector<std::string> header);
  void row(const std::vector<Cell>& cells);
  const std::string& path() const noexcept { return path_; }
  std::size_t rows() const noexcept { return rows_; }

 private:
  std::string path_;
  std::vector<std::string> header_;
  std::ofstream out_;
  std::size_t rows_ = 0;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index by name; throws invalid-argument if absent.
  std::size_t column(std::string_view name) const;
  double number(std::size_t row, std::string_view name) const;
};

/// Parses a file written by CsvWriter (no quoting; cells never contain commas).
CsvTable read_csv(const std::string& path);

void write_text_file(const std::string& path, std::string_view text);
std::string read_text_file(const std::string& path);

}  // namespace rsb
