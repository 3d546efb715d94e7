#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace cgpkit {

struct CsvRow {
  std::vector<std::string> fields;
  /// 1-based line on which the record starts.
  std::size_t line = 0;
};

/// RFC-4180 records: comma separated, double-quoted fields may contain commas,
/// quotes ("") and newlines. A trailing CR is stripped. Blank lines are skipped.
/// Throws ParseError on an unterminated quote or stray text after a quote.
std::vector<CsvRow> read_csv(std::istream& in);

std::string csv_escape(std::string_view field);

/// Shortest decimal that round-trips the double exactly.
std::string format_double(double v);

/// Accumulates rows and writes them via write_file_atomic.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  CsvTable& add_row(const std::vector<std::string>& fields);
  std::string str() const;
  void write(const std::filesystem::path& path) const;
  std::size_t rows() const noexcept { return body_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::string> body_;
};

/// Writes to a sibling temp file then renames over `path`, so readers never
/// observe a partial file. Throws std::filesystem::filesystem_error / Error on I/O failure.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace cgpkit
