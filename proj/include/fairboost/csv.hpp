#ifndef FAIRBOOST_CSV_HPP_
#define FAIRBOOST_CSV_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fairboost {

/// Header plus string cells; every row has header.size() cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Position of the first column called `name`.
  std::optional<std::size_t> column(std::string_view name) const;
};

struct CsvOptions {
  char delimiter = ',';
  bool has_header = true;
  /// Strip spaces and tabs around unquoted cells (the raw UCI files use ", ").
  bool trim = false;
  /// Skip lines that are empty after trimming.
  bool skip_blank_lines = true;
};

/// RFC 4180 reader: quoted cells may hold delimiters, newlines and "" escapes.
/// Ragged rows are a DataError naming the line.
CsvTable parse_csv(std::string_view text, const CsvOptions& options = {});
CsvTable read_csv(const std::filesystem::path& path, const CsvOptions& options = {});

/// Quotes a cell only when it contains the delimiter, a quote, or a newline.
std::string quote_csv_cell(std::string_view cell, char delimiter = ',');
std::string format_csv_row(const std::vector<std::string>& cells, char delimiter = ',');

std::string read_text_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`, so a failed
/// run never leaves a partial file behind.
void write_text_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// Shortest decimal that parses back to the same double.
std::string format_real(double value);

/// Full-string parse; nullopt on trailing garbage or empty input.
std::optional<double> parse_real(std::string_view text);
std::optional<long long> parse_integer(std::string_view text);

std::string_view trim(std::string_view text);

}  // namespace fairboost

#endif  // FAIRBOOST_CSV_HPP_
