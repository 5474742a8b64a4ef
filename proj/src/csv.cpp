#include "fairboost/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "fairboost/error.hpp"

namespace fairboost {

std::optional<std::size_t> CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return std::nullopt;
}

std::string_view trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r");
  return text.substr(first, last - first + 1);
}

namespace {

// Splits `text` into records of raw cells. Line numbers are 1-based and refer
// to the line where each record starts.
struct Record {
  std::vector<std::string> cells;
  std::size_t line = 0;
};

std::vector<Record> tokenize(std::string_view text, const CsvOptions& options) {
  std::vector<Record> records;
  Record current;
  std::string cell;
  bool in_quotes = false;
  bool cell_was_quoted = false;
  std::size_t line = 1;
  current.line = 1;

  auto finish_cell = [&] {
    if (options.trim && !cell_was_quoted) {
      cell = std::string(trim(cell));
    }
    current.cells.push_back(std::move(cell));
    cell.clear();
    cell_was_quoted = false;
  };
  auto finish_record = [&] {
    finish_cell();
    const bool blank = current.cells.size() == 1 && trim(current.cells[0]).empty();
    if (!(blank && options.skip_blank_lines)) records.push_back(std::move(current));
    current = Record{};
    current.line = line;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        cell.push_back(c);
      }
      continue;
    }
    if (c == '"' && trim(cell).empty()) {
      cell.clear();
      in_quotes = true;
      cell_was_quoted = true;
    } else if (c == options.delimiter) {
      finish_cell();
    } else if (c == '\n') {
      ++line;
      if (!cell.empty() && cell.back() == '\r') cell.pop_back();
      finish_record();
    } else {
      cell.push_back(c);
    }
  }
  if (in_quotes) {
    throw DataError("unterminated quoted cell starting on line " + std::to_string(current.line));
  }
  if (!cell.empty() || !current.cells.empty()) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    finish_record();
  }
  return records;
}

}  // namespace

CsvTable parse_csv(std::string_view text, const CsvOptions& options) {
  // UTF-8 byte order mark.
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  auto records = tokenize(text, options);
  CsvTable table;
  std::size_t first = 0;
  if (options.has_header) {
    if (records.empty()) throw DataError("CSV input is empty; a header row is required");
    table.header = std::move(records[0].cells);
    first = 1;
  } else if (!records.empty()) {
    for (std::size_t i = 0; i < records[0].cells.size(); ++i) {
      table.header.push_back("c" + std::to_string(i));
    }
  }
  table.rows.reserve(records.size() - first);
  for (std::size_t r = first; r < records.size(); ++r) {
    if (records[r].cells.size() != table.header.size()) {
      throw DataError("line " + std::to_string(records[r].line) + " has " +
                      std::to_string(records[r].cells.size()) + " cells, expected " +
                      std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(records[r].cells));
  }
  return table;
}

CsvTable read_csv(const std::filesystem::path& path, const CsvOptions& options) {
  return parse_csv(read_text_file(path), options);
}

std::string quote_csv_cell(std::string_view cell, char delimiter) {
  const bool needs_quotes = cell.find(delimiter) != std::string_view::npos ||
                            cell.find_first_of("\"\n\r") != std::string_view::npos ||
                            (!cell.empty() && (cell.front() == ' ' || cell.back() == ' '));
  if (!needs_quotes) return std::string(cell);
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string format_csv_row(const std::vector<std::string>& cells, char delimiter) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) out.push_back(delimiter);
    out += quote_csv_cell(cells[i], delimiter);
  }
  out.push_back('\n');
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return std::move(buffer).str();
}

void write_text_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw IoError("failed writing '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move output into place at '" + path.string() + "'");
  }
}

std::string format_real(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

std::optional<double> parse_real(std::string_view text) {
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
  if (result.ec != std::errc() || result.ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

std::optional<long long> parse_integer(std::string_view text) {
  if (text.empty()) return std::nullopt;
  long long value = 0;
  const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
  if (result.ec != std::errc() || result.ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

}  // namespace fairboost
