#include "fairboost/data.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <unordered_map>

#include "fairboost/csv.hpp"
#include "fairboost/error.hpp"

namespace fairboost {

Dataset::Dataset(Eigen::MatrixXd features, BinaryVector labels, BinaryVector sensitive,
                 std::vector<std::string> feature_names)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      sensitive_(std::move(sensitive)),
      feature_names_(std::move(feature_names)) {
  const Index n = features_.rows();
  if (labels_.size() != n || sensitive_.size() != n) {
    throw ValidationError("labels and sensitive must have one entry per row (" +
                          std::to_string(n) + " rows)");
  }
  if (static_cast<Index>(feature_names_.size()) != features_.cols()) {
    throw ValidationError("expected " + std::to_string(features_.cols()) +
                          " feature names, got " + std::to_string(feature_names_.size()));
  }
  std::set<std::string_view> seen;
  for (const auto& name : feature_names_) {
    if (!seen.insert(name).second) throw ValidationError("duplicate feature name '" + name + "'");
  }
  for (Index j = 0; j < features_.cols(); ++j) {
    for (Index i = 0; i < n; ++i) {
      if (!std::isfinite(features_(i, j))) {
        throw ValidationError("non-finite value in row " + std::to_string(i) + ", feature '" +
                              feature_names_[j] + "'");
      }
    }
  }
  auto is_binary = [](const BinaryVector& v) {
    return ((v.array() == 0) || (v.array() == 1)).all();
  };
  if (!is_binary(labels_)) throw ValidationError("labels must be 0 or 1");
  if (!is_binary(sensitive_)) throw ValidationError("sensitive values must be 0 or 1");
  const Index majority = sensitive_.sum();
  if (majority == 0 || majority == n) {
    throw ValidationError("sensitive attribute must contain both groups (0 and 1)");
  }
}

Dataset Dataset::subset(std::span<const Index> rows) const {
  Eigen::MatrixXd x(static_cast<Index>(rows.size()), n_cols());
  BinaryVector y(static_cast<Index>(rows.size()));
  BinaryVector s(static_cast<Index>(rows.size()));
  for (Index k = 0; k < static_cast<Index>(rows.size()); ++k) {
    const Index r = rows[k];
    if (r < 0 || r >= n_rows()) throw ContractError("row index out of range in subset");
    x.row(k) = features_.row(r);
    y(k) = labels_(r);
    s(k) = sensitive_(r);
  }
  return Dataset(std::move(x), std::move(y), std::move(s), feature_names_);
}

// ---------------------------------------------------------------------------
// Schema text

namespace {

constexpr std::string_view kEscaped = " \t|=%#";

std::string escape_value(std::string_view value) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : value) {
    if (kEscaped.find(static_cast<char>(c)) != std::string_view::npos || c < 0x20) {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xF]);
    } else {
      out.push_back(static_cast<char>(c));
    }
  }
  return out;
}

std::string unescape_value(std::string_view value, std::size_t line) {
  std::string out;
  for (std::size_t i = 0; i < value.size(); ++i) {
    if (value[i] != '%') {
      out.push_back(value[i]);
      continue;
    }
    if (i + 2 >= value.size()) {
      throw SchemaError("schema line " + std::to_string(line) + ": truncated %-escape");
    }
    const auto hex = value.substr(i + 1, 2);
    unsigned code = 0;
    for (char h : hex) {
      code <<= 4;
      if (h >= '0' && h <= '9') {
        code |= static_cast<unsigned>(h - '0');
      } else if (h >= 'A' && h <= 'F') {
        code |= static_cast<unsigned>(h - 'A' + 10);
      } else if (h >= 'a' && h <= 'f') {
        code |= static_cast<unsigned>(h - 'a' + 10);
      } else {
        throw SchemaError("schema line " + std::to_string(line) + ": bad %-escape");
      }
    }
    out.push_back(static_cast<char>(code));
    i += 2;
  }
  return out;
}

std::vector<std::string_view> split_whitespace(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::string_view role_name(ColumnRole role) {
  switch (role) {
    case ColumnRole::kFeature: return "feature";
    case ColumnRole::kTarget: return "target";
    case ColumnRole::kSensitive: return "sensitive";
    case ColumnRole::kDrop: return "drop";
  }
  return "feature";
}

}  // namespace

void ColumnSchema::validate() const {
  int targets = 0;
  int sensitives = 0;
  std::set<std::string_view> names;
  for (const auto& col : columns) {
    if (col.name.empty()) throw SchemaError("schema column with an empty name");
    if (!names.insert(col.name).second) {
      throw SchemaError("column '" + col.name + "' is declared twice");
    }
    if (col.role == ColumnRole::kTarget) ++targets;
    if (col.role == ColumnRole::kSensitive) ++sensitives;
    if (col.as_feature && col.role != ColumnRole::kSensitive) {
      throw SchemaError("column '" + col.name + "': feature=yes applies to the sensitive column only");
    }
    if (col.zero_value && *col.zero_value == col.one_value) {
      throw SchemaError("column '" + col.name + "' maps the same value to 0 and 1");
    }
    std::set<std::string_view> cats;
    for (const auto& c : col.categories) {
      if (!cats.insert(c).second) {
        throw SchemaError("column '" + col.name + "' lists category '" + c + "' twice");
      }
    }
  }
  if (targets != 1) throw SchemaError("schema needs exactly one target column");
  if (sensitives != 1) throw SchemaError("schema needs exactly one sensitive column");
}

const ColumnSpec* ColumnSchema::find(std::string_view name) const {
  for (const auto& col : columns) {
    if (col.name == name) return &col;
  }
  return nullptr;
}

ColumnSchema parse_schema(std::string_view text) {
  ColumnSchema schema;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;

    ColumnSpec spec;
    bool has_name = false;
    bool has_role = false;
    std::optional<std::string> one;
    for (auto token : split_whitespace(line)) {
      const auto eq = token.find('=');
      if (eq == std::string_view::npos) {
        throw SchemaError("schema line " + std::to_string(line_no) + ": expected key=value, got '" +
                          std::string(token) + "'");
      }
      const auto key = token.substr(0, eq);
      const auto value = unescape_value(token.substr(eq + 1), line_no);
      if (key == "column") {
        spec.name = value;
        has_name = true;
      } else if (key == "role") {
        if (value == "feature") {
          spec.role = ColumnRole::kFeature;
        } else if (value == "target") {
          spec.role = ColumnRole::kTarget;
        } else if (value == "sensitive") {
          spec.role = ColumnRole::kSensitive;
        } else if (value == "drop") {
          spec.role = ColumnRole::kDrop;
        } else {
          throw SchemaError("schema line " + std::to_string(line_no) + ": unknown role '" +
                            value + "'");
        }
        has_role = true;
      } else if (key == "kind") {
        if (value == "numeric") {
          spec.kind = ColumnKind::kNumeric;
        } else if (value == "categorical") {
          spec.kind = ColumnKind::kCategorical;
        } else {
          throw SchemaError("schema line " + std::to_string(line_no) + ": unknown kind '" +
                            value + "'");
        }
      } else if (key == "positive" || key == "majority") {
        one = value;
      } else if (key == "negative" || key == "minority") {
        spec.zero_value = value;
      } else if (key == "feature") {
        if (value != "yes" && value != "no") {
          throw SchemaError("schema line " + std::to_string(line_no) + ": feature must be yes or no");
        }
        spec.as_feature = value == "yes";
      } else if (key == "categories") {
        // Split on the raw token so escaped '|' stays inside a category.
        const auto raw = token.substr(eq + 1);
        std::size_t start = 0;
        while (start <= raw.size()) {
          auto bar = raw.find('|', start);
          if (bar == std::string_view::npos) bar = raw.size();
          spec.categories.push_back(unescape_value(raw.substr(start, bar - start), line_no));
          start = bar + 1;
        }
      } else {
        throw SchemaError("schema line " + std::to_string(line_no) + ": unknown key '" +
                          std::string(key) + "'");
      }
    }
    if (!has_name || !has_role) {
      throw SchemaError("schema line " + std::to_string(line_no) + ": 'column' and 'role' are required");
    }
    if (one) spec.one_value = *one;
    schema.columns.push_back(std::move(spec));
  }
  schema.validate();
  return schema;
}

ColumnSchema read_schema(const std::filesystem::path& path) {
  return parse_schema(read_text_file(path));
}

std::string format_schema(const ColumnSchema& schema) {
  std::string out = "# fairboost column schema\n";
  for (const auto& col : schema.columns) {
    out += "column=" + escape_value(col.name) + " role=" + std::string(role_name(col.role));
    if (col.role == ColumnRole::kFeature) {
      out += col.kind == ColumnKind::kNumeric ? " kind=numeric" : " kind=categorical";
      if (!col.categories.empty()) {
        out += " categories=";
        for (std::size_t i = 0; i < col.categories.size(); ++i) {
          if (i > 0) out.push_back('|');
          out += escape_value(col.categories[i]);
        }
      }
    } else if (col.role == ColumnRole::kTarget) {
      out += " positive=" + escape_value(col.one_value);
      if (col.zero_value) out += " negative=" + escape_value(*col.zero_value);
    } else if (col.role == ColumnRole::kSensitive) {
      out += " majority=" + escape_value(col.one_value);
      if (col.zero_value) out += " minority=" + escape_value(*col.zero_value);
      if (col.as_feature) out += " feature=yes";
    }
    out.push_back('\n');
  }
  return out;
}

void write_schema(const ColumnSchema& schema, const std::filesystem::path& path) {
  write_text_file_atomic(path, format_schema(schema));
}

// ---------------------------------------------------------------------------
// Loading

namespace {

std::string cell_location(std::size_t row, const std::string& column) {
  // Data rows are 1-based; the header is line 1 so row r sits on line r + 1.
  return "row " + std::to_string(row + 1) + " (line " + std::to_string(row + 2) + "), column '" +
         column + "'";
}

int map_binary(const ColumnSpec& spec, const std::string& raw, std::size_t row) {
  const auto value = trim(raw);
  if (value == spec.one_value) return 1;
  if (spec.zero_value && value != *spec.zero_value) {
    throw DataError("unexpected value '" + std::string(value) + "' at " +
                    cell_location(row, spec.name) + "; expected '" + spec.one_value + "' or '" +
                    *spec.zero_value + "'");
  }
  return 0;
}

}  // namespace

Dataset load_table(const CsvTable& table, const ColumnSchema& schema, ColumnSchema* fitted) {
  schema.validate();
  for (const auto& name : table.header) {
    if (!schema.find(name)) {
      throw SchemaError("CSV column '" + name + "' is not declared in the schema");
    }
  }
  std::vector<std::size_t> positions;
  for (const auto& col : schema.columns) {
    auto pos = table.column(col.name);
    if (!pos) throw SchemaError("schema column '" + col.name + "' is missing from the CSV header");
    positions.push_back(*pos);
  }

  ColumnSchema out_schema = schema;
  const std::size_t n = table.rows.size();

  // Fit categories that were not listed.
  for (std::size_t c = 0; c < out_schema.columns.size(); ++c) {
    auto& col = out_schema.columns[c];
    if (col.role != ColumnRole::kFeature || col.kind != ColumnKind::kCategorical) continue;
    if (!col.categories.empty()) continue;
    std::set<std::string> values;
    for (const auto& row : table.rows) values.insert(std::string(trim(row[positions[c]])));
    col.categories.assign(values.begin(), values.end());
  }

  std::vector<std::string> names;
  for (const auto& col : out_schema.columns) {
    if (col.role == ColumnRole::kSensitive && col.as_feature) names.push_back(col.name);
    if (col.role != ColumnRole::kFeature) continue;
    if (col.kind == ColumnKind::kNumeric) {
      names.push_back(col.name);
    } else {
      for (const auto& cat : col.categories) names.push_back(col.name + "=" + cat);
    }
  }

  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(static_cast<Index>(n), static_cast<Index>(names.size()));
  BinaryVector y(static_cast<Index>(n));
  BinaryVector s(static_cast<Index>(n));

  Index out_col = 0;
  for (std::size_t c = 0; c < out_schema.columns.size(); ++c) {
    const auto& col = out_schema.columns[c];
    const auto src = positions[c];
    switch (col.role) {
      case ColumnRole::kDrop:
        break;
      case ColumnRole::kTarget:
        for (std::size_t r = 0; r < n; ++r) y(static_cast<Index>(r)) = map_binary(col, table.rows[r][src], r);
        break;
      case ColumnRole::kSensitive:
        for (std::size_t r = 0; r < n; ++r) s(static_cast<Index>(r)) = map_binary(col, table.rows[r][src], r);
        if (col.as_feature) x.col(out_col++) = s.cast<double>();
        break;
      case ColumnRole::kFeature:
        if (col.kind == ColumnKind::kNumeric) {
          for (std::size_t r = 0; r < n; ++r) {
            const auto cell = trim(table.rows[r][src]);
            const auto value = parse_real(cell);
            if (!value) {
              throw DataError("unparseable number '" + std::string(cell) + "' at " +
                              cell_location(r, col.name));
            }
            if (!std::isfinite(*value)) {
              throw DataError("non-finite value '" + std::string(cell) + "' at " +
                              cell_location(r, col.name) + "; missing values must be imputed first");
            }
            x(static_cast<Index>(r), out_col) = *value;
          }
          ++out_col;
        } else {
          std::unordered_map<std::string_view, Index> lookup;
          for (std::size_t k = 0; k < col.categories.size(); ++k) {
            lookup.emplace(col.categories[k], static_cast<Index>(k));
          }
          for (std::size_t r = 0; r < n; ++r) {
            const auto cell = trim(table.rows[r][src]);
            auto it = lookup.find(cell);
            if (it == lookup.end()) {
              throw DataError("unknown category '" + std::string(cell) + "' at " +
                              cell_location(r, col.name));
            }
            x(static_cast<Index>(r), out_col + it->second) = 1.0;
          }
          out_col += static_cast<Index>(col.categories.size());
        }
        break;
    }
  }

  Dataset data(std::move(x), std::move(y), std::move(s), std::move(names));
  if (fitted) *fitted = std::move(out_schema);
  return data;
}

Dataset load_csv_text(std::string_view text, const ColumnSchema& schema, ColumnSchema* fitted) {
  return load_table(parse_csv(text), schema, fitted);
}

Dataset load_csv(const std::filesystem::path& path, const ColumnSchema& schema,
                 ColumnSchema* fitted) {
  return load_table(read_csv(path), schema, fitted);
}

std::string format_csv(const Dataset& data) {
  std::vector<std::string> cells = data.feature_names();
  cells.emplace_back(kEncodedTargetColumn);
  cells.emplace_back(kEncodedSensitiveColumn);
  std::string out = format_csv_row(cells);
  for (Index i = 0; i < data.n_rows(); ++i) {
    cells.clear();
    for (Index j = 0; j < data.n_cols(); ++j) cells.push_back(format_real(data.features()(i, j)));
    cells.push_back(std::to_string(data.labels()(i)));
    cells.push_back(std::to_string(data.sensitive()(i)));
    out += format_csv_row(cells);
  }
  return out;
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
  write_text_file_atomic(path, format_csv(data));
}

ColumnSchema encoded_schema(const Dataset& data) {
  ColumnSchema schema;
  for (const auto& name : data.feature_names()) {
    if (name == kEncodedTargetColumn || name == kEncodedSensitiveColumn) {
      throw SchemaError("feature name '" + name + "' collides with a reserved encoded column");
    }
    schema.columns.push_back({name, ColumnRole::kFeature, ColumnKind::kNumeric, "1", {}, {}});
  }
  schema.columns.push_back({std::string(kEncodedTargetColumn), ColumnRole::kTarget,
                            ColumnKind::kNumeric, "1", "0", {}});
  schema.columns.push_back({std::string(kEncodedSensitiveColumn), ColumnRole::kSensitive,
                            ColumnKind::kNumeric, "1", "0", {}});
  return schema;
}

// ---------------------------------------------------------------------------
// Splitting

namespace {

// Uniform draw in [0, bound) by rejection; unlike std::uniform_int_distribution
// the sequence is identical across standard library implementations.
std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t value = 0;
  do {
    value = rng();
  } while (value >= limit);
  return value % bound;
}

}  // namespace

std::pair<std::vector<Index>, std::vector<Index>> split_indices(Index n_rows, double test_fraction,
                                                                std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ParameterError("test fraction must lie in the open interval (0, 1)");
  }
  auto n_test = static_cast<Index>(std::floor(static_cast<double>(n_rows) * test_fraction));
  n_test = std::max<Index>(n_test, 1);
  if (n_test >= n_rows) {
    throw ParameterError("split of " + std::to_string(n_rows) + " rows with test fraction " +
                         format_real(test_fraction) + " leaves an empty training part");
  }
  std::vector<Index> order(static_cast<std::size_t>(n_rows));
  for (Index i = 0; i < n_rows; ++i) order[static_cast<std::size_t>(i)] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(bounded_draw(rng, i + 1));
    std::swap(order[i], order[j]);
  }
  std::vector<Index> test(order.begin(), order.begin() + n_test);
  std::vector<Index> train(order.begin() + n_test, order.end());
  std::sort(test.begin(), test.end());
  std::sort(train.begin(), train.end());
  return {std::move(train), std::move(test)};
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& data, double test_fraction,
                                             std::uint64_t seed) {
  auto [train, test] = split_indices(data.n_rows(), test_fraction, seed);
  return {data.subset(train), data.subset(test)};
}

}  // namespace fairboost
