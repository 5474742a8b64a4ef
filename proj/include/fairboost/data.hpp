#ifndef FAIRBOOST_DATA_HPP_
#define FAIRBOOST_DATA_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace fairboost {

using Index = Eigen::Index;

struct CsvTable;

/// 0/1 vector used for labels, sensitive membership and hard predictions.
using BinaryVector = Eigen::VectorXi;

/// Dense tabular data with a binary target and a binary sensitive attribute.
///
/// Features are stored column-major so that split finding walks one column at
/// a time. Sensitive value 1 marks the majority (privileged) group and 0 the
/// minority group. Instances are immutable once constructed.
class Dataset {
 public:
  /// Throws ValidationError when any invariant is broken: length mismatch,
  /// non-finite feature, a label or sensitive value outside {0, 1}, a single
  /// sensitive group, or duplicate feature names.
  Dataset(Eigen::MatrixXd features, BinaryVector labels, BinaryVector sensitive,
          std::vector<std::string> feature_names);

  const Eigen::MatrixXd& features() const { return features_; }
  const BinaryVector& labels() const { return labels_; }
  const BinaryVector& sensitive() const { return sensitive_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }

  Index n_rows() const { return features_.rows(); }
  Index n_cols() const { return features_.cols(); }

  /// Rows taken in the given order. The result is validated like any dataset,
  /// so a subset that lost one sensitive group throws ValidationError.
  Dataset subset(std::span<const Index> rows) const;

 private:
  Eigen::MatrixXd features_;
  BinaryVector labels_;
  BinaryVector sensitive_;
  std::vector<std::string> feature_names_;
};

enum class ColumnRole { kFeature, kTarget, kSensitive, kDrop };
enum class ColumnKind { kNumeric, kCategorical };

/// How one CSV column is interpreted.
///
/// For the target, `one_value` is the raw value mapped to label 1 (the
/// favourable outcome); for the sensitive column it is the majority group.
/// When `zero_value` is set, any other raw value is rejected; otherwise every
/// value different from `one_value` maps to 0.
struct ColumnSpec {
  std::string name;
  ColumnRole role = ColumnRole::kFeature;
  ColumnKind kind = ColumnKind::kNumeric;
  std::string one_value = "1";
  std::optional<std::string> zero_value;
  /// Category -> one-hot column index, in listed order. Empty means "fit on load".
  std::vector<std::string> categories;
  /// Sensitive column only: also expose the 0/1 group indicator as a numeric
  /// feature named after the column.
  bool as_feature = false;

  bool operator==(const ColumnSpec&) const = default;
};

struct ColumnSchema {
  std::vector<ColumnSpec> columns;

  /// Throws SchemaError unless there is exactly one target and one sensitive
  /// column, names are unique, and fitted categories are unique.
  void validate() const;
  const ColumnSpec* find(std::string_view name) const;

  bool operator==(const ColumnSchema&) const = default;
};

/// Line-oriented schema text:
///
///   # comment
///   column=age role=feature kind=numeric
///   column=workclass role=feature kind=categorical categories=Private|State-gov
///   column=income role=target positive=>50K negative=<=50K
///   column=sex role=sensitive majority=Male minority=Female feature=yes
///   column=fnlwgt role=drop
///
/// Values escape space, tab, '|', '=', '%' and '#' as %XX.
ColumnSchema parse_schema(std::string_view text);
ColumnSchema read_schema(const std::filesystem::path& path);
std::string format_schema(const ColumnSchema& schema);
void write_schema(const ColumnSchema& schema, const std::filesystem::path& path);

/// Loads a CSV through `schema`. Categorical features are one-hot encoded into
/// columns named "<column>=<category>"; categories missing from the schema are
/// fitted (sorted) and reported through `fitted` when it is non-null. Feature
/// column order follows the schema.
///
/// Throws SchemaError for missing or undeclared columns, DataError naming the
/// row and column for unparseable, non-finite or unexpected cells, and
/// ValidationError when only one sensitive group is present.
Dataset load_csv(const std::filesystem::path& path, const ColumnSchema& schema,
                 ColumnSchema* fitted = nullptr);
Dataset load_csv_text(std::string_view text, const ColumnSchema& schema,
                      ColumnSchema* fitted = nullptr);
Dataset load_table(const CsvTable& table, const ColumnSchema& schema,
                   ColumnSchema* fitted = nullptr);

/// Column names used by write_csv for the label and sensitive columns.
inline constexpr std::string_view kEncodedTargetColumn = "target";
inline constexpr std::string_view kEncodedSensitiveColumn = "sensitive";

/// Writes the encoded matrix (features, then target, then sensitive) with
/// round-trip precision. Reloading with encoded_schema() reproduces the
/// dataset bit for bit.
std::string format_csv(const Dataset& data);
void write_csv(const Dataset& data, const std::filesystem::path& path);
ColumnSchema encoded_schema(const Dataset& data);

/// Deterministic row-disjoint split. The test part has floor(n * fraction)
/// rows, raised to 1 when that is zero; both parts must be non-empty.
/// Throws ParameterError for a fraction outside (0, 1) or an empty train part.
std::pair<Dataset, Dataset> train_test_split(const Dataset& data, double test_fraction,
                                             std::uint64_t seed);

/// Row indices (train, test) behind train_test_split, each sorted ascending.
std::pair<std::vector<Index>, std::vector<Index>> split_indices(Index n_rows,
                                                                double test_fraction,
                                                                std::uint64_t seed);

}  // namespace fairboost

#endif  // FAIRBOOST_DATA_HPP_
