#ifndef FAIRBOOST_METRICS_HPP_
#define FAIRBOOST_METRICS_HPP_

#include <optional>
#include <string>

#include <Eigen/Core>

#include "fairboost/booster.hpp"
#include "fairboost/data.hpp"

namespace fairboost {

inline constexpr double kDefaultThreshold = 0.5;

/// 1 where proba >= threshold. Throws ParameterError unless threshold is in (0, 1).
BinaryVector binarize(const Eigen::VectorXd& probas, double threshold);

/// Fraction of exact matches. Throws ContractError for empty or unequal inputs.
double accuracy(const BinaryVector& predictions, const BinaryVector& labels);

/// Positive-prediction rates per sensitive group and their ratio
/// P(yhat = 1 | s = 0) / P(yhat = 1 | s = 1). The ratio is not folded into
/// [0, 1] and is nullopt when the majority rate is zero.
struct DisparateImpact {
  double pos_rate_minority = 0.0;
  double pos_rate_majority = 0.0;
  std::optional<double> ratio;
  Index n_minority = 0;
  Index n_majority = 0;
};

/// Throws ValidationError when either group is absent and ContractError on a
/// length mismatch.
DisparateImpact disparate_impact(const BinaryVector& predictions, const BinaryVector& sensitive);

struct FairnessReport {
  double threshold = kDefaultThreshold;
  double accuracy = 0.0;
  double pos_rate_minority = 0.0;
  double pos_rate_majority = 0.0;
  /// nullopt is the undefined marker (zero majority rate).
  std::optional<double> disparate_impact;
  Index n_minority = 0;
  Index n_majority = 0;

  /// "key=value" lines in the CSV column order.
  std::string to_key_value() const;
  /// One CSV row (no trailing newline), columns as in csv_header().
  std::string to_csv_row() const;
  static std::string csv_header();

  bool operator==(const FairnessReport&) const = default;
};

/// Printed in place of a DI value when the ratio is undefined.
inline constexpr std::string_view kUndefined = "undefined";

/// predict_proba -> binarize -> accuracy + disparate_impact. Throws
/// SchemaError when the dataset's feature names differ from the model's.
FairnessReport evaluate(const BoosterModel& model, const Dataset& data,
                        double threshold = kDefaultThreshold);

/// Assembles a report from hard predictions.
FairnessReport make_report(const BinaryVector& predictions, const BinaryVector& labels,
                           const BinaryVector& sensitive, double threshold);

}  // namespace fairboost

#endif  // FAIRBOOST_METRICS_HPP_
