#ifndef FAIRBOOST_BOOSTER_HPP_
#define FAIRBOOST_BOOSTER_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "fairboost/data.hpp"
#include "fairboost/objective.hpp"
#include "fairboost/tree.hpp"

namespace fairboost {

struct BoosterParams {
  int num_rounds = 100;
  /// Shrinkage applied to every tree, both in the running training scores and
  /// at prediction time.
  double learning_rate = 0.3;
  double base_score_raw = 0.0;
  TreeParams tree;
  ObjectiveConfig objective;

  /// Throws ParameterError for out-of-range values, including mu = 1 with
  /// lambda = 0 (every hessian vanishes and leaves would have no weight).
  void validate() const;

  bool operator==(const BoosterParams&) const = default;
};

struct BoosterModel {
  std::vector<Tree> trees;
  BoosterParams params;
  std::vector<std::string> feature_names;

  Index n_features() const { return static_cast<Index>(feature_names.size()); }
  /// First `k` trees; same params and features.
  BoosterModel prefix(std::size_t k) const;
};

/// State after one boosting round, measured on the training data.
struct RoundRecord {
  int round = 0;
  double loss = 0.0;
  double accuracy = 0.0;
  /// nullopt when nobody in the majority group is predicted positive.
  std::optional<double> disparate_impact;
};

struct TrainLog {
  std::vector<RoundRecord> rounds;

  /// CSV with header round,loss,accuracy,di.
  std::string to_csv() const;
};

struct TrainResult {
  BoosterModel model;
  TrainLog log;
};

/// Second-order boosting: each round computes (grad, hess) of the configured
/// objective at the current raw scores, grows one tree on all rows, and adds
/// learning_rate times its output to the scores. Deterministic.
TrainResult train(const Dataset& data, const BoosterParams& params);

/// base_score_raw + sum_t learning_rate * f_t(x), accumulated tree by tree in
/// the same order as training. Throws ContractError on a width mismatch.
Eigen::VectorXd predict_raw(const BoosterModel& model, const Eigen::MatrixXd& rows);
Eigen::VectorXd predict_proba(const BoosterModel& model, const Eigen::MatrixXd& rows);

/// First round whose loss is above the previous round's, if any.
struct LossIncrease {
  int round = 0;
  double delta = 0.0;
};
std::optional<LossIncrease> first_loss_increase(const TrainLog& log);

/// Versioned line-oriented text format:
///
///   fairboost-model v1
///   objective=fair_logistic
///   mu=0.5
///   ... (one key=value per line)
///   num_trees=2
///   tree 0
///   node 0 split 3 2.5 1 2
///   leaf 1 1.3333333333333333
///   leaf 2 -1.3333333333333333
///   tree 1
///   ...
///   end
///
/// Reals are written as shortest round-trip decimals, so a reload predicts
/// bit-identically.
inline constexpr std::string_view kModelHeader = "fairboost-model v1";

std::string format_model(const BoosterModel& model);
/// Throws VersionError for another format version, ParseError (with byte
/// offset) for truncated or syntactically broken files, MalformedNodeError for
/// bad node records and DanglingReferenceError for missing children.
BoosterModel parse_model(std::string_view text);

void save_model(const BoosterModel& model, const std::filesystem::path& path);
BoosterModel load_model(const std::filesystem::path& path);

}  // namespace fairboost

#endif  // FAIRBOOST_BOOSTER_HPP_
