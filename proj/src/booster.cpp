#include "fairboost/booster.hpp"

#include <cmath>

#include "fairboost/csv.hpp"
#include "fairboost/error.hpp"
#include "fairboost/metrics.hpp"

namespace fairboost {

void BoosterParams::validate() const {
  if (num_rounds < 1) throw ParameterError("num_rounds must be >= 1");
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
    throw ParameterError("learning_rate must lie in (0, 1], got " + format_real(learning_rate));
  }
  if (!std::isfinite(base_score_raw)) throw ParameterError("base_score_raw must be finite");
  tree.validate();
  objective.validate();
  if (objective.effective_mu() == 1.0 && tree.lambda == 0.0) {
    throw ParameterError("mu = 1 makes every hessian zero; lambda must be > 0 so leaf weights "
                         "stay finite");
  }
}

BoosterModel BoosterModel::prefix(std::size_t k) const {
  BoosterModel out = *this;
  if (k < out.trees.size()) out.trees.erase(out.trees.begin() + static_cast<std::ptrdiff_t>(k), out.trees.end());
  return out;
}

std::string TrainLog::to_csv() const {
  std::string out = "round,loss,accuracy,di\n";
  for (const auto& r : rounds) {
    out += std::to_string(r.round) + "," + format_real(r.loss) + "," + format_real(r.accuracy) +
           "," + (r.disparate_impact ? format_real(*r.disparate_impact) : std::string("undefined")) +
           "\n";
  }
  return out;
}

TrainResult train(const Dataset& data, const BoosterParams& params) {
  params.validate();
  TrainResult result;
  result.model.params = params;
  result.model.feature_names = data.feature_names();

  const SortedColumns columns(data.features());
  const Eigen::MatrixXd& x = data.features();
  Eigen::VectorXd scores = Eigen::VectorXd::Constant(data.n_rows(), params.base_score_raw);

  for (int round = 1; round <= params.num_rounds; ++round) {
    const GradHess gh = grad_hess(scores, data.labels(), data.sensitive(), params.objective);
    Tree tree = build_tree(data, columns, gh, params.tree);
    for (Index i = 0; i < data.n_rows(); ++i) {
      scores(i) += params.learning_rate * predict_tree(tree, x.row(i));
    }
    result.model.trees.push_back(std::move(tree));

    const BinaryVector predicted = binarize(scores.unaryExpr([](double z) { return sigmoid(z); }),
                                            kDefaultThreshold);
    RoundRecord record;
    record.round = round;
    record.loss = regularized_loss(scores, data.labels(), data.sensitive(), params.objective);
    record.accuracy = accuracy(predicted, data.labels());
    record.disparate_impact = disparate_impact(predicted, data.sensitive()).ratio;
    result.log.rounds.push_back(record);
  }
  return result;
}

Eigen::VectorXd predict_raw(const BoosterModel& model, const Eigen::MatrixXd& rows) {
  if (rows.cols() != model.n_features()) {
    throw ContractError("rows have " + std::to_string(rows.cols()) + " columns but the model expects " +
                        std::to_string(model.n_features()));
  }
  const double eta = model.params.learning_rate;
  Eigen::VectorXd out(rows.rows());
  for (Index i = 0; i < rows.rows(); ++i) {
    double score = model.params.base_score_raw;
    for (const Tree& tree : model.trees) score += eta * predict_tree(tree, rows.row(i));
    out(i) = score;
  }
  return out;
}

Eigen::VectorXd predict_proba(const BoosterModel& model, const Eigen::MatrixXd& rows) {
  return predict_raw(model, rows).unaryExpr([](double z) { return sigmoid(z); });
}

std::optional<LossIncrease> first_loss_increase(const TrainLog& log) {
  for (std::size_t k = 1; k < log.rounds.size(); ++k) {
    const double delta = log.rounds[k].loss - log.rounds[k - 1].loss;
    if (delta > 0.0) return LossIncrease{log.rounds[k].round, delta};
  }
  return std::nullopt;
}

}  // namespace fairboost
