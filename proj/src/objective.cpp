#include "fairboost/objective.hpp"

#include <algorithm>
#include <string>

#include "fairboost/csv.hpp"
#include "fairboost/error.hpp"

namespace fairboost {

std::string_view objective_name(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::kVanillaLogistic: return "vanilla_logistic";
    case ObjectiveKind::kFairLogistic: return "fair_logistic";
  }
  return "vanilla_logistic";
}

ObjectiveKind parse_objective_kind(std::string_view name) {
  if (name == "vanilla_logistic") return ObjectiveKind::kVanillaLogistic;
  if (name == "fair_logistic") return ObjectiveKind::kFairLogistic;
  throw ParameterError("unknown objective '" + std::string(name) +
                       "' (expected vanilla_logistic or fair_logistic)");
}

void ObjectiveConfig::validate() const {
  if (!(mu >= 0.0 && mu <= 1.0)) {
    throw ParameterError("mu must lie in [0, 1], got " + format_real(mu));
  }
  if (kind == ObjectiveKind::kVanillaLogistic && mu != 0.0) {
    throw ParameterError("vanilla_logistic objective requires mu = 0");
  }
}

namespace {

void check_lengths(const Eigen::VectorXd& raw_scores, const BinaryVector& labels,
                   const BinaryVector& sensitive) {
  if (labels.size() != raw_scores.size() || sensitive.size() != raw_scores.size()) {
    throw ContractError("raw scores, labels and sensitive must have equal length (" +
                        std::to_string(raw_scores.size()) + ", " + std::to_string(labels.size()) +
                        ", " + std::to_string(sensitive.size()) + ")");
  }
}

}  // namespace

GradHess grad_hess(const Eigen::VectorXd& raw_scores, const BinaryVector& labels,
                   const BinaryVector& sensitive, const ObjectiveConfig& config) {
  check_lengths(raw_scores, labels, sensitive);
  config.validate();

  const Eigen::ArrayXd p = raw_scores.unaryExpr([](double z) { return sigmoid(z); }).array();
  const Eigen::ArrayXd y = labels.cast<double>().array();

  GradHess out;
  out.grad = (p - y).matrix();
  out.hess = (p * (1.0 - p)).matrix();
  if (config.kind == ObjectiveKind::kFairLogistic) {
    const double mu = config.mu;
    const Eigen::ArrayXd s = sensitive.cast<double>().array();
    out.grad = (out.grad.array() + mu * (s - p)).matrix();
    out.hess = ((1.0 - mu) * out.hess.array()).matrix();
  }
  return out;
}

double regularized_loss(const Eigen::VectorXd& raw_scores, const BinaryVector& labels,
                        const BinaryVector& sensitive, const ObjectiveConfig& config) {
  check_lengths(raw_scores, labels, sensitive);
  config.validate();
  const double mu = config.effective_mu();
  const double log_floor = std::log(kLogClamp);

  double loss = 0.0;
  for (Index i = 0; i < raw_scores.size(); ++i) {
    const double log_p = std::max(log_sigmoid(raw_scores(i)), log_floor);
    const double log_q = std::max(log_sigmoid(-raw_scores(i)), log_floor);
    const double label_term = labels(i) == 1 ? -log_p : -log_q;
    const double sensitive_term = sensitive(i) == 1 ? log_p : log_q;
    loss += label_term + mu * sensitive_term;
  }
  return loss;
}

}  // namespace fairboost
