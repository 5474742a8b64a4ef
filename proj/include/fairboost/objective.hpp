#ifndef FAIRBOOST_OBJECTIVE_HPP_
#define FAIRBOOST_OBJECTIVE_HPP_

#include <cmath>
#include <string_view>

#include <Eigen/Core>

#include "fairboost/data.hpp"

namespace fairboost {

/// Logistic function, stable for large |z|: never evaluates exp of a positive
/// argument, so it cannot overflow.
template <typename Scalar>
Scalar sigmoid(Scalar z) {
  if (z >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-z));
  const Scalar e = std::exp(z);
  return e / (Scalar(1) + e);
}

/// log(sigmoid(z)) without cancellation; log(1 - sigmoid(z)) is log_sigmoid(-z).
template <typename Scalar>
Scalar log_sigmoid(Scalar z) {
  if (z >= Scalar(0)) return -std::log1p(std::exp(-z));
  return z - std::log1p(std::exp(z));
}

enum class ObjectiveKind {
  kVanillaLogistic,
  /// Logistic loss plus mu times the negative cross-entropy between the score
  /// and the sensitive attribute.
  kFairLogistic,
};

std::string_view objective_name(ObjectiveKind kind);
/// Throws ParameterError for an unknown name.
ObjectiveKind parse_objective_kind(std::string_view name);

/// Regularizer strength and loss selection. mu lives in [0, 1]: above 1 the
/// hessian turns negative and the per-leaf quadratic has no minimum.
struct ObjectiveConfig {
  ObjectiveKind kind = ObjectiveKind::kVanillaLogistic;
  double mu = 0.0;

  static ObjectiveConfig vanilla() { return {ObjectiveKind::kVanillaLogistic, 0.0}; }
  static ObjectiveConfig fair(double mu) { return {ObjectiveKind::kFairLogistic, mu}; }

  /// Throws ParameterError when mu is outside [0, 1] or a vanilla config has
  /// mu != 0.
  void validate() const;

  /// The regularizer weight actually applied (0 for vanilla).
  double effective_mu() const { return kind == ObjectiveKind::kFairLogistic ? mu : 0.0; }

  bool operator==(const ObjectiveConfig&) const = default;
};

/// Per-instance first and second derivatives with respect to the raw score.
struct GradHess {
  Eigen::VectorXd grad;
  Eigen::VectorXd hess;
};

/// Vanilla logistic derivatives: g = sigmoid(yhat) - y, h = p (1 - p).
/// With the fair objective they become
///   grad = g + mu (s - sigmoid(yhat)),  hess = (1 - mu) h,
/// evaluated in exactly that form, so mu = 0 reproduces vanilla bit for bit.
/// Throws ContractError on a length mismatch.
GradHess grad_hess(const Eigen::VectorXd& raw_scores, const BinaryVector& labels,
                   const BinaryVector& sensitive, const ObjectiveConfig& config);

/// Lower clamp applied to the arguments of the logarithms in the loss.
inline constexpr double kLogClamp = 1e-15;

/// sum_i [-y log p - (1-y) log(1-p)] + mu sum_i [s log p + (1-s) log(1-p)],
/// p = sigmoid(yhat), with log arguments clamped below at kLogClamp. The tree
/// complexity term is not included.
double regularized_loss(const Eigen::VectorXd& raw_scores, const BinaryVector& labels,
                        const BinaryVector& sensitive, const ObjectiveConfig& config);

}  // namespace fairboost

#endif  // FAIRBOOST_OBJECTIVE_HPP_
