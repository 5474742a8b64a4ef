#include "fairboost/metrics.hpp"

#include "fairboost/csv.hpp"
#include "fairboost/error.hpp"

namespace fairboost {

BinaryVector binarize(const Eigen::VectorXd& probas, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw ParameterError("threshold must lie in (0, 1), got " + format_real(threshold));
  }
  return (probas.array() >= threshold).cast<int>().matrix();
}

double accuracy(const BinaryVector& predictions, const BinaryVector& labels) {
  if (predictions.size() == 0) throw ContractError("accuracy of an empty prediction vector");
  if (predictions.size() != labels.size()) {
    throw ContractError("predictions and labels differ in length");
  }
  const Index hits = (predictions.array() == labels.array()).count();
  return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

DisparateImpact disparate_impact(const BinaryVector& predictions, const BinaryVector& sensitive) {
  if (predictions.size() != sensitive.size()) {
    throw ContractError("predictions and sensitive differ in length");
  }
  DisparateImpact out;
  Index pos_minority = 0;
  Index pos_majority = 0;
  for (Index i = 0; i < predictions.size(); ++i) {
    if (sensitive(i) == 1) {
      ++out.n_majority;
      pos_majority += predictions(i);
    } else {
      ++out.n_minority;
      pos_minority += predictions(i);
    }
  }
  if (out.n_minority == 0 || out.n_majority == 0) {
    throw ValidationError("disparate impact needs both sensitive groups present");
  }
  out.pos_rate_minority = static_cast<double>(pos_minority) / static_cast<double>(out.n_minority);
  out.pos_rate_majority = static_cast<double>(pos_majority) / static_cast<double>(out.n_majority);
  if (pos_majority > 0) out.ratio = out.pos_rate_minority / out.pos_rate_majority;
  return out;
}

FairnessReport make_report(const BinaryVector& predictions, const BinaryVector& labels,
                           const BinaryVector& sensitive, double threshold) {
  const DisparateImpact di = disparate_impact(predictions, sensitive);
  FairnessReport report;
  report.threshold = threshold;
  report.accuracy = accuracy(predictions, labels);
  report.pos_rate_minority = di.pos_rate_minority;
  report.pos_rate_majority = di.pos_rate_majority;
  report.disparate_impact = di.ratio;
  report.n_minority = di.n_minority;
  report.n_majority = di.n_majority;
  return report;
}

FairnessReport evaluate(const BoosterModel& model, const Dataset& data, double threshold) {
  if (data.feature_names() != model.feature_names) {
    throw SchemaError("dataset features do not match the model's features (" +
                      std::to_string(data.n_cols()) + " vs " +
                      std::to_string(model.feature_names.size()) + " columns)");
  }
  const BinaryVector predictions = binarize(predict_proba(model, data.features()), threshold);
  return make_report(predictions, data.labels(), data.sensitive(), threshold);
}

std::string FairnessReport::csv_header() {
  return "threshold,accuracy,pos_rate_minority,pos_rate_majority,di,n_minority,n_majority";
}

std::string FairnessReport::to_csv_row() const {
  return format_real(threshold) + "," + format_real(accuracy) + "," +
         format_real(pos_rate_minority) + "," + format_real(pos_rate_majority) + "," +
         (disparate_impact ? format_real(*disparate_impact) : std::string(kUndefined)) + "," +
         std::to_string(n_minority) + "," + std::to_string(n_majority);
}

std::string FairnessReport::to_key_value() const {
  return "threshold=" + format_real(threshold) + "\naccuracy=" + format_real(accuracy) +
         "\npos_rate_minority=" + format_real(pos_rate_minority) +
         "\npos_rate_majority=" + format_real(pos_rate_majority) + "\ndi=" +
         (disparate_impact ? format_real(*disparate_impact) : std::string(kUndefined)) +
         "\nn_minority=" + std::to_string(n_minority) + "\nn_majority=" +
         std::to_string(n_majority) + "\n";
}

}  // namespace fairboost
