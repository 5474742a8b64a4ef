#ifndef FAIRBOOST_TESTS_SUPPORT_HPP_
#define FAIRBOOST_TESTS_SUPPORT_HPP_

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "fairboost/data.hpp"
#include "fairboost/objective.hpp"
#include "fairboost/tree.hpp"

namespace fbtest {

using fairboost::Index;

/// Random dataset with a few repeated values per column so ties are common.
/// Both sensitive groups are always present.
inline fairboost::Dataset random_dataset(std::mt19937_64& rng, Index n, Index d, int levels = 6) {
  std::uniform_int_distribution<int> level(0, levels - 1);
  std::normal_distribution<double> noise(0.0, 1.0);
  Eigen::MatrixXd x(n, d);
  for (Index j = 0; j < d; ++j) {
    for (Index i = 0; i < n; ++i) x(i, j) = level(rng) * 0.5 + (j % 2 == 0 ? 0.0 : noise(rng));
  }
  fairboost::BinaryVector y(n), s(n);
  std::bernoulli_distribution coin(0.5);
  for (Index i = 0; i < n; ++i) {
    s(i) = coin(rng) ? 1 : 0;
    const double score = x(i, 0) - 1.0 + 0.8 * s(i) + 0.5 * noise(rng);
    y(i) = score > 0 ? 1 : 0;
  }
  s(0) = 0;
  s(n - 1) = 1;
  std::vector<std::string> names;
  for (Index j = 0; j < d; ++j) names.push_back("f" + std::to_string(j));
  return fairboost::Dataset(std::move(x), std::move(y), std::move(s), std::move(names));
}

/// Dataset with a clear signal in feature 0 and a sensitive proxy in feature 1.
inline fairboost::Dataset synthetic_dataset(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution coin(0.6);
  Eigen::MatrixXd x(n, 4);
  fairboost::BinaryVector y(n), s(n);
  for (Index i = 0; i < n; ++i) {
    s(i) = coin(rng) ? 1 : 0;
    x(i, 0) = normal(rng);
    x(i, 1) = s(i) + 0.7 * normal(rng);
    x(i, 2) = std::round(normal(rng) * 2.0);
    x(i, 3) = normal(rng);
    const double logit = 1.5 * x(i, 0) + 0.8 * x(i, 1) + 0.3 * x(i, 2) - 0.5;
    y(i) = fairboost::sigmoid(logit) > std::uniform_real_distribution<double>(0, 1)(rng) ? 1 : 0;
  }
  s(0) = 0;
  s(1) = 1;
  return fairboost::Dataset(std::move(x), std::move(y), std::move(s), {"a", "b", "c", "d"});
}

inline fairboost::GradHess random_grad_hess(std::mt19937_64& rng, Index n) {
  std::uniform_real_distribution<double> g(-1.0, 1.0);
  std::uniform_real_distribution<double> h(0.0, 0.25);
  fairboost::GradHess gh{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (Index i = 0; i < n; ++i) {
    gh.grad(i) = g(rng);
    gh.hess(i) = h(rng);
  }
  return gh;
}

struct BruteSplit {
  bool found = false;
  Index feature = 0;
  double threshold = 0.0;
  double gain = 0.0;
};

inline double brute_score(double g, double h, double lambda) { return g * g / (h + lambda); }

/// Every (feature, threshold) pair over midpoints of distinct values, sums
/// recomputed from scratch for each candidate.
inline BruteSplit brute_force_split(const fairboost::Dataset& data, const std::vector<Index>& rows,
                                    const fairboost::GradHess& gh,
                                    const fairboost::TreeParams& params) {
  BruteSplit best;
  double g_total = 0, h_total = 0;
  for (Index r : rows) {
    g_total += gh.grad(r);
    h_total += gh.hess(r);
  }
  for (Index j = 0; j < data.n_cols(); ++j) {
    std::vector<double> values;
    for (Index r : rows) values.push_back(data.features()(r, j));
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (std::size_t k = 0; k + 1 < values.size(); ++k) {
      const double thr = values[k] + (values[k + 1] - values[k]) / 2.0;
      double gl = 0, hl = 0;
      for (Index r : rows) {
        if (data.features()(r, j) < thr) {
          gl += gh.grad(r);
          hl += gh.hess(r);
        }
      }
      const double gr = g_total - gl, hr = h_total - hl;
      if (hl < params.min_child_weight || hr < params.min_child_weight) continue;
      const double gain = 0.5 * (brute_score(gl, hl, params.lambda) +
                                 brute_score(gr, hr, params.lambda) -
                                 brute_score(g_total, h_total, params.lambda)) -
                          params.gamma;
      if (!(gain > params.min_split_gain)) continue;
      if (!best.found || gain > best.gain) best = {true, j, thr, gain};
    }
  }
  return best;
}

inline std::vector<Index> all_rows(Index n) {
  std::vector<Index> rows(static_cast<std::size_t>(n));
  std::iota(rows.begin(), rows.end(), Index{0});
  return rows;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("fairboost_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fbtest

#endif  // FAIRBOOST_TESTS_SUPPORT_HPP_
