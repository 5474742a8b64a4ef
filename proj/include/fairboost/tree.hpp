#ifndef FAIRBOOST_TREE_HPP_
#define FAIRBOOST_TREE_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fairboost/data.hpp"
#include "fairboost/error.hpp"
#include "fairboost/objective.hpp"

namespace fairboost {

/// Parameters of the tree complexity penalty gamma * T + lambda/2 * sum w_j^2
/// and of the split acceptance rules.
struct TreeParams {
  /// 0 builds a single leaf.
  int max_depth = 6;
  double lambda = 1.0;
  double gamma = 0.0;
  /// Minimum hessian sum in each child. Keeps children non-empty when mu -> 1
  /// shrinks every hessian toward zero.
  double min_child_weight = 1e-3;
  double min_split_gain = 0.0;

  /// Throws ParameterError for negative values.
  void validate() const;

  bool operator==(const TreeParams&) const = default;
};

/// Gradient and hessian totals over a set of instances.
struct GradStats {
  double grad = 0.0;
  double hess = 0.0;

  bool operator==(const GradStats&) const = default;
};

/// Minimizer of G w + (H + lambda) w^2 / 2, i.e. -G / (H + lambda).
template <typename Scalar>
Scalar leaf_weight(Scalar grad_sum, Scalar hess_sum, Scalar lambda) {
  const Scalar denom = hess_sum + lambda;
  if (!(denom > Scalar(0))) {
    throw DegenerateLeafError("leaf with hess_sum + lambda <= 0 has no finite weight; "
                              "use lambda > 0 when mu = 1");
  }
  return -grad_sum / denom;
}

/// Per-leaf objective reduction from splitting `parent` into `left` and
/// `right`, net of the extra leaf penalty:
///   1/2 [G_L^2/(H_L+l) + G_R^2/(H_R+l) - G^2/(H+l)] - gamma.
/// May be negative. Throws ContractError when the child sums disagree with the
/// parent by more than 1e-6 (scaled by 1 + |G_L| + |G_R|, resp. the hessians)
/// or when any H + lambda is not positive.
template <typename Scalar>
Scalar split_gain(GradStats parent, GradStats left, GradStats right, Scalar lambda, Scalar gamma) {
  const Scalar grad_tol = Scalar(1e-6) * (1 + std::abs(left.grad) + std::abs(right.grad));
  const Scalar hess_tol = Scalar(1e-6) * (1 + std::abs(left.hess) + std::abs(right.hess));
  if (std::abs(left.grad + right.grad - parent.grad) > grad_tol ||
      std::abs(left.hess + right.hess - parent.hess) > hess_tol) {
    throw ContractError("child gradient/hessian sums do not add up to the parent");
  }
  if (!(parent.hess + lambda > 0) || !(left.hess + lambda > 0) || !(right.hess + lambda > 0)) {
    throw ContractError("split gain needs hess_sum + lambda > 0 for every node");
  }
  auto score = [lambda](const GradStats& s) { return s.grad * s.grad / (s.hess + lambda); };
  return Scalar(0.5) * (score(left) + score(right) - score(parent)) - gamma;
}

struct SplitCandidate {
  Index feature = 0;
  double threshold = 0.0;
  double gain = 0.0;
  GradStats left;
  GradStats right;
};

/// One node. Internal nodes route a row left iff row[feature] < threshold;
/// leaves carry `weight`. Children are node ids within the same tree.
struct TreeNode {
  Index feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double weight = 0.0;

  bool is_leaf() const { return left < 0; }
  static TreeNode make_leaf(double w) { return TreeNode{-1, 0.0, -1, -1, w}; }
  static TreeNode make_split(Index feature, double threshold, std::int32_t left, std::int32_t right) {
    return TreeNode{feature, threshold, left, right, 0.0};
  }

  bool operator==(const TreeNode&) const = default;
};

/// Binary regression tree; node 0 is the root.
class Tree {
 public:
  static Tree single_leaf(double weight) { return from_nodes({TreeNode::make_leaf(weight)}); }

  /// Throws DanglingReferenceError for a child id outside the node list and
  /// MalformedNodeError for cycles, shared or unreachable nodes, negative
  /// feature indices, or non-finite thresholds and weights.
  static Tree from_nodes(std::vector<TreeNode> nodes);

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  Index leaf_count() const;
  /// Longest root-to-leaf path in edges.
  int depth() const;

  /// Id of the leaf reached by `row`; ties (value == threshold) go right.
  template <typename Derived>
  std::int32_t route(const Eigen::DenseBase<Derived>& row) const {
    std::int32_t id = 0;
    while (!nodes_[static_cast<std::size_t>(id)].is_leaf()) {
      const TreeNode& node = nodes_[static_cast<std::size_t>(id)];
      if (node.feature >= row.size()) {
        throw ModelError("tree references feature " + std::to_string(node.feature) +
                         " but the row has " + std::to_string(row.size()) + " values");
      }
      id = row(node.feature) < node.threshold ? node.left : node.right;
    }
    return id;
  }

  bool operator==(const Tree&) const = default;

 private:
  explicit Tree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}
  std::vector<TreeNode> nodes_;
};

template <typename Derived>
double predict_tree(const Tree& tree, const Eigen::DenseBase<Derived>& row) {
  return tree.nodes()[static_cast<std::size_t>(tree.route(row))].weight;
}

/// Per-feature row orders sorted by (value, row id). Computing this once per
/// dataset lets every boosting round skip the sort at the root.
class SortedColumns {
 public:
  explicit SortedColumns(const Eigen::MatrixXd& features);
  SortedColumns(const Eigen::MatrixXd& features, std::span<const Index> rows);

  const std::vector<std::vector<std::int32_t>>& orders() const { return orders_; }

 private:
  std::vector<std::vector<std::int32_t>> orders_;
};

/// Exact greedy search: for every feature, every midpoint between consecutive
/// distinct values within `instances`. Candidates need both child hessian sums
/// >= min_child_weight and gain > min_split_gain. Ties in gain keep the lower
/// feature index, then the lower threshold. Returns nullopt when nothing
/// qualifies. Throws ContractError for an empty or out-of-range instance set.
std::optional<SplitCandidate> find_best_split(const Dataset& data, std::span<const Index> instances,
                                              const GradHess& gh, const TreeParams& params);

/// Greedy recursive growth: split while a candidate qualifies and the node is
/// shallower than max_depth, otherwise emit leaf_weight(G, H, lambda).
Tree build_tree(const Dataset& data, std::span<const Index> instances, const GradHess& gh,
                const TreeParams& params);

/// Same tree over all rows of `data`, reusing presorted columns.
Tree build_tree(const Dataset& data, const SortedColumns& columns, const GradHess& gh,
                const TreeParams& params);

/// Sum over leaves of G_j w_j + (H_j + lambda) w_j^2 / 2 + gamma T for the
/// instances routed through `tree`.
double tree_objective(const Tree& tree, const Dataset& data, std::span<const Index> instances,
                      const GradHess& gh, const TreeParams& params);

}  // namespace fairboost

#endif  // FAIRBOOST_TREE_HPP_
