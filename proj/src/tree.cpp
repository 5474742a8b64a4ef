#include "fairboost/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fairboost/csv.hpp"

namespace fairboost {

void TreeParams::validate() const {
  if (max_depth < 0) throw ParameterError("max_depth must be >= 0");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ParameterError("lambda must be >= 0");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ParameterError("gamma must be >= 0");
  if (!(min_child_weight >= 0.0)) throw ParameterError("min_child_weight must be >= 0");
  if (!(min_split_gain >= 0.0)) throw ParameterError("min_split_gain must be >= 0");
}

// ---------------------------------------------------------------------------
// Tree structure

Tree Tree::from_nodes(std::vector<TreeNode> nodes) {
  if (nodes.empty()) throw MalformedNodeError("tree has no nodes");
  const auto count = static_cast<std::int32_t>(nodes.size());
  std::vector<int> parents(nodes.size(), 0);
  for (std::int32_t id = 0; id < count; ++id) {
    const TreeNode& node = nodes[static_cast<std::size_t>(id)];
    if (node.is_leaf()) {
      if (node.right >= 0) throw MalformedNodeError("leaf " + std::to_string(id) + " has a right child");
      if (!std::isfinite(node.weight)) {
        throw MalformedNodeError("leaf " + std::to_string(id) + " has a non-finite weight");
      }
      continue;
    }
    if (node.right < 0 || node.left >= count || node.right >= count) {
      throw DanglingReferenceError("node " + std::to_string(id) + " references missing child " +
                                   std::to_string(node.right < 0 || node.right >= count ? node.right
                                                                                        : node.left));
    }
    if (node.feature < 0) {
      throw MalformedNodeError("node " + std::to_string(id) + " has a negative feature index");
    }
    if (!std::isfinite(node.threshold)) {
      throw MalformedNodeError("node " + std::to_string(id) + " has a non-finite threshold");
    }
    if (node.left == node.right) {
      throw MalformedNodeError("node " + std::to_string(id) + " uses one child twice");
    }
    ++parents[static_cast<std::size_t>(node.left)];
    ++parents[static_cast<std::size_t>(node.right)];
  }
  if (parents[0] != 0) throw MalformedNodeError("root node 0 is referenced as a child");
  for (std::size_t id = 1; id < nodes.size(); ++id) {
    if (parents[id] != 1) {
      throw MalformedNodeError("node " + std::to_string(id) + " has " + std::to_string(parents[id]) +
                               " parents, expected exactly one");
    }
  }
  // Every node but the root has one parent and the root has none; with n - 1
  // edges that only leaves cycles detached from the root, caught here.
  std::vector<char> seen(nodes.size(), 0);
  std::vector<std::int32_t> stack{0};
  std::size_t visited = 0;
  while (!stack.empty()) {
    const auto id = stack.back();
    stack.pop_back();
    if (seen[static_cast<std::size_t>(id)]) throw MalformedNodeError("tree contains a cycle");
    seen[static_cast<std::size_t>(id)] = 1;
    ++visited;
    const TreeNode& node = nodes[static_cast<std::size_t>(id)];
    if (!node.is_leaf()) {
      stack.push_back(node.right);
      stack.push_back(node.left);
    }
  }
  if (visited != nodes.size()) throw MalformedNodeError("tree has nodes unreachable from the root");
  return Tree(std::move(nodes));
}

Index Tree::leaf_count() const {
  return std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); });
}

int Tree::depth() const {
  std::vector<int> depth(nodes_.size(), 0);
  int deepest = 0;
  // Children always follow their parent in a validated tree built here, but
  // loaded trees may be in any order, so walk explicitly.
  std::vector<std::int32_t> stack{0};
  while (!stack.empty()) {
    const auto id = stack.back();
    stack.pop_back();
    const TreeNode& node = nodes_[static_cast<std::size_t>(id)];
    deepest = std::max(deepest, depth[static_cast<std::size_t>(id)]);
    if (!node.is_leaf()) {
      depth[static_cast<std::size_t>(node.left)] = depth[static_cast<std::size_t>(id)] + 1;
      depth[static_cast<std::size_t>(node.right)] = depth[static_cast<std::size_t>(id)] + 1;
      stack.push_back(node.left);
      stack.push_back(node.right);
    }
  }
  return deepest;
}

// ---------------------------------------------------------------------------
// Presorting

namespace {

std::vector<std::int32_t> sorted_order(const Eigen::MatrixXd& x, Index feature,
                                       std::vector<std::int32_t> rows) {
  auto column = x.col(feature);
  std::sort(rows.begin(), rows.end(), [&column](std::int32_t a, std::int32_t b) {
    const double va = column(a);
    const double vb = column(b);
    return va < vb || (va == vb && a < b);
  });
  return rows;
}

}  // namespace

SortedColumns::SortedColumns(const Eigen::MatrixXd& features) {
  std::vector<std::int32_t> rows(static_cast<std::size_t>(features.rows()));
  std::iota(rows.begin(), rows.end(), 0);
  orders_.reserve(static_cast<std::size_t>(features.cols()));
  for (Index f = 0; f < features.cols(); ++f) orders_.push_back(sorted_order(features, f, rows));
}

SortedColumns::SortedColumns(const Eigen::MatrixXd& features, std::span<const Index> rows) {
  std::vector<std::int32_t> ids;
  ids.reserve(rows.size());
  for (Index r : rows) {
    if (r < 0 || r >= features.rows()) throw ContractError("instance index out of range");
    ids.push_back(static_cast<std::int32_t>(r));
  }
  orders_.reserve(static_cast<std::size_t>(features.cols()));
  for (Index f = 0; f < features.cols(); ++f) orders_.push_back(sorted_order(features, f, ids));
}

// ---------------------------------------------------------------------------
// Split search

namespace {

// Instances of one node: ascending ids (for the node totals) and per-feature
// orders (for the scan).
struct NodeRows {
  std::vector<std::int32_t> ids;
  std::vector<std::vector<std::int32_t>> by_feature;
};

GradStats node_totals(const std::vector<std::int32_t>& ids, const GradHess& gh) {
  GradStats total;
  for (auto i : ids) {
    total.grad += gh.grad(i);
    total.hess += gh.hess(i);
  }
  return total;
}

double midpoint_threshold(double lo, double hi) {
  // Any threshold t with lo < t <= hi partitions identically; the midpoint is
  // nudged up to hi if rounding collapsed it onto lo.
  const double mid = std::midpoint(lo, hi);
  return mid > lo ? mid : hi;
}

std::optional<SplitCandidate> best_split(const Eigen::MatrixXd& x, const NodeRows& node,
                                         GradStats total, const GradHess& gh,
                                         const TreeParams& params) {
  std::optional<SplitCandidate> best;
  const double lambda = params.lambda;
  const double parent_score = total.grad * total.grad / (total.hess + lambda);
  for (std::size_t f = 0; f < node.by_feature.size(); ++f) {
    const auto& order = node.by_feature[f];
    auto column = x.col(static_cast<Index>(f));
    GradStats left;
    for (std::size_t k = 0; k + 1 < order.size(); ++k) {
      const auto i = order[k];
      left.grad += gh.grad(i);
      left.hess += gh.hess(i);
      const double value = column(i);
      const double next = column(order[k + 1]);
      if (!(value < next)) continue;
      const GradStats right{total.grad - left.grad, total.hess - left.hess};
      if (left.hess < params.min_child_weight || right.hess < params.min_child_weight) continue;
      if (!(left.hess + lambda > 0.0) || !(right.hess + lambda > 0.0)) continue;
      const double gain = 0.5 * (left.grad * left.grad / (left.hess + lambda) +
                                 right.grad * right.grad / (right.hess + lambda) - parent_score) -
                          params.gamma;
      if (!(gain > params.min_split_gain)) continue;
      if (!best || gain > best->gain) {
        best = SplitCandidate{static_cast<Index>(f), midpoint_threshold(value, next), gain, left, right};
      }
    }
  }
  return best;
}

void check_inputs(const Dataset& data, const GradHess& gh, const TreeParams& params) {
  params.validate();
  if (gh.grad.size() != data.n_rows() || gh.hess.size() != data.n_rows()) {
    throw ContractError("gradient/hessian length must equal the number of rows");
  }
}

NodeRows root_rows(const Dataset& data, std::span<const Index> instances) {
  if (instances.empty()) throw ContractError("instance set must be non-empty");
  NodeRows node;
  node.ids.reserve(instances.size());
  for (Index r : instances) {
    if (r < 0 || r >= data.n_rows()) throw ContractError("instance index out of range");
    node.ids.push_back(static_cast<std::int32_t>(r));
  }
  std::sort(node.ids.begin(), node.ids.end());
  if (std::adjacent_find(node.ids.begin(), node.ids.end()) != node.ids.end()) {
    throw ContractError("instance set contains duplicates");
  }
  node.by_feature = SortedColumns(data.features(), instances).orders();
  return node;
}

class TreeGrower {
 public:
  TreeGrower(const Eigen::MatrixXd& x, const GradHess& gh, const TreeParams& params)
      : x_(x), gh_(gh), params_(params), goes_left_(static_cast<std::size_t>(x.rows()), 0) {}

  Tree grow(NodeRows root) {
    nodes_.clear();
    grow_node(std::move(root), 0);
    return Tree::from_nodes(std::move(nodes_));
  }

 private:
  std::int32_t grow_node(NodeRows node, int depth) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    const GradStats total = node_totals(node.ids, gh_);
    std::optional<SplitCandidate> split;
    if (depth < params_.max_depth) split = best_split(x_, node, total, gh_, params_);
    if (!split) {
      nodes_.push_back(TreeNode::make_leaf(leaf_weight(total.grad, total.hess, params_.lambda)));
      return id;
    }
    nodes_.push_back(TreeNode::make_split(split->feature, split->threshold, -1, -1));

    auto column = x_.col(split->feature);
    for (auto i : node.ids) goes_left_[static_cast<std::size_t>(i)] = column(i) < split->threshold;
    auto [left, right] = partition(node);
    node = NodeRows{};

    const auto left_id = grow_node(std::move(left), depth + 1);
    const auto right_id = grow_node(std::move(right), depth + 1);
    nodes_[static_cast<std::size_t>(id)].left = left_id;
    nodes_[static_cast<std::size_t>(id)].right = right_id;
    return id;
  }

  // Stable partition keeps every per-feature order sorted in the children.
  std::pair<NodeRows, NodeRows> partition(const NodeRows& node) const {
    NodeRows left;
    NodeRows right;
    auto split_list = [this](const std::vector<std::int32_t>& from, std::vector<std::int32_t>& l,
                             std::vector<std::int32_t>& r) {
      for (auto i : from) (goes_left_[static_cast<std::size_t>(i)] ? l : r).push_back(i);
    };
    split_list(node.ids, left.ids, right.ids);
    left.by_feature.resize(node.by_feature.size());
    right.by_feature.resize(node.by_feature.size());
    for (std::size_t f = 0; f < node.by_feature.size(); ++f) {
      left.by_feature[f].reserve(left.ids.size());
      right.by_feature[f].reserve(right.ids.size());
      split_list(node.by_feature[f], left.by_feature[f], right.by_feature[f]);
    }
    return {std::move(left), std::move(right)};
  }

  const Eigen::MatrixXd& x_;
  const GradHess& gh_;
  const TreeParams& params_;
  std::vector<char> goes_left_;
  std::vector<TreeNode> nodes_;
};

}  // namespace

std::optional<SplitCandidate> find_best_split(const Dataset& data, std::span<const Index> instances,
                                              const GradHess& gh, const TreeParams& params) {
  check_inputs(data, gh, params);
  const NodeRows node = root_rows(data, instances);
  return best_split(data.features(), node, node_totals(node.ids, gh), gh, params);
}

Tree build_tree(const Dataset& data, std::span<const Index> instances, const GradHess& gh,
                const TreeParams& params) {
  check_inputs(data, gh, params);
  return TreeGrower(data.features(), gh, params).grow(root_rows(data, instances));
}

Tree build_tree(const Dataset& data, const SortedColumns& columns, const GradHess& gh,
                const TreeParams& params) {
  check_inputs(data, gh, params);
  if (static_cast<Index>(columns.orders().size()) != data.n_cols()) {
    throw ContractError("presorted columns do not match the dataset width");
  }
  NodeRows root;
  root.ids.resize(static_cast<std::size_t>(data.n_rows()));
  std::iota(root.ids.begin(), root.ids.end(), 0);
  root.by_feature = columns.orders();
  return TreeGrower(data.features(), gh, params).grow(std::move(root));
}

double tree_objective(const Tree& tree, const Dataset& data, std::span<const Index> instances,
                      const GradHess& gh, const TreeParams& params) {
  std::vector<GradStats> per_leaf(tree.nodes().size());
  for (Index r : instances) {
    const auto leaf = static_cast<std::size_t>(tree.route(data.features().row(r)));
    per_leaf[leaf].grad += gh.grad(r);
    per_leaf[leaf].hess += gh.hess(r);
  }
  double objective = 0.0;
  for (std::size_t id = 0; id < tree.nodes().size(); ++id) {
    const TreeNode& node = tree.nodes()[id];
    if (!node.is_leaf()) continue;
    const double w = node.weight;
    objective += per_leaf[id].grad * w + 0.5 * (per_leaf[id].hess + params.lambda) * w * w +
                 params.gamma;
  }
  return objective;
}

}  // namespace fairboost
