#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

#include "maclab/error.hpp"
#include "maclab/machine.hpp"

namespace maclab {
namespace {

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

double subset_sse(double sum, double sumsq, double n) {
  return sumsq - sum * sum / n;
}

// Best variance-reduction split over all features, or nullopt if no split
// clears the minimum-gain guard. Candidate thresholds are midpoints between
// consecutive distinct sorted values; ties prefer the lower feature index,
// then the lower threshold.
std::optional<SplitChoice> best_split(const Eigen::MatrixXd& X,
                                      const Eigen::VectorXd& y,
                                      const std::vector<int>& idx,
                                      int min_leaf) {
  const auto n = static_cast<double>(idx.size());
  double sum = 0.0, sumsq = 0.0;
  for (int i : idx) {
    sum += y(i);
    sumsq += y(i) * y(i);
  }
  const double node_sse = subset_sse(sum, sumsq, n);
  const double min_gain = 1e-12 * std::max(1.0, node_sse);

  std::optional<SplitChoice> best;
  std::vector<std::pair<double, double>> vals(idx.size());
  for (int f = 0; f < X.cols(); ++f) {
    for (std::size_t i = 0; i < idx.size(); ++i) {
      vals[i] = {X(idx[i], f), y(idx[i])};
    }
    std::sort(vals.begin(), vals.end());

    double left_sum = 0.0, left_sumsq = 0.0;
    for (std::size_t p = 1; p < vals.size(); ++p) {
      left_sum += vals[p - 1].second;
      left_sumsq += vals[p - 1].second * vals[p - 1].second;
      if (vals[p - 1].first == vals[p].first) continue;
      const auto nl = static_cast<double>(p);
      const auto nr = n - nl;
      if (nl < min_leaf || nr < min_leaf) continue;
      const double gain = node_sse - subset_sse(left_sum, left_sumsq, nl) -
                          subset_sse(sum - left_sum, sumsq - left_sumsq, nr);
      if (gain <= min_gain) continue;
      if (!best || gain > best->gain) {
        best = SplitChoice{f, std::midpoint(vals[p - 1].first, vals[p].first),
                           gain};
      }
    }
  }
  return best;
}

struct Builder {
  const Eigen::MatrixXd& X;
  const Eigen::VectorXd& y;
  const TreeParams& params;
  std::vector<TreeNode> nodes;
  std::vector<double> node_sse;  // per node, on its training rows
  std::vector<int> node_count;

  int grow(std::vector<int>& idx, int depth) {
    const int id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    node_sse.push_back(0.0);
    node_count.push_back(static_cast<int>(idx.size()));

    double sum = 0.0, sumsq = 0.0;
    for (int i : idx) {
      sum += y(i);
      sumsq += y(i) * y(i);
    }
    const auto n = static_cast<double>(idx.size());
    nodes[id].value = sum / n;
    node_sse[id] = subset_sse(sum, sumsq, n);

    if (depth >= params.max_depth ||
        static_cast<int>(idx.size()) < 2 * params.min_leaf) {
      return id;
    }
    auto split = best_split(X, y, idx, params.min_leaf);
    if (!split) return id;

    std::vector<int> left, right;
    for (int i : idx) {
      (X(i, split->feature) <= split->threshold ? left : right).push_back(i);
    }
    idx.clear();
    idx.shrink_to_fit();

    nodes[id].feature = split->feature;
    nodes[id].threshold = split->threshold;
    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    nodes[id].left = l;
    nodes[id].right = r;
    return id;
  }
};

struct SubtreeStats {
  double sse = 0.0;  // summed over the subtree's leaves
  int leaves = 0;
};

SubtreeStats subtree_stats(const std::vector<TreeNode>& nodes,
                           const std::vector<double>& node_sse, int id,
                           std::vector<SubtreeStats>& out) {
  if (nodes[id].is_leaf()) {
    out[id] = {node_sse[id], 1};
  } else {
    auto l = subtree_stats(nodes, node_sse, nodes[id].left, out);
    auto r = subtree_stats(nodes, node_sse, nodes[id].right, out);
    out[id] = {l.sse + r.sse, l.leaves + r.leaves};
  }
  return out[id];
}

// Weakest-link cost-complexity pruning: repeatedly collapse the internal node
// with the smallest per-leaf risk increase g while that increase stays within
// cc_alpha. Risk is on the mean scale (SSE / n_train).
void prune(std::vector<TreeNode>& nodes, const std::vector<double>& node_sse,
           double cc_alpha, double n_train) {
  for (;;) {
    std::vector<SubtreeStats> stats(nodes.size());
    subtree_stats(nodes, node_sse, 0, stats);

    // Only nodes reachable from the root matter; collapsed subtrees leave
    // orphans behind which are dropped during compaction.
    std::vector<int> reachable;
    reachable.push_back(0);
    for (std::size_t q = 0; q < reachable.size(); ++q) {
      const TreeNode& t = nodes[reachable[q]];
      if (!t.is_leaf()) {
        reachable.push_back(t.left);
        reachable.push_back(t.right);
      }
    }

    int weakest = -1;
    double weakest_g = 0.0;
    for (int id : reachable) {
      if (nodes[id].is_leaf()) continue;
      const double g = (node_sse[id] - stats[id].sse) / n_train /
                       (stats[id].leaves - 1);
      if (weakest < 0 || g < weakest_g) {
        weakest = id;
        weakest_g = g;
      }
    }
    if (weakest < 0 || weakest_g > cc_alpha) return;
    nodes[weakest].feature = -1;
    nodes[weakest].left = -1;
    nodes[weakest].right = -1;
  }
}

int compact(const std::vector<TreeNode>& nodes, int id,
            std::vector<TreeNode>& out) {
  const int new_id = static_cast<int>(out.size());
  out.push_back(nodes[id]);
  if (!nodes[id].is_leaf()) {
    const int l = compact(nodes, nodes[id].left, out);
    const int r = compact(nodes, nodes[id].right, out);
    out[new_id].left = l;
    out[new_id].right = r;
  }
  return new_id;
}

}  // namespace

FittedMachine fit_tree(const Dataset& train, const TreeParams& params) {
  train.validate();
  if (params.max_depth < 1 || params.min_leaf < 1 || params.cc_alpha < 0.0) {
    throw Error(ErrorCode::invalid_config, "invalid tree parameters");
  }

  Builder builder{train.features, train.target, params, {}, {}, {}};
  std::vector<int> all(train.rows());
  std::iota(all.begin(), all.end(), 0);
  builder.grow(all, 0);

  prune(builder.nodes, builder.node_sse, params.cc_alpha,
        static_cast<double>(train.rows()));

  TreeState state;
  compact(builder.nodes, 0, state.nodes);
  return FittedMachine(MachineKind::tree, params, std::move(state),
                       static_cast<int>(train.width()));
}

}  // namespace maclab
