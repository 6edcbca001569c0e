#include "pathdepth/gbt.hpp"

#include "pathdepth/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pathdepth {

double GbtTree::leaf_value(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  int i = 0;
  while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
    const GbtNode& n = nodes[static_cast<std::size_t>(i)];
    i = x(n.feature) < n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(i)].value;
}

int GbtTree::depth() const {
  if (nodes.empty()) return 0;
  auto walk = [&](auto&& self, int i) -> int {
    const GbtNode& n = nodes[static_cast<std::size_t>(i)];
    if (n.is_leaf()) return 0;
    return 1 + std::max(self(self, n.left), self(self, n.right));
  };
  return walk(walk, 0);
}

namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Eigen::MatrixXd& x, const std::vector<std::vector<int>>& sorted, const GbtParams& params)
      : x_(x), sorted_(sorted), params_(params) {}

  GbtTree build(const Eigen::VectorXd& residual) {
    residual_ = &residual;
    tree_ = GbtTree{};
    member_.assign(static_cast<std::size_t>(x_.rows()), 1);
    grow(1, 0);
    return std::move(tree_);
  }

 private:
  double score(double g, double n) const { return g * g / (n + params_.l2_lambda); }

  Split best_split(int tag, double g_total, double n_total) const {
    Split best;
    const double parent = score(g_total, n_total);
    std::vector<int> members;
    for (int j = 0; j < static_cast<int>(x_.cols()); ++j) {
      members.clear();
      for (int i : sorted_[static_cast<std::size_t>(j)]) {
        if (member_[static_cast<std::size_t>(i)] == tag) members.push_back(i);
      }
      double g_left = 0.0;
      for (std::size_t k = 0; k + 1 < members.size(); ++k) {
        g_left += (*residual_)(members[k]);
        const double lo = x_(members[k], j);
        const double hi = x_(members[k + 1], j);
        if (!(lo < hi)) continue;
        const double n_left = static_cast<double>(k + 1);
        const double gain = score(g_left, n_left) + score(g_total - g_left, n_total - n_left) - parent;
        if (gain > best.gain) {
          double mid = lo + (hi - lo) / 2.0;
          if (!(mid > lo)) mid = hi;
          best = {j, mid, gain};
        }
      }
    }
    return best;
  }

  // Grows the subtree for rows tagged `tag`; returns its node index.
  int grow(int tag, int depth) {
    double g = 0.0;
    double n = 0.0;
    for (std::size_t i = 0; i < member_.size(); ++i) {
      if (member_[i] == tag) {
        g += (*residual_)(static_cast<Eigen::Index>(i));
        n += 1.0;
      }
    }
    const int index = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back(GbtNode{});

    Split split;
    if (depth < params_.max_depth && n >= 2.0) split = best_split(tag, g, n);
    if (split.feature < 0) {
      tree_.nodes[static_cast<std::size_t>(index)].value = g / (n + params_.l2_lambda);
      return index;
    }

    const int left_tag = ++next_tag_;
    const int right_tag = ++next_tag_;
    for (std::size_t i = 0; i < member_.size(); ++i) {
      if (member_[i] != tag) continue;
      member_[i] = x_(static_cast<Eigen::Index>(i), split.feature) < split.threshold ? left_tag : right_tag;
    }
    const int left = grow(left_tag, depth + 1);
    const int right = grow(right_tag, depth + 1);
    GbtNode& node = tree_.nodes[static_cast<std::size_t>(index)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = left;
    node.right = right;
    return index;
  }

  const Eigen::MatrixXd& x_;
  const std::vector<std::vector<int>>& sorted_;
  const GbtParams& params_;
  const Eigen::VectorXd* residual_ = nullptr;
  std::vector<int> member_;
  int next_tag_ = 1;
  GbtTree tree_;
};

double rmse_of(const Eigen::VectorXd& residual) {
  return std::sqrt(residual.squaredNorm() / static_cast<double>(residual.size()));
}

}  // namespace

GbtFit gbt_fit(const Eigen::MatrixXd& features, const Eigen::VectorXd& target, FeatureConfig config,
               const GbtParams& params) {
  if (features.rows() == 0) throw Error(ErrorCode::EmptyTraining, "no training rows");
  if (features.cols() != dimension(config) || features.rows() != target.size()) {
    throw Error(ErrorCode::InvalidArgument, "feature matrix shape does not match the configuration");
  }
  if (params.n_trees < 0 || params.max_depth < 0 || !(params.learning_rate > 0.0) || params.l2_lambda < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "invalid boosting parameters");
  }
  if (!features.allFinite() || !target.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "training data must be finite");
  }

  const auto n = static_cast<int>(features.rows());
  std::vector<std::vector<int>> sorted(static_cast<std::size_t>(features.cols()));
  for (int j = 0; j < static_cast<int>(features.cols()); ++j) {
    auto& order = sorted[static_cast<std::size_t>(j)];
    order.resize(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return features(a, j) < features(b, j); });
  }

  GbtFit fit;
  GbtModel& model = fit.model;
  model.config = config;
  model.base_prediction = target.mean();
  model.learning_rate = params.learning_rate;
  model.l2_lambda = params.l2_lambda;
  model.max_depth = params.max_depth;
  model.seed = params.seed;

  Eigen::VectorXd residual = target.array() - model.base_prediction;
  fit.train_rmse.push_back(rmse_of(residual));

  TreeBuilder builder(features, sorted, params);
  for (int round = 0; round < params.n_trees; ++round) {
    GbtTree tree = builder.build(residual);
    for (int i = 0; i < n; ++i) {
      residual(i) -= params.learning_rate * tree.leaf_value(features.row(i).transpose());
    }
    model.trees.push_back(std::move(tree));
    fit.train_rmse.push_back(rmse_of(residual));
  }
  return fit;
}

GbtFit gbt_fit(const std::vector<FeatureRow>& rows, FeatureConfig config, const GbtParams& params) {
  return gbt_fit(feature_matrix(rows, config), target_vector(rows), config, params);
}

double gbt_predict(const GbtModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != dimension(model.config)) {
    throw Error(ErrorCode::InvalidArgument, "feature vector has the wrong dimension");
  }
  double sum = 0.0;
  for (const auto& tree : model.trees) sum += tree.leaf_value(x);
  return model.base_prediction + model.learning_rate * sum;
}

}  // namespace pathdepth
