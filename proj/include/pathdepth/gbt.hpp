#pragma once

#include "pathdepth/dataset.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace pathdepth {

struct GbtNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf weight, before the learning rate

  bool is_leaf() const noexcept { return feature < 0; }
};

/// Regression tree stored as a node array with the root at index 0.
/// Routing: x[feature] < threshold goes left, otherwise right.
struct GbtTree {
  std::vector<GbtNode> nodes;

  double leaf_value(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  int depth() const;
};

struct GbtParams {
  int n_trees = 100;
  int max_depth = 2;
  double learning_rate = 0.3;
  double l2_lambda = 1.0;
  std::uint64_t seed = 0;
};

struct GbtModel {
  FeatureConfig config = FeatureConfig::Two;
  double base_prediction = 0.0;
  double learning_rate = 0.3;
  double l2_lambda = 1.0;
  int max_depth = 2;
  std::uint64_t seed = 0;
  std::vector<GbtTree> trees;
};

struct GbtFit {
  GbtModel model;
  /// Training RMSE after k trees, k = 0..n_trees.
  std::vector<double> train_rmse;
};

GbtFit gbt_fit(const Eigen::MatrixXd& features, const Eigen::VectorXd& target, FeatureConfig config,
               const GbtParams& params = {});
GbtFit gbt_fit(const std::vector<FeatureRow>& rows, FeatureConfig config, const GbtParams& params = {});

double gbt_predict(const GbtModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);

}  // namespace pathdepth
