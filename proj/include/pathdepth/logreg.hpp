#pragma once

#include "pathdepth/dataset.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace pathdepth {

/// PL = A log10 f + B log10 d [+ C log10 o | + C log10 t + D log10 c] + intercept.
/// Depths enter as log10(max(depth, depth_floor)); the intercept is stored last.
struct LogRegModel {
  FeatureConfig config = FeatureConfig::Two;
  Eigen::VectorXd coeffs;
  double depth_floor = 1.0;
};

struct LogRegFit {
  LogRegModel model;
  Eigen::Index rank = 0;
  double condition = 0.0;  // ratio of extreme singular values of the design
  bool singular = false;   // rank deficient; coeffs are the minimum-norm solution
  std::string diagnostic;
};

/// Design row [log10 f, log10 d, log10 max(depth, floor)..., 1] for a feature
/// vector laid out as in feature_vector().
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, 1, Eigen::Dynamic> logreg_design_row(const Eigen::MatrixBase<Derived>& x,
                                                                             typename Derived::Scalar depth_floor) {
  using Scalar = typename Derived::Scalar;
  using std::log10;
  using std::max;
  const Eigen::Index dim = x.size();
  Eigen::Matrix<Scalar, 1, Eigen::Dynamic> row(dim + 1);
  row(0) = log10(x(1));
  row(1) = log10(x(0));
  for (Eigen::Index k = 2; k < dim; ++k) row(k) = log10(max(x(k), depth_floor));
  row(dim) = Scalar(1);
  return row;
}

Eigen::MatrixXd logreg_design(const Eigen::MatrixXd& features, double depth_floor);

LogRegFit logreg_fit(const std::vector<FeatureRow>& rows, FeatureConfig config, double depth_floor = 1.0);
LogRegFit logreg_fit(const Eigen::MatrixXd& features, const Eigen::VectorXd& target, FeatureConfig config,
                     double depth_floor = 1.0);

double logreg_predict(const LogRegModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);

}  // namespace pathdepth
