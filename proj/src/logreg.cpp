#include "pathdepth/logreg.hpp"

#include "pathdepth/error.hpp"
#include "pathdepth/text_util.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <limits>

namespace pathdepth {

namespace {

void check_positive_inputs(const Eigen::MatrixXd& features) {
  if ((features.leftCols(2).array() <= 0.0).any() || !features.leftCols(2).allFinite()) {
    throw Error(ErrorCode::NonPositiveInput, "distance and frequency must be positive");
  }
}

}  // namespace

Eigen::MatrixXd logreg_design(const Eigen::MatrixXd& features, double depth_floor) {
  Eigen::MatrixXd design(features.rows(), features.cols() + 1);
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    design.row(i) = logreg_design_row(features.row(i).transpose(), depth_floor);
  }
  return design;
}

LogRegFit logreg_fit(const Eigen::MatrixXd& features, const Eigen::VectorXd& target, FeatureConfig config,
                     double depth_floor) {
  const Eigen::Index p = dimension(config) + 1;
  if (features.cols() != dimension(config) || features.rows() != target.size()) {
    throw Error(ErrorCode::InvalidArgument, "feature matrix shape does not match the configuration");
  }
  if (features.rows() < p) {
    throw Error(ErrorCode::InsufficientRows, "need at least " + std::to_string(p) + " rows, got " +
                                                 std::to_string(features.rows()));
  }
  if (!(depth_floor > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "depth floor must be positive");
  }
  check_positive_inputs(features);

  const Eigen::MatrixXd design = logreg_design(features, depth_floor);
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(design);

  LogRegFit fit;
  fit.model.config = config;
  fit.model.depth_floor = depth_floor;
  fit.model.coeffs = cod.solve(target);
  fit.rank = cod.rank();

  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(design).singularValues();
  const double smallest = sv(sv.size() - 1);
  fit.condition = smallest > 0.0 ? sv(0) / smallest : std::numeric_limits<double>::infinity();
  fit.singular = fit.rank < p;
  if (fit.singular) {
    fit.diagnostic = "SingularDesign: rank " + std::to_string(fit.rank) + " of " + std::to_string(p) +
                     ", condition " + detail::format_double(fit.condition) + "; minimum-norm solution returned";
  }
  return fit;
}

LogRegFit logreg_fit(const std::vector<FeatureRow>& rows, FeatureConfig config, double depth_floor) {
  return logreg_fit(feature_matrix(rows, config), target_vector(rows), config, depth_floor);
}

double logreg_predict(const LogRegModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != dimension(model.config)) {
    throw Error(ErrorCode::InvalidArgument, "feature vector has the wrong dimension");
  }
  if (!(x(0) > 0.0) || !(x(1) > 0.0)) {
    throw Error(ErrorCode::NonPositiveInput, "distance and frequency must be positive");
  }
  return logreg_design_row(x, model.depth_floor).dot(model.coeffs);
}

}  // namespace pathdepth
