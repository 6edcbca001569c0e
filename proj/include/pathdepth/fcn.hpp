#pragma once

#include "pathdepth/dataset.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace pathdepth {

/// Weights of the single-hidden-layer network y = w2 . relu(W1 x + b1) + b2.
template <typename Scalar>
struct FcnParameters {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

  Matrix w1;  // hidden x inputs
  Vector b1;
  RowVector w2;
  Scalar b2 = Scalar(0);

  static FcnParameters zeros(Eigen::Index inputs, Eigen::Index hidden) {
    FcnParameters p;
    p.w1 = Matrix::Zero(hidden, inputs);
    p.b1 = Vector::Zero(hidden);
    p.w2 = RowVector::Zero(hidden);
    return p;
  }

  Eigen::Index inputs() const { return w1.cols(); }
  Eigen::Index hidden() const { return w1.rows(); }
  Eigen::Index size() const { return w1.size() + b1.size() + w2.size() + 1; }
};

/// Network output for each row of x (rows are samples).
template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> fcn_forward(const FcnParameters<Scalar>& p,
                                                     const Eigen::MatrixBase<Derived>& x) {
  const auto hidden = ((x * p.w1.transpose()).rowwise() + p.b1.transpose()).cwiseMax(Scalar(0));
  return (hidden * p.w2.transpose()).array() + p.b2;
}

/// Mean squared error of the network on (x, y) and its gradient. When
/// `dropout` is non-null it is an n x hidden matrix of keep-and-rescale
/// factors applied to the hidden activations.
template <typename Scalar>
Scalar fcn_loss_and_gradient(const FcnParameters<Scalar>& p,
                             const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& x,
                             const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& y,
                             const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>* dropout,
                             FcnParameters<Scalar>& grad) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const auto n = static_cast<Scalar>(x.rows());
  const Matrix pre = (x * p.w1.transpose()).rowwise() + p.b1.transpose();
  Matrix act = pre.cwiseMax(Scalar(0));
  if (dropout) act = act.cwiseProduct(*dropout);
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> err = ((act * p.w2.transpose()).array() + p.b2).matrix() - y;
  const Scalar loss = err.squaredNorm() / n;

  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> g_out = (Scalar(2) / n) * err;
  grad.w2 = g_out.transpose() * act;
  grad.b2 = g_out.sum();
  Matrix g_hidden = g_out * p.w2;
  if (dropout) g_hidden = g_hidden.cwiseProduct(*dropout);
  g_hidden = g_hidden.cwiseProduct((pre.array() > Scalar(0)).template cast<Scalar>().matrix());
  grad.w1 = g_hidden.transpose() * x;
  grad.b1 = g_hidden.colwise().sum().transpose();
  return loss;
}

struct TrainSpec {
  std::uint64_t seed = 0;
  int epochs = 20;
  int batch_size = 8192;
  double validation_fraction = 0.2;
  int hidden_units = 256;
  double dropout_rate = 0.2;
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct FcnModel {
  FeatureConfig config = FeatureConfig::Two;
  Eigen::VectorXd input_mean;
  Eigen::VectorXd input_std;
  /// Output de-standardisation: prediction = target_std * net + target_mean.
  double target_mean = 0.0;
  double target_std = 1.0;
  double dropout_rate = 0.2;
  FcnParameters<double> params;

  Eigen::VectorXd standardize(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    return (x - input_mean).cwiseQuotient(input_std);
  }
};

struct FcnFit {
  FcnModel model;
  std::vector<double> validation_mse;  // per epoch, dB^2
  std::vector<double> train_mse;       // per epoch, dB^2, dropout off
  int best_epoch = 0;                  // 1-based
  std::vector<int> degenerate_features;  // zero-variance inputs whose std was set to 1
};

FcnFit fcn_fit(const Eigen::MatrixXd& features, const Eigen::VectorXd& target, FeatureConfig config,
               const TrainSpec& spec = {});
FcnFit fcn_fit(const std::vector<FeatureRow>& rows, FeatureConfig config, const TrainSpec& spec = {});

double fcn_predict(const FcnModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);
Eigen::VectorXd fcn_predict_rows(const FcnModel& model, const Eigen::MatrixXd& features);

}  // namespace pathdepth
