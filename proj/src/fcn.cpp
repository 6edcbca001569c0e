#include "pathdepth/fcn.hpp"

#include "pathdepth/error.hpp"
#include "pathdepth/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace pathdepth {

namespace {

using Params = FcnParameters<double>;

// Adam first/second moment state, laid out like the parameters.
struct AdamState {
  Params m;
  Params v;
  long step = 0;
};

template <typename P, typename G, typename M, typename V>
void adam_apply(P& param, const G& grad, M& m, V& v, double lr_t, const TrainSpec& spec) {
  m = spec.beta1 * m + (1.0 - spec.beta1) * grad;
  v = spec.beta2 * v + (1.0 - spec.beta2) * grad.cwiseProduct(grad);
  param -= lr_t * m.cwiseQuotient((v.cwiseSqrt().array() + spec.epsilon).matrix());
}

void adam_update(Params& p, const Params& g, AdamState& s, const TrainSpec& spec) {
  ++s.step;
  const double t = static_cast<double>(s.step);
  // bias correction folded into the step size
  const double lr_t =
      spec.learning_rate * std::sqrt(1.0 - std::pow(spec.beta2, t)) / (1.0 - std::pow(spec.beta1, t));
  adam_apply(p.w1, g.w1, s.m.w1, s.v.w1, lr_t, spec);
  adam_apply(p.b1, g.b1, s.m.b1, s.v.b1, lr_t, spec);
  adam_apply(p.w2, g.w2, s.m.w2, s.v.w2, lr_t, spec);
  s.m.b2 = spec.beta1 * s.m.b2 + (1.0 - spec.beta1) * g.b2;
  s.v.b2 = spec.beta2 * s.v.b2 + (1.0 - spec.beta2) * g.b2 * g.b2;
  p.b2 -= lr_t * s.m.b2 / (std::sqrt(s.v.b2) + spec.epsilon);
}

// He-uniform hidden layer. The output layer starts at zero so the untrained
// network predicts the training-target mean.
Params initial_parameters(Eigen::Index inputs, Eigen::Index hidden, Rng& rng) {
  Params p = Params::zeros(inputs, hidden);
  const double limit = std::sqrt(6.0 / static_cast<double>(inputs));
  for (Eigen::Index i = 0; i < p.w1.size(); ++i) p.w1.data()[i] = rng.uniform(-limit, limit);
  return p;
}

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& x, const std::vector<Eigen::Index>& idx, std::size_t begin,
                            std::size_t end) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(end - begin), x.cols());
  for (std::size_t k = begin; k < end; ++k) out.row(static_cast<Eigen::Index>(k - begin)) = x.row(idx[k]);
  return out;
}

Eigen::VectorXd gather(const Eigen::VectorXd& y, const std::vector<Eigen::Index>& idx, std::size_t begin,
                       std::size_t end) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(end - begin));
  for (std::size_t k = begin; k < end; ++k) out(static_cast<Eigen::Index>(k - begin)) = y(idx[k]);
  return out;
}

}  // namespace

FcnFit fcn_fit(const Eigen::MatrixXd& features, const Eigen::VectorXd& target, FeatureConfig config,
               const TrainSpec& spec) {
  if (features.cols() != dimension(config) || features.rows() != target.size()) {
    throw Error(ErrorCode::InvalidArgument, "feature matrix shape does not match the configuration");
  }
  if (features.rows() < 2) {
    throw Error(ErrorCode::InsufficientRows, "need at least 2 rows for a train/validate split");
  }
  if (spec.epochs <= 0 || spec.batch_size <= 0 || spec.hidden_units <= 0 || !(spec.learning_rate > 0.0) ||
      !(spec.validation_fraction > 0.0 && spec.validation_fraction < 1.0) ||
      !(spec.dropout_rate >= 0.0 && spec.dropout_rate < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "invalid training specification");
  }
  if (!features.allFinite() || !target.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "training data must be finite");
  }

  Rng rng(spec.seed);
  const auto n = static_cast<std::size_t>(features.rows());
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  rng.shuffle(order);
  const auto n_val = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(spec.validation_fraction * static_cast<double>(n))), 1, n - 1);
  const std::size_t n_train = n - n_val;
  std::vector<Eigen::Index> train_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  const std::vector<Eigen::Index> val_idx(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());

  const Eigen::MatrixXd x_train_raw = gather_rows(features, train_idx, 0, n_train);
  const Eigen::VectorXd y_train_raw = gather(target, train_idx, 0, n_train);

  FcnFit fit;
  FcnModel& model = fit.model;
  model.config = config;
  model.dropout_rate = spec.dropout_rate;
  model.input_mean = x_train_raw.colwise().mean().transpose();
  model.input_std =
      ((x_train_raw.rowwise() - model.input_mean.transpose()).array().square().colwise().mean().sqrt()).transpose();
  for (Eigen::Index j = 0; j < model.input_std.size(); ++j) {
    if (!(model.input_std(j) > 0.0)) {
      model.input_std(j) = 1.0;
      fit.degenerate_features.push_back(static_cast<int>(j));
    }
  }
  model.target_mean = y_train_raw.mean();
  model.target_std = std::sqrt((y_train_raw.array() - model.target_mean).square().mean());
  if (!(model.target_std > 0.0)) model.target_std = 1.0;

  auto standardize_rows = [&](const Eigen::MatrixXd& x) -> Eigen::MatrixXd {
    return (x.rowwise() - model.input_mean.transpose()).array().rowwise() / model.input_std.transpose().array();
  };
  const Eigen::MatrixXd x_std = standardize_rows(features);
  const Eigen::VectorXd y_std = (target.array() - model.target_mean) / model.target_std;
  const Eigen::MatrixXd x_val = gather_rows(features, val_idx, 0, val_idx.size());
  const Eigen::VectorXd y_val = gather(target, val_idx, 0, val_idx.size());

  const Eigen::Index hidden = spec.hidden_units;
  Params params = initial_parameters(features.cols(), hidden, rng);
  AdamState adam{Params::zeros(features.cols(), hidden), Params::zeros(features.cols(), hidden), 0};
  Params grad = Params::zeros(features.cols(), hidden);

  const double keep = 1.0 - spec.dropout_rate;
  double best_val = std::numeric_limits<double>::infinity();
  Params best_params = params;
  const auto batch = static_cast<std::size_t>(spec.batch_size);

  auto mse_of = [&](const Eigen::MatrixXd& x_raw, const Eigen::VectorXd& y) {
    return (fcn_predict_rows(model, x_raw) - y).squaredNorm() / static_cast<double>(y.size());
  };

  for (int epoch = 1; epoch <= spec.epochs; ++epoch) {
    rng.shuffle(train_idx);
    for (std::size_t begin = 0; begin < n_train; begin += batch) {
      const std::size_t end = std::min(n_train, begin + batch);
      const Eigen::MatrixXd xb = gather_rows(x_std, train_idx, begin, end);
      const Eigen::VectorXd yb = gather(y_std, train_idx, begin, end);
      if (spec.dropout_rate > 0.0) {
        // inverted dropout: kept units are rescaled so inference needs no correction
        Eigen::MatrixXd mask(xb.rows(), hidden);
        for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = rng.uniform() < keep ? 1.0 / keep : 0.0;
        fcn_loss_and_gradient(params, xb, yb, &mask, grad);
      } else {
        fcn_loss_and_gradient<double>(params, xb, yb, nullptr, grad);
      }
      adam_update(params, grad, adam, spec);
    }

    model.params = params;
    const double val_mse = mse_of(x_val, y_val);
    fit.validation_mse.push_back(val_mse);
    fit.train_mse.push_back(mse_of(x_train_raw, y_train_raw));
    if (val_mse < best_val) {
      best_val = val_mse;
      best_params = params;
      fit.best_epoch = epoch;
    }
  }
  model.params = std::move(best_params);
  return fit;
}

FcnFit fcn_fit(const std::vector<FeatureRow>& rows, FeatureConfig config, const TrainSpec& spec) {
  return fcn_fit(feature_matrix(rows, config), target_vector(rows), config, spec);
}

Eigen::VectorXd fcn_predict_rows(const FcnModel& model, const Eigen::MatrixXd& features) {
  if (features.cols() != dimension(model.config)) {
    throw Error(ErrorCode::InvalidArgument, "feature matrix has the wrong dimension");
  }
  const Eigen::MatrixXd x =
      (features.rowwise() - model.input_mean.transpose()).array().rowwise() / model.input_std.transpose().array();
  return (fcn_forward(model.params, x).array() * model.target_std + model.target_mean).matrix();
}

double fcn_predict(const FcnModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != dimension(model.config)) {
    throw Error(ErrorCode::InvalidArgument, "feature vector has the wrong dimension");
  }
  const Eigen::VectorXd z = model.standardize(x);
  const Eigen::VectorXd hidden = (model.params.w1 * z + model.params.b1).cwiseMax(0.0);
  return (model.params.w2.dot(hidden) + model.params.b2) * model.target_std + model.target_mean;
}

}  // namespace pathdepth
