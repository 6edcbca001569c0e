#pragma once

#include "pathdepth/dataset.hpp"
#include "pathdepth/models.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace pathdepth {

struct HoldoutFold {
  std::string test_city;
  std::vector<std::string> train_cities;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
};

/// One fold per city, cities in lexicographic order.
struct HoldoutPlan {
  std::vector<std::string> cities;
  std::vector<HoldoutFold> folds;
};

HoldoutPlan make_holdout_plan(const std::vector<FeatureRow>& rows);

/// Throws unless every fold's train and test rows are disjoint and the test
/// sets partition [0, n_rows).
void check_plan_hygiene(const HoldoutPlan& plan, std::size_t n_rows);

double rmse(std::span<const double> errors);
double mae(std::span<const double> errors);
double median(std::span<const double> values);

struct ErrorStats {
  double rmse = 0.0;
  double mae = 0.0;
  double median_error = 0.0;
  std::size_t n = 0;
};

ErrorStats error_stats(std::span<const double> errors);

struct Histogram {
  double bin_width = 1.0;
  std::vector<double> edges;  // counts.size() + 1 entries, multiples of bin_width
  std::vector<std::size_t> counts;

  std::size_t total() const;
};

/// Bins aligned to integer multiples of bin_width covering [min, max];
/// bins are half-open [lo, hi).
Histogram error_histogram(std::span<const double> errors, double bin_width = 1.0);

struct FoldResult {
  std::string test_city;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  /// Median over runs for rmse; mae, median error, errors and histogram come
  /// from the run whose RMSE sits at the (lower) median.
  double rmse = 0.0;
  double mae = 0.0;
  double median_error = 0.0;
  std::vector<double> run_rmse;
  double run_rmse_std = 0.0;
  double fspl_rmse = 0.0;
  std::vector<double> errors;  // predicted - measured
  Histogram histogram;
};

struct EvalReport {
  ModelKind kind = ModelKind::LogReg;
  FeatureConfig config = FeatureConfig::Two;
  std::size_t n_runs = 1;
  std::uint64_t seed = 0;
  std::vector<FoldResult> folds;
  double median_rmse = 0.0;
  double median_fspl_rmse = 0.0;
  /// max over folds of run_rmse_std / rmse
  double max_relative_run_std = 0.0;
};

struct HoldoutOptions {
  std::size_t n_runs = 1;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  double bin_width = 1.0;
};

std::uint64_t derive_seed(std::uint64_t seed, std::size_t fold, std::size_t run);

EvalReport run_holdout(const std::vector<FeatureRow>& rows, const ModelSpec& spec, const HoldoutOptions& options);

// ---------------------------------------------------------------------------
// report rendering

struct ReportOptions {
  /// Adds the static reference columns and block for the Ofcom drive-test set.
  bool ofcom_reference = false;
};

std::string report_label(const EvalReport& report);

/// Text table: one row per city plus a median row, one column per report.
std::string render_report_table(const std::vector<EvalReport>& reports, const ReportOptions& options = {});
std::string report_csv(const std::vector<EvalReport>& reports);

std::string histogram_csv(const Histogram& histogram);
std::string histogram_svg(const Histogram& histogram, const std::string& title);

}  // namespace pathdepth
