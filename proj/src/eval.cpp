#include "pathdepth/eval.hpp"

#include "pathdepth/error.hpp"
#include "pathdepth/parallel.hpp"
#include "pathdepth/reference.hpp"
#include "pathdepth/svg.hpp"
#include "pathdepth/text_util.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>

namespace pathdepth {

HoldoutPlan make_holdout_plan(const std::vector<FeatureRow>& rows) {
  std::set<std::string> city_set;
  for (const auto& r : rows) city_set.insert(r.city);
  if (city_set.size() < 2) {
    throw Error(ErrorCode::TooFewCities, "a city holdout needs at least 2 distinct cities, found " +
                                             std::to_string(city_set.size()));
  }
  HoldoutPlan plan;
  plan.cities.assign(city_set.begin(), city_set.end());
  for (const auto& test : plan.cities) {
    HoldoutFold fold;
    fold.test_city = test;
    for (const auto& c : plan.cities) {
      if (c != test) fold.train_cities.push_back(c);
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
      (rows[i].city == test ? fold.test_rows : fold.train_rows).push_back(i);
    }
    plan.folds.push_back(std::move(fold));
  }
  check_plan_hygiene(plan, rows.size());
  return plan;
}

void check_plan_hygiene(const HoldoutPlan& plan, std::size_t n_rows) {
  std::vector<int> test_count(n_rows, 0);
  for (const auto& fold : plan.folds) {
    std::vector<char> in_test(n_rows, 0);
    for (auto i : fold.test_rows) {
      if (i >= n_rows) throw Error(ErrorCode::InvalidArgument, "fold " + fold.test_city + ": row index out of range");
      in_test[i] = 1;
      ++test_count[i];
    }
    for (auto i : fold.train_rows) {
      if (i >= n_rows || in_test[i]) {
        throw Error(ErrorCode::InvalidArgument, "fold " + fold.test_city + ": row " + std::to_string(i) +
                                                    " appears in both train and test sets");
      }
    }
    if (std::find(fold.train_cities.begin(), fold.train_cities.end(), fold.test_city) != fold.train_cities.end()) {
      throw Error(ErrorCode::InvalidArgument, "fold " + fold.test_city + ": test city is also a training city");
    }
  }
  for (std::size_t i = 0; i < n_rows; ++i) {
    if (test_count[i] != 1) {
      throw Error(ErrorCode::InvalidArgument, "row " + std::to_string(i) + " is in " +
                                                  std::to_string(test_count[i]) + " test sets");
    }
  }
}

double rmse(std::span<const double> errors) {
  if (errors.empty()) throw Error(ErrorCode::EmptyErrors, "RMSE of an empty error list");
  double sum = 0.0;
  for (double e : errors) sum += e * e;
  return std::sqrt(sum / static_cast<double>(errors.size()));
}

double mae(std::span<const double> errors) {
  if (errors.empty()) throw Error(ErrorCode::EmptyErrors, "MAE of an empty error list");
  double sum = 0.0;
  for (double e : errors) sum += std::abs(e);
  return sum / static_cast<double>(errors.size());
}

double median(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptyErrors, "median of an empty list");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

ErrorStats error_stats(std::span<const double> errors) {
  return {rmse(errors), mae(errors), median(errors), errors.size()};
}

std::size_t Histogram::total() const { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }

Histogram error_histogram(std::span<const double> errors, double bin_width) {
  if (!(bin_width > 0.0)) throw Error(ErrorCode::InvalidArgument, "histogram bin width must be positive");
  Histogram h;
  h.bin_width = bin_width;
  if (errors.empty()) return h;
  const auto [lo_it, hi_it] = std::minmax_element(errors.begin(), errors.end());
  const auto first = static_cast<long long>(std::floor(*lo_it / bin_width));
  const auto last = static_cast<long long>(std::floor(*hi_it / bin_width));
  const auto n_bins = static_cast<std::size_t>(last - first + 1);
  h.counts.assign(n_bins, 0);
  for (std::size_t k = 0; k <= n_bins; ++k) {
    h.edges.push_back(static_cast<double>(first + static_cast<long long>(k)) * bin_width);
  }
  for (double e : errors) {
    const auto k = static_cast<long long>(std::floor(e / bin_width)) - first;
    ++h.counts[static_cast<std::size_t>(std::clamp<long long>(k, 0, static_cast<long long>(n_bins) - 1))];
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t seed, std::size_t fold, std::size_t run) {
  return seed + static_cast<std::uint64_t>(fold) * 1000u + static_cast<std::uint64_t>(run);
}

namespace {

std::vector<FeatureRow> select(const std::vector<FeatureRow>& rows, const std::vector<std::size_t>& idx) {
  std::vector<FeatureRow> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(rows[i]);
  return out;
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  // shifted by the first value so identical runs give exactly zero
  const double shift = v.front();
  double s = 0.0, ss = 0.0;
  for (double x : v) {
    s += x - shift;
    ss += (x - shift) * (x - shift);
  }
  const double n = static_cast<double>(v.size());
  return std::sqrt(std::max(0.0, (ss - s * s / n) / (n - 1.0)));
}

}  // namespace

EvalReport run_holdout(const std::vector<FeatureRow>& rows, const ModelSpec& spec, const HoldoutOptions& options) {
  if (options.n_runs == 0) throw Error(ErrorCode::InvalidArgument, "n_runs must be at least 1");
  const HoldoutPlan plan = make_holdout_plan(rows);
  const std::size_t n_folds = plan.folds.size();

  std::vector<std::vector<FeatureRow>> train(n_folds), test(n_folds);
  for (std::size_t f = 0; f < n_folds; ++f) {
    train[f] = select(rows, plan.folds[f].train_rows);
    test[f] = select(rows, plan.folds[f].test_rows);
  }

  // errors[fold][run]
  std::vector<std::vector<std::vector<double>>> errors(n_folds, std::vector<std::vector<double>>(options.n_runs));
  parallel_for(n_folds * options.n_runs, options.jobs, [&](std::size_t task) {
    const std::size_t f = task / options.n_runs;
    const std::size_t r = task % options.n_runs;
    try {
      const TrainedModel model = fit_model(train[f], spec, derive_seed(options.seed, f, r));
      const Eigen::VectorXd predicted = predict(model, test[f]);
      auto& e = errors[f][r];
      e.resize(test[f].size());
      for (std::size_t i = 0; i < e.size(); ++i) e[i] = predicted(static_cast<Eigen::Index>(i)) - test[f][i].pl;
    } catch (const Error& err) {
      throw Error(err.code(), "fold '" + plan.folds[f].test_city + "' run " + std::to_string(r) + ": " +
                                  err.detail());
    }
  });

  EvalReport report;
  report.kind = spec.kind;
  report.config = spec.config;
  report.n_runs = options.n_runs;
  report.seed = options.seed;
  std::vector<double> fold_rmse, fold_fspl;
  for (std::size_t f = 0; f < n_folds; ++f) {
    FoldResult fr;
    fr.test_city = plan.folds[f].test_city;
    fr.n_train = train[f].size();
    fr.n_test = test[f].size();
    for (const auto& e : errors[f]) fr.run_rmse.push_back(rmse(e));
    fr.rmse = median(fr.run_rmse);
    fr.run_rmse_std = sample_std(fr.run_rmse);

    std::vector<std::size_t> by_rmse(options.n_runs);
    std::iota(by_rmse.begin(), by_rmse.end(), std::size_t{0});
    std::stable_sort(by_rmse.begin(), by_rmse.end(),
                     [&](std::size_t a, std::size_t b) { return fr.run_rmse[a] < fr.run_rmse[b]; });
    fr.errors = errors[f][by_rmse[(options.n_runs - 1) / 2]];
    fr.mae = mae(fr.errors);
    fr.median_error = median(fr.errors);
    fr.histogram = error_histogram(fr.errors, options.bin_width);

    std::vector<double> fspl_err;
    for (const auto& row : test[f]) fspl_err.push_back(fspl_db(row.f, row.d) - row.pl);
    fr.fspl_rmse = rmse(fspl_err);

    fold_rmse.push_back(fr.rmse);
    fold_fspl.push_back(fr.fspl_rmse);
    if (fr.rmse > 0.0) report.max_relative_run_std = std::max(report.max_relative_run_std, fr.run_rmse_std / fr.rmse);
    report.folds.push_back(std::move(fr));
  }
  report.median_rmse = median(fold_rmse);
  report.median_fspl_rmse = median(fold_fspl);
  return report;
}

// ---------------------------------------------------------------------------
// rendering

namespace {

std::string fixed(double v, int decimals = 2) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width, bool right_align = true) {
  if (s.size() >= width) return s;
  const std::string fill(width - s.size(), ' ');
  return right_align ? fill + s : s + fill;
}

const reference::CityBaseline* find_baseline(const std::string& city) {
  const std::string key = detail::to_lower(city);
  for (const auto& b : reference::kCityBaselines) {
    if (detail::to_lower(b.city) == key) return &b;
  }
  return nullptr;
}

}  // namespace

std::string report_label(const EvalReport& report) {
  std::string kind;
  switch (report.kind) {
    case ModelKind::LogReg: kind = "LogReg"; break;
    case ModelKind::Gbt: kind = "GBT"; break;
    case ModelKind::Fcn: kind = "FCN"; break;
  }
  return kind + " " + std::to_string(dimension(report.config)) + "f";
}

std::string render_report_table(const std::vector<EvalReport>& reports, const ReportOptions& options) {
  if (reports.empty()) throw Error(ErrorCode::InvalidArgument, "no reports to render");
  const EvalReport& first = reports.front();
  for (const auto& r : reports) {
    if (r.folds.size() != first.folds.size()) {
      throw Error(ErrorCode::InvalidArgument, "reports cover different fold sets");
    }
    for (std::size_t f = 0; f < r.folds.size(); ++f) {
      if (r.folds[f].test_city != first.folds[f].test_city) {
        throw Error(ErrorCode::InvalidArgument, "reports cover different fold sets");
      }
    }
  }

  std::vector<std::string> header = {"City", "FSPL"};
  if (options.ofcom_reference) header.push_back("P.1812*");
  for (const auto& r : reports) {
    header.push_back(report_label(r));
    if (r.n_runs > 1) header.push_back(report_label(r) + " std");
  }

  std::vector<std::vector<std::string>> body;
  std::vector<double> p1812_values;
  for (std::size_t f = 0; f < first.folds.size(); ++f) {
    std::vector<std::string> row = {first.folds[f].test_city, fixed(first.folds[f].fspl_rmse)};
    if (options.ofcom_reference) {
      const auto* b = find_baseline(first.folds[f].test_city);
      row.push_back(b ? fixed(b->p1812_rmse_db) : "-");
    }
    for (const auto& r : reports) {
      row.push_back(fixed(r.folds[f].rmse));
      if (r.n_runs > 1) row.push_back(fixed(r.folds[f].run_rmse_std));
    }
    body.push_back(std::move(row));
  }
  std::vector<std::string> median_row = {"Median", fixed(first.median_fspl_rmse)};
  if (options.ofcom_reference) median_row.push_back(fixed(reference::kMedianP1812RmseDb));
  for (const auto& r : reports) {
    median_row.push_back(fixed(r.median_rmse));
    if (r.n_runs > 1) median_row.push_back("");
  }

  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& row : body) width[c] = std::max(width[c], row[c].size());
    width[c] = std::max(width[c], median_row[c].size());
  }
  auto emit = [&](std::ostringstream& out, const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << (c ? " | " : "") << pad(row[c], width[c], c != 0);
    }
    out << '\n';
  };
  auto rule = [&](std::ostringstream& out) {
    for (std::size_t c = 0; c < width.size(); ++c) out << (c ? "-+-" : "") << std::string(width[c], '-');
    out << '\n';
  };

  std::ostringstream out;
  out << "City holdout test results (RMSE in dB)\n\n";
  emit(out, header);
  rule(out);
  for (const auto& row : body) emit(out, row);
  rule(out);
  emit(out, median_row);

  out << "\nMedian error (predicted - measured, dB) per fold:\n";
  for (const auto& r : reports) {
    out << "  " << pad(report_label(r), 10, false) << ":";
    for (const auto& f : r.folds) out << ' ' << f.test_city << '=' << fixed(f.median_error);
    out << '\n';
  }
  for (const auto& r : reports) {
    if (r.n_runs > 1) {
      out << "\n" << report_label(r) << ": " << r.n_runs << " runs per fold; largest run-to-run RMSE std is "
          << fixed(100.0 * r.max_relative_run_std) << "% of the fold RMSE\n";
    }
  }

  if (options.ofcom_reference) {
    out << "\n* P.1812 column: static reference values, not computed.\n"
        << "\nReference values (Ofcom drive-test study; static, not computed)\n"
        << "  City         FSPL RMSE   P.1812 RMSE\n";
    for (const auto& b : reference::kCityBaselines) {
      out << "  " << pad(std::string(b.city), 12, false) << ' ' << pad(fixed(b.fspl_rmse_db), 9) << "   "
          << pad(fixed(b.p1812_rmse_db), 11) << '\n';
    }
    out << "  " << pad("Median", 12, false) << ' ' << pad(fixed(reference::kMedianFsplRmseDb), 9) << "   "
        << pad(fixed(reference::kMedianP1812RmseDb), 11) << '\n'
        << "  Log-reg coefficients, London holdout:\n";
    for (const auto& c : reference::kLondonLogReg) {
      out << "    " << c.features << " features (" << c.names << "):";
      for (int k = 0; k < c.count; ++k) out << (k ? ", " : " ") << fixed(c.values[static_cast<std::size_t>(k)]);
      out << '\n';
    }
  }
  return out.str();
}

std::string report_csv(const std::vector<EvalReport>& reports) {
  std::ostringstream out;
  out << "model,features,city,n_train,n_test,rmse_db,mae_db,median_error_db,run_rmse_std_db,fspl_rmse_db\n";
  for (const auto& r : reports) {
    const auto kind = model_kind_name(r.kind);
    const int k = dimension(r.config);
    for (const auto& f : r.folds) {
      out << kind << ',' << k << ',' << f.test_city << ',' << f.n_train << ',' << f.n_test << ','
          << detail::format_double(f.rmse) << ',' << detail::format_double(f.mae) << ','
          << detail::format_double(f.median_error) << ',' << detail::format_double(f.run_rmse_std) << ','
          << detail::format_double(f.fspl_rmse) << '\n';
    }
    out << kind << ',' << k << ",median,,," << detail::format_double(r.median_rmse) << ",,,,"
        << detail::format_double(r.median_fspl_rmse) << '\n';
  }
  return out.str();
}

std::string histogram_csv(const Histogram& histogram) {
  std::ostringstream out;
  out << "bin_lo_db,bin_hi_db,count\n";
  for (std::size_t k = 0; k < histogram.counts.size(); ++k) {
    out << detail::format_double(histogram.edges[k]) << ',' << detail::format_double(histogram.edges[k + 1]) << ','
        << histogram.counts[k] << '\n';
  }
  return out.str();
}

std::string histogram_svg(const Histogram& histogram, const std::string& title) {
  return svg::bar_chart(title, "Prediction error (dB)", "Count", histogram.edges, histogram.counts);
}

}  // namespace pathdepth
