// Standalone acceptance run: one PASS/FAIL line per criterion, nonzero exit
// if any criterion fails or overruns its time budget.

#include "support.hpp"
#include "report_fixture.hpp"

#include "pathdepth/analysis.hpp"
#include "pathdepth/cli.hpp"
#include "pathdepth/error.hpp"
#include "pathdepth/eval.hpp"
#include "pathdepth/fspl.hpp"
#include "pathdepth/gbt.hpp"
#include "pathdepth/logreg.hpp"
#include "pathdepth/profile.hpp"
#include "pathdepth/text_util.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

using namespace pathdepth;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), format, a, b, c);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. sampled depths against the cell-walking oracle

struct Scene {
  GridPair pair;
  Link link;
};

Scene random_scene(testing::Rng& rng) {
  const std::size_t n = 8 + rng.below(57);
  const double cs = rng.uniform(0.5, 10.0);
  const double ext = static_cast<double>(n) * cs;
  struct Hill {
    double x, y, r, h;
  };
  struct Box {
    double x0, y0, x1, y1, h;
  };
  std::vector<Hill> hills(rng.below(3));
  for (auto& h : hills) h = {rng.uniform(0, ext), rng.uniform(0, ext), rng.uniform(2 * cs, ext / 2), rng.uniform(0, 40)};
  std::vector<Box> boxes(rng.below(9));
  for (auto& b : boxes) {
    const double x = rng.uniform(0, ext), y = rng.uniform(0, ext);
    b = {x, y, x + rng.uniform(cs, 10 * cs), y + rng.uniform(cs, 10 * cs), rng.uniform(2, 30)};
  }
  auto terrain = [=](double x, double y) {
    double z = 0.0;
    for (const auto& h : hills) z += h.h * std::exp(-((x - h.x) * (x - h.x) + (y - h.y) * (y - h.y)) / (h.r * h.r));
    return z;
  };
  auto dtm = testing::grid_from(n, n, cs, 0, 0, terrain);
  auto dsm = testing::grid_from(n, n, cs, 0, 0, [&](double x, double y) {
    double z = terrain(x, y);
    for (const auto& b : boxes) {
      if (x >= b.x0 && x < b.x1 && y >= b.y0 && y < b.y1) z = std::max(z, terrain(x, y) + b.h);
    }
    return z;
  });
  GridPair pair = GridPair::make(dtm, dsm);
  // antennas sit above the local surface
  auto clear_height = [&](double x, double y) {
    return sample_height(pair.dsm, x, y).value - sample_height(pair.dtm, x, y).value + rng.uniform(0.5, 8.0);
  };
  Link l;
  do {
    l.tx_x = rng.uniform(0, ext);
    l.tx_y = rng.uniform(0, ext);
    l.rx_x = rng.uniform(0, ext);
    l.rx_y = rng.uniform(0, ext);
  } while (l.horizontal_distance() < 2.0 * cs);
  l.tx_h_agl = clear_height(l.tx_x, l.tx_y);
  l.rx_h_agl = clear_height(l.rx_x, l.rx_y);
  return {std::move(pair), l};
}

Outcome depth_oracle() {
  testing::Rng rng(1001);
  int failures = 0, obstructed = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const Scene sc = random_scene(rng);
    const PathProfile p = extract_profile(sc.pair, sc.link);
    const DepthSummary d = compute_depths(p);
    const auto ex = testing::exact_depths(sc.pair.dtm, sc.pair.dsm, sc.link.tx_x, sc.link.tx_y, sc.link.tx_h_agl,
                                          sc.link.rx_x, sc.link.rx_y, sc.link.rx_h_agl);
    const double tol_t = p.step * ex.terrain_runs + 1e-9;
    const double tol_c = p.step * ex.clutter_runs + 1e-9;
    const double et = std::abs(d.terrain_depth - ex.terrain);
    const double ec = std::abs(d.clutter_depth - ex.clutter);
    worst = std::max({worst, et / (tol_t + p.step * 1e-9), ec / (tol_c + p.step * 1e-9)});
    if (ex.terrain + ex.clutter > 0.0) ++obstructed;
    if (et > tol_t || ec > tol_c || d.obstacle_depth != d.terrain_depth + d.clutter_depth) ++failures;
  }
  return {failures == 0 && obstructed >= 50,
          fmt("%g failures, %g obstructed links, worst error %.2f of tolerance", failures, obstructed, worst)};
}

// ---------------------------------------------------------------------------
// 2. clutter on top of obstructing terrain

Outcome clutter_exclusion() {
  const Link link{0.25, 1.5, 99.75, 1.5, 10.0, 10.0};
  const DepthSummary hill = compute_depths(extract_profile(testing::canopy_hill_fixture(), link));
  const DepthSummary building = compute_depths(extract_profile(testing::building_fixture(), link));
  return {hill.clutter_depth == 0.0 && hill.terrain_depth > 0.0 && building.clutter_depth > 0.0,
          fmt("hill t=%.2f c=%.2f, building c=%.2f", hill.terrain_depth, hill.clutter_depth, building.clutter_depth)};
}

// ---------------------------------------------------------------------------
// 3. log-reg recovery

Outcome logreg_recovery() {
  const std::vector<double> truth{20, 25, 10, 30};
  const std::vector<std::string> cities{"c1", "c2", "c3", "c4", "c5"};
  double clean_err = 0.0;
  {
    const auto rows = testing::synthetic_rows(2000, cities, {20, 25, 10, 30, 0.0}, 31);
    const LogRegFit fit = logreg_fit(rows, FeatureConfig::Three);
    for (int i = 0; i < 4; ++i) clean_err = std::max(clean_err, std::abs(fit.model.coeffs[i] - truth[i]));
  }
  const auto rows = testing::synthetic_rows(50000, cities, {20, 25, 10, 30, 2.0}, 32);
  const LogRegFit fit = logreg_fit(rows, FeatureConfig::Three);
  double noisy_err = 0.0;
  for (int i = 0; i < 4; ++i) noisy_err = std::max(noisy_err, std::abs(fit.model.coeffs[i] - truth[i]));
  ModelSpec spec;
  spec.config = FeatureConfig::Three;
  const EvalReport r = run_holdout(rows, spec, {});
  const bool pass = clean_err <= 1e-6 && noisy_err <= 0.1 && r.median_rmse >= 1.8 && r.median_rmse <= 2.2;
  return {pass, fmt("clean max error %.2e, noisy max error %.3f, holdout RMSE %.3f dB", clean_err, noisy_err,
                    r.median_rmse)};
}

// ---------------------------------------------------------------------------
// 4. boosting contract

Outcome gbt_contract() {
  testing::Rng rng(41);
  int non_monotone = 0, too_deep = 0;
  for (int ds = 0; ds < 20; ++ds) {
    const std::size_t n = 50 + rng.below(400);
    const int k = 2 + static_cast<int>(rng.below(3));
    Eigen::MatrixXd x(n, k);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(0, 1000);
    for (std::size_t i = 0; i < n; ++i) y(i) = 100 + 0.02 * x(i, 0) + 10 * std::sin(x(i, 1) / 100) + 5 * rng.normal();
    const FeatureConfig config = k == 2 ? FeatureConfig::Two : k == 3 ? FeatureConfig::Three : FeatureConfig::Four;
    const GbtFit fit = gbt_fit(x, y, config);
    if (fit.train_rmse.size() != 101) ++non_monotone;
    for (std::size_t r = 1; r < fit.train_rmse.size(); ++r) {
      if (fit.train_rmse[r] > fit.train_rmse[r - 1] * (1 + 1e-12)) ++non_monotone;
    }
    for (const auto& t : fit.model.trees) {
      if (t.depth() > 2) ++too_deep;
    }
  }
  Eigen::MatrixXd x2(2, 2);
  x2 << 500, 900, 2000, 900;
  const Eigen::Vector2d y2(100, 101.5);
  const GbtFit two = gbt_fit(x2, y2, FeatureConfig::Two);
  const double two_err = std::max(std::abs(gbt_predict(two.model, x2.row(0).transpose()) - y2(0)),
                                  std::abs(gbt_predict(two.model, x2.row(1).transpose()) - y2(1)));
  return {non_monotone == 0 && too_deep == 0 && two_err < 1e-6,
          fmt("%g RMSE increases, %g trees deeper than 2, two-point error %.2e dB", non_monotone, too_deep, two_err)};
}

// ---------------------------------------------------------------------------
// 5. network gradient

Outcome fcn_gradient() {
  testing::Rng rng(51);
  double worst = 0.0;
  int draws = 0, rejected = 0;
  while (draws < 10) {
    const Eigen::Index k = 2 + static_cast<Eigen::Index>(rng.below(3));
    const Eigen::Index h = 8 + static_cast<Eigen::Index>(rng.below(25));
    auto p = FcnParameters<double>::zeros(k, h);
    for (Eigen::Index i = 0; i < p.w1.size(); ++i) p.w1.data()[i] = rng.uniform(-1, 1);
    for (Eigen::Index i = 0; i < h; ++i) p.b1(i) = rng.uniform(-1, 1);
    for (Eigen::Index i = 0; i < h; ++i) p.w2(i) = rng.uniform(-1, 1);
    p.b2 = rng.uniform(-1, 1);
    Eigen::MatrixXd x(24, k);
    Eigen::VectorXd y(24);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-2, 2);
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = rng.uniform(-3, 3);
    // a pre-activation within reach of the probe makes the difference quotient straddle the kink
    const Eigen::MatrixXd pre = (x * p.w1.transpose()).rowwise() + p.b1.transpose();
    if (pre.cwiseAbs().minCoeff() < 1e-3) {
      ++rejected;
      continue;
    }
    FcnParameters<double> grad;
    fcn_loss_and_gradient<double>(p, x, y, nullptr, grad);
    auto slots = testing::fcn_slots(p);
    auto gslots = testing::fcn_slots(grad);
    for (std::size_t s = 0; s < slots.size(); ++s) {
      const double keep = *slots[s];
      *slots[s] = keep + 1e-6;
      const double up = testing::fcn_mse(p, x, y);
      *slots[s] = keep - 1e-6;
      const double down = testing::fcn_mse(p, x, y);
      *slots[s] = keep;
      const double numeric = (up - down) / 2e-6;
      const double scale = std::max({std::abs(numeric), std::abs(*gslots[s]), 1e-6});
      worst = std::max(worst, std::abs(numeric - *gslots[s]) / scale);
    }
    ++draws;
  }
  return {worst < 1e-4, fmt("max relative error %.2e over 10 draws (%g redrawn near a kink)", worst, rejected)};
}

// ---------------------------------------------------------------------------
// 6. value of the depth feature

Outcome depth_value() {
  const auto rows = testing::synthetic_rows(6000, {"c1", "c2", "c3", "c4", "c5"}, {20, 25, 10, 30, 2.0}, 61);
  std::ostringstream detail;
  bool pass = true;
  for (ModelKind kind : {ModelKind::LogReg, ModelKind::Gbt, ModelKind::Fcn}) {
    double rmse[5] = {};
    for (FeatureConfig config : {FeatureConfig::Two, FeatureConfig::Three, FeatureConfig::Four}) {
      ModelSpec spec;
      spec.kind = kind;
      spec.config = config;
      spec.fcn.batch_size = 64;
      spec.fcn.epochs = 100;
      HoldoutOptions opts;
      opts.seed = 6;
      rmse[dimension(config)] = run_holdout(rows, spec, opts).median_rmse;
    }
    const bool ok = rmse[2] - rmse[3] >= 2.0 && rmse[4] <= rmse[3] + 0.3;
    pass = pass && ok;
    detail << model_kind_name(kind) << " " << fmt("%.2f/%.2f/%.2f", rmse[2], rmse[3], rmse[4]) << (ok ? "" : " (miss)")
           << "; ";
  }
  std::string d = detail.str();
  d.resize(d.size() - 2);
  return {pass, "median RMSE 2f/3f/4f: " + d};
}

// ---------------------------------------------------------------------------
// 7. holdout hygiene

Outcome hygiene() {
  testing::Rng rng(71);
  int violations = 0, folds = 0;
  for (int ds = 0; ds < 25; ++ds) {
    std::vector<std::string> cities;
    const std::size_t n_cities = 2 + rng.below(7);
    for (std::size_t c = 0; c < n_cities; ++c) cities.push_back("city" + std::to_string(rng.below(1000)));
    auto rows = testing::synthetic_rows(50 + rng.below(500), cities, {}, 700 + ds);
    std::set<std::string> distinct;
    for (const auto& r : rows) distinct.insert(r.city);
    if (distinct.size() < 2) continue;
    const HoldoutPlan plan = make_holdout_plan(rows);
    check_plan_hygiene(plan, rows.size());
    std::vector<int> seen(rows.size(), 0);
    for (const auto& f : plan.folds) {
      ++folds;
      const std::set<std::size_t> train(f.train_rows.begin(), f.train_rows.end());
      for (auto i : f.test_rows) {
        if (train.count(i) || rows[i].city != f.test_city) ++violations;
        ++seen[i];
      }
      if (train.size() + f.test_rows.size() != rows.size()) ++violations;
    }
    for (int s : seen) {
      if (s != 1) ++violations;
    }
  }
  // the library check itself must reject a leaked row
  const auto rows = testing::synthetic_rows(60, {"a", "b", "c"}, {}, 73);
  HoldoutPlan leak = make_holdout_plan(rows);
  leak.folds[1].train_rows.push_back(leak.folds[1].test_rows.front());
  bool caught = false;
  try {
    check_plan_hygiene(leak, rows.size());
  } catch (const Error&) {
    caught = true;
  }
  return {violations == 0 && caught && folds > 0,
          fmt("%g folds checked, %g violations, injected leak ", folds, violations) + (caught ? "caught" : "missed")};
}

// ---------------------------------------------------------------------------
// 8. determinism through the command line

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "pathdepth");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (code != 0) std::cerr << err.str();
  return code;
}

std::vector<std::string> output_files(const fs::path& dir) {
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().filename() != "run.json") names.push_back(e.path().filename().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

Outcome determinism() {
  testing::TempDir dir("acceptance_determinism");
  const auto rows = testing::synthetic_rows(900, {"a", "b", "c"}, {20, 25, 10, 30, 2.0}, 81);
  save_table(rows, dir / "t.csv");
  const std::string table = (dir / "t.csv").string();
  int mismatches = 0, compared = 0;
  auto same_dirs = [&](const fs::path& a, const fs::path& b) {
    const auto names = output_files(a);
    if (names != output_files(b) || names.empty()) {
      ++mismatches;
      return;
    }
    for (const auto& n : names) {
      ++compared;
      if (detail::read_file(a / n) != detail::read_file(b / n)) ++mismatches;
    }
  };
  for (const std::string model : {"logreg", "gbt", "fcn"}) {
    for (int rep = 0; rep < 2; ++rep) {
      if (cli({"train", table, "--model", model, "--seed", "5", "--epochs", "5", "--batch-size", "128", "--out-dir",
               (dir / (model + std::to_string(rep))).string()}) != 0) {
        return {false, "train failed"};
      }
    }
    same_dirs(dir / (model + "0"), dir / (model + "1"));
  }
  const std::vector<std::string> holdout{"holdout", table, "--model", "logreg,gbt,fcn", "--features", "2,3",
                                         "--runs", "2", "--seed", "9", "--epochs", "3", "--batch-size", "128"};
  int k = 0;
  for (const std::string jobs : {"1", "4", "1"}) {
    auto args = holdout;
    args.insert(args.end(), {"--jobs", jobs, "--out-dir", (dir / ("h" + std::to_string(k++))).string()});
    if (cli(args) != 0) return {false, "holdout failed"};
  }
  same_dirs(dir / "h0", dir / "h2");
  same_dirs(dir / "h0", dir / "h1");
  return {mismatches == 0, fmt("%g files compared, %g differ", compared, mismatches)};
}

// ---------------------------------------------------------------------------
// 9. obstacle-loss identity

Outcome obstacle_identity() {
  LogRegModel free_space;
  free_space.config = FeatureConfig::Three;
  free_space.coeffs = Eigen::Vector4d(20.0, 20.0, 0.0, fspl_offset_db());
  double worst_zero = 0.0;
  for (const auto& c : sweep_obstacle_loss(free_space, {449, 915, 3602}, {500, 5000, 10000}, 1000, 101)) {
    for (const auto& p : c.points) worst_zero = std::max(worst_zero, std::abs(p.loss));
  }
  LogRegModel lr;
  lr.config = FeatureConfig::Three;
  lr.coeffs = Eigen::Vector4d(18.32, 31.77, 11.03, -242.34);
  double worst_closed = 0.0;
  for (const auto& c : sweep_obstacle_loss(lr, {449, 3602}, {5000, 10000}, 1000, 101)) {
    // A log f + B log d + D - fspl is the value at o = 0
    const double base = 18.32 * std::log10(c.f) + 31.77 * std::log10(c.d) - 242.34 -
                        (20 * std::log10(c.f) + 20 * std::log10(c.d) + fspl_offset_db());
    for (const auto& p : c.points) {
      const double closed = base + 11.03 * std::log10(std::max(p.o, 1.0));
      worst_closed = std::max(worst_closed, std::abs(p.loss - closed));
    }
  }
  return {worst_zero <= 1e-9 && worst_closed <= 1e-9,
          fmt("free-space max |loss| %.1e dB, closed-form max error %.1e dB", worst_zero, worst_closed)};
}

// ---------------------------------------------------------------------------
// 10. reference block

Outcome reference_golden() {
  ReportOptions opts;
  opts.ofcom_reference = true;
  const std::string got = render_report_table(testing::ofcom_fixture(), opts);
  const std::string want = detail::read_file(testing::golden_report_path());
  const char* required[] = {"44.60", "11.85", "30.52, 31.08, -253.24", "18.32, 31.77, 11.03, -242.34",
                            "20.93, 31.76, 3.96, 8.50, -247.91"};
  int missing = 0;
  for (const char* s : required) {
    if (got.find(s) == std::string::npos) ++missing;
  }
  const std::string plain = render_report_table(testing::ofcom_fixture());
  const bool untagged_clean = plain.find("11.85") == std::string::npos;
  return {got == want && missing == 0 && untagged_clean,
          std::string(got == want ? "matches golden" : "differs from golden") + fmt(", %g reference strings missing", missing) +
              (untagged_clean ? "" : ", reference leaks without the tag")};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double limit_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"depth extraction matches cell-walking oracle", 30, depth_oracle},
      {"clutter over obstructing terrain is excluded", 30, clutter_exclusion},
      {"log-reg coefficient recovery", 10, logreg_recovery},
      {"boosting contract", 30, gbt_contract},
      {"network gradient check", 10, fcn_gradient},
      {"depth feature improves holdout RMSE", 300, depth_value},
      {"holdout hygiene", 30, hygiene},
      {"byte-identical reruns", 120, determinism},
      {"obstacle-loss identity", 10, obstacle_identity},
      {"reference block golden file", 10, reference_golden},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > criteria[i].limit_s) {
      o.pass = false;
      o.detail += fmt(" [over the %gs budget]", criteria[i].limit_s);
    }
    if (!o.pass) ++failed;
    std::printf("criterion %2zu: %s  %s (%s; %.2fs)\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].name,
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
