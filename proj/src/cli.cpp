#include "pathdepth/cli.hpp"

#include "pathdepth/analysis.hpp"
#include "pathdepth/dataset.hpp"
#include "pathdepth/error.hpp"
#include "pathdepth/eval.hpp"
#include "pathdepth/models.hpp"
#include "pathdepth/profile.hpp"
#include "pathdepth/text_util.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <set>
#include <sstream>

namespace pathdepth::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "pathdepth 0.1.0";

// Config problems the user can fix by changing flags or files (exit 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require_file(const fs::path& path, const std::string& what) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw ConfigError(what + " not found: " + path.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
}

json double_list(const std::vector<double>& values) {
  json out = json::array();
  for (double v : values) out.push_back(v);
  return out;
}

void write_run_manifest(const fs::path& out_dir, const std::string& command, const std::vector<std::string>& args,
                        json config, const std::vector<fs::path>& inputs, const std::vector<std::string>& outputs) {
  json manifest;
  manifest["tool"] = kToolVersion;
  manifest["command"] = command;
  manifest["argv"] = args;
  manifest["config"] = std::move(config);
  json digests = json::object();
  for (const auto& p : inputs) digests[p.string()] = "sha256:" + file_digest(p);
  manifest["inputs"] = std::move(digests);
  manifest["outputs"] = outputs;
  detail::write_file(out_dir / "run.json", manifest.dump(2) + "\n");
}

std::string format_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

// ---------------------------------------------------------------------------
// shared model flags

struct ModelFlags {
  double depth_floor = 1.0;
  GbtParams gbt;
  TrainSpec fcn;
};

void add_model_flags(CLI::App* cmd, ModelFlags& flags) {
  cmd->add_option("--depth-floor", flags.depth_floor, "log-reg depth floor (m)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--trees", flags.gbt.n_trees, "boosting rounds")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--max-depth", flags.gbt.max_depth, "tree depth limit")
      ->check(CLI::Range(1, 16))
      ->capture_default_str();
  cmd->add_option("--gbt-lr", flags.gbt.learning_rate, "boosting learning rate")
      ->check(CLI::Range(1e-9, 1.0))
      ->capture_default_str();
  cmd->add_option("--lambda", flags.gbt.l2_lambda, "leaf L2 penalty")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_option("--epochs", flags.fcn.epochs, "network epochs")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--batch-size", flags.fcn.batch_size, "network batch size")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--hidden", flags.fcn.hidden_units, "hidden units")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--dropout", flags.fcn.dropout_rate, "dropout rate")
      ->check(CLI::Range(0.0, 0.95))
      ->capture_default_str();
  cmd->add_option("--fcn-lr", flags.fcn.learning_rate, "Adam learning rate")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--val-fraction", flags.fcn.validation_fraction, "validation split")
      ->check(CLI::Range(0.01, 0.9))
      ->capture_default_str();
}

ModelSpec make_spec(ModelKind kind, FeatureConfig config, const ModelFlags& flags) {
  ModelSpec spec;
  spec.kind = kind;
  spec.config = config;
  spec.depth_floor = flags.depth_floor;
  spec.gbt = flags.gbt;
  spec.fcn = flags.fcn;
  return spec;
}

json spec_json(const ModelSpec& spec) {
  json j;
  j["model"] = std::string(model_kind_name(spec.kind));
  j["features"] = dimension(spec.config);
  switch (spec.kind) {
    case ModelKind::LogReg: j["depth_floor"] = spec.depth_floor; break;
    case ModelKind::Gbt:
      j["trees"] = spec.gbt.n_trees;
      j["max_depth"] = spec.gbt.max_depth;
      j["learning_rate"] = spec.gbt.learning_rate;
      j["l2_lambda"] = spec.gbt.l2_lambda;
      break;
    case ModelKind::Fcn:
      j["epochs"] = spec.fcn.epochs;
      j["batch_size"] = spec.fcn.batch_size;
      j["hidden_units"] = spec.fcn.hidden_units;
      j["dropout_rate"] = spec.fcn.dropout_rate;
      j["learning_rate"] = spec.fcn.learning_rate;
      j["validation_fraction"] = spec.fcn.validation_fraction;
      j["beta1"] = spec.fcn.beta1;
      j["beta2"] = spec.fcn.beta2;
      j["epsilon"] = spec.fcn.epsilon;
      break;
  }
  return j;
}

const std::map<std::string, ModelKind> kModelNames{
    {"logreg", ModelKind::LogReg}, {"gbt", ModelKind::Gbt}, {"fcn", ModelKind::Fcn}};

// ---------------------------------------------------------------------------
// build-dataset

struct BuildArgs {
  std::string measurements;
  std::string grids;
  std::string out_dir;
  double step = 0.0;  // 0 = half the cell size
  bool curvature = false;
  double k_factor = 4.0 / 3.0;
  double max_invalid_fraction = 0.05;
  std::vector<double> latlon;
  unsigned jobs = 1;
};

json percentiles_json(const Percentiles& p) { return {{"p10", p.p10}, {"p50", p.p50}, {"p90", p.p90}}; }

int cmd_build_dataset(const BuildArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
  require_file(a.measurements, "measurements file");
  require_file(a.grids, "grids manifest");
  if (!a.latlon.empty() && a.latlon.size() != 2) throw ConfigError("--latlon takes lat,lon");

  const fs::path manifest_path(a.grids);
  const auto manifest = parse_grid_manifest(detail::read_file(manifest_path), manifest_path.parent_path());
  std::vector<fs::path> inputs{a.measurements, manifest_path};
  for (const auto& [city, entry] : manifest) {
    require_file(entry.dtm, "DTM grid for " + city);
    require_file(entry.dsm, "DSM grid for " + city);
    inputs.push_back(entry.dtm);
    inputs.push_back(entry.dsm);
  }

  CoordinateMode mode = PlanarCoordinates{};
  if (a.latlon.size() == 2) mode = LatLonCoordinates{a.latlon[0], a.latlon[1]};

  auto ingest = ingest_measurements(detail::read_file(a.measurements), mode);
  const std::size_t n_read = ingest.measurements.size() + ingest.rejects.size();
  auto floor = filter_noise_floor(std::move(ingest.measurements));

  std::set<std::string> needed;
  for (const auto& m : floor.kept) needed.insert(m.city);
  std::map<std::string, GridPair> grids;
  json clamped = json::object();
  for (const auto& [city, entry] : manifest) {
    if (!needed.count(city)) continue;
    try {
      grids.emplace(city, GridPair::load(entry.dtm, entry.dsm));
    } catch (const Error& e) {
      throw Error(e.code(), city + " grids (" + entry.dtm.string() + ", " + entry.dsm.string() + "): " + e.detail());
    }
    clamped[city] = grids.at(city).clamped_cells;
  }

  FeatureOptions opts;
  if (a.step > 0.0) opts.step = a.step;
  opts.curvature = a.curvature;
  opts.k_factor = a.k_factor;
  opts.max_invalid_fraction = a.max_invalid_fraction;
  opts.jobs = a.jobs;
  const FeatureTable table = build_feature_table(floor.kept, grids, opts);

  const fs::path dir(a.out_dir);
  ensure_dir(dir);
  save_table(table.rows, dir / "features.csv");

  std::ostringstream rej;
  rej << "stage,line,reason\n";
  auto quote = [](const std::string& s) {
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
  };
  for (const auto& r : ingest.rejects) rej << "ingest," << r.index << ',' << quote(r.reason) << '\n';
  for (const auto& r : table.rejects) {
    rej << "features," << floor.kept.at(r.index).source_line << ',' << quote(r.reason) << '\n';
  }
  detail::write_file(dir / "rejects.csv", rej.str());

  json stats;
  stats["n_measurements_read"] = n_read;
  stats["n_ingest_rejected"] = ingest.rejects.size();
  stats["n_below_noise_floor"] = floor.removed;
  stats["n_feature_rejected"] = table.rejects.size();
  stats["clamped_dsm_cells"] = clamped;
  stats["n_rows"] = table.rows.size();
  if (!table.rows.empty()) {
    const TableStats s = summarize_table(table.rows);
    stats["los_fraction"] = s.los_fraction;
    stats["terrain_depth_m"] = percentiles_json(s.terrain_depth);
    stats["clutter_depth_m"] = percentiles_json(s.clutter_depth);
    stats["obstacle_depth_m"] = percentiles_json(s.obstacle_depth);
    stats["path_loss_db"] = {{"min", s.pl_min}, {"median", s.pl_median}, {"max", s.pl_max}};
    stats["distance_m"] = {{"min", s.d_min}, {"median", s.d_median}, {"max", s.d_max}};
    stats["rows_per_city"] = s.rows_per_city;
  }
  detail::write_file(dir / "stats.json", stats.dump(2) + "\n");

  json config;
  config["measurements"] = a.measurements;
  config["grids"] = a.grids;
  config["step"] = a.step > 0.0 ? json(a.step) : json("half_cell");
  config["curvature"] = a.curvature;
  config["k_factor"] = a.k_factor;
  config["max_invalid_fraction"] = a.max_invalid_fraction;
  config["coordinates"] = a.latlon.empty() ? json("planar") : json({{"ref_lat", a.latlon[0]}, {"ref_lon", a.latlon[1]}});
  config["jobs"] = a.jobs;
  write_run_manifest(dir, "build-dataset", argv, config, inputs,
                     {"features.csv", "rejects.csv", "stats.json"});

  out << "rows: " << table.rows.size() << " (rejected " << ingest.rejects.size() + table.rejects.size()
      << ", below noise floor " << floor.removed << ")\n";
  out << "wrote " << (dir / "features.csv").string() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string features;
  std::string model = "logreg";
  int n_features = 3;
  std::uint64_t seed = 0;
  std::string out_dir;
  ModelFlags flags;
};

double rmse_of(const TrainedModel& model, const std::vector<FeatureRow>& rows) {
  const Eigen::VectorXd pred = predict(model, rows);
  double s = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double e = pred[static_cast<Eigen::Index>(i)] - rows[i].pl;
    s += e * e;
  }
  return std::sqrt(s / static_cast<double>(rows.size()));
}

int cmd_train(const TrainArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
  require_file(a.features, "feature table");
  const auto rows = load_table(a.features);
  const FeatureConfig config = *feature_config_from_int(a.n_features);
  const ModelSpec spec = make_spec(kModelNames.at(a.model), config, a.flags);

  std::ostringstream log;
  log << "model: " << model_kind_name(spec.kind) << '\n';
  log << "features: " << a.n_features << '\n';
  log << "seed: " << a.seed << '\n';
  log << "rows: " << rows.size() << '\n';
  log << "config: " << spec_json(spec).dump() << '\n';

  TrainedModel model;
  switch (spec.kind) {
    case ModelKind::LogReg: {
      const LogRegFit fit = logreg_fit(rows, config, spec.depth_floor);
      model = fit.model;
      static const char* names[] = {"A (log10 f)", "B (log10 d)"};
      const Eigen::VectorXd& k = fit.model.coeffs;
      for (Eigen::Index i = 0; i < k.size(); ++i) {
        std::string name;
        if (i < 2) {
          name = names[i];
        } else if (i + 1 == k.size()) {
          name = "intercept";
        } else if (config == FeatureConfig::Three) {
          name = "C (log10 o)";
        } else {
          name = i == 2 ? "C_t (log10 t)" : "C_c (log10 c)";
        }
        log << "coef " << name << ": " << detail::format_double(k[i]) << '\n';
      }
      log << "rank: " << fit.rank << '\n';
      log << "condition: " << detail::format_double(fit.condition) << '\n';
      if (fit.singular) log << "warning: " << fit.diagnostic << '\n';
      break;
    }
    case ModelKind::Gbt: {
      GbtParams params = spec.gbt;
      params.seed = a.seed;
      const GbtFit fit = gbt_fit(rows, config, params);
      model = fit.model;
      log << "trees: " << fit.model.trees.size() << '\n';
      log << "train_rmse_round_0: " << detail::format_double(fit.train_rmse.front()) << '\n';
      break;
    }
    case ModelKind::Fcn: {
      TrainSpec train = spec.fcn;
      train.seed = a.seed;
      const FcnFit fit = fcn_fit(rows, config, train);
      model = fit.model;
      log << "best_epoch: " << fit.best_epoch << '\n';
      for (std::size_t e = 0; e < fit.validation_mse.size(); ++e) {
        log << "epoch " << e + 1 << ": train_mse " << detail::format_double(fit.train_mse[e]) << " validation_mse "
            << detail::format_double(fit.validation_mse[e]) << '\n';
      }
      for (int j : fit.degenerate_features) log << "warning: feature " << j << " has zero variance\n";
      break;
    }
  }
  const double train_rmse = rmse_of(model, rows);
  log << "train_rmse_db: " << detail::format_double(train_rmse) << '\n';

  const fs::path dir(a.out_dir);
  ensure_dir(dir);
  save_model(model, dir / "model.txt");
  detail::write_file(dir / "train.log", log.str());

  json config_json = spec_json(spec);
  config_json["features_file"] = a.features;
  config_json["seed"] = a.seed;
  write_run_manifest(dir, "train", argv, config_json, {a.features}, {"model.txt", "train.log"});

  out << log.str();
  return kExitOk;
}

// ---------------------------------------------------------------------------
// holdout

struct HoldoutArgs {
  std::string features;
  std::vector<std::string> models{"logreg"};
  std::vector<int> n_features{2, 3, 4};
  std::size_t runs = 1;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  bool ofcom = false;
  double bin_width = 1.0;
  std::string out_dir;
  ModelFlags flags;
};

std::string slug(const EvalReport& r) {
  return std::string(model_kind_name(r.kind)) + "_" + std::to_string(dimension(r.config)) + "f";
}

std::string file_safe(const std::string& s) {
  std::string out;
  for (char ch : s) out += std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' ? ch : '_';
  return out;
}

int cmd_holdout(const HoldoutArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
  require_file(a.features, "feature table");
  const auto rows = load_table(a.features);

  HoldoutOptions opts;
  opts.n_runs = a.runs;
  opts.seed = a.seed;
  opts.jobs = a.jobs;
  opts.bin_width = a.bin_width;

  std::vector<EvalReport> reports;
  json specs = json::array();
  for (const auto& name : a.models) {
    for (int nf : a.n_features) {
      const ModelSpec spec = make_spec(kModelNames.at(name), *feature_config_from_int(nf), a.flags);
      specs.push_back(spec_json(spec));
      try {
        reports.push_back(run_holdout(rows, spec, opts));
      } catch (const Error& e) {
        throw Error(e.code(), name + " " + std::to_string(nf) + "f: " + e.detail());
      }
    }
  }

  const fs::path dir(a.out_dir);
  ensure_dir(dir);
  ReportOptions ropts;
  ropts.ofcom_reference = a.ofcom;
  const std::string table = render_report_table(reports, ropts);
  detail::write_file(dir / "report.txt", table);
  detail::write_file(dir / "report.csv", report_csv(reports));

  std::vector<std::string> outputs{"report.txt", "report.csv"};
  for (const auto& r : reports) {
    for (const auto& fold : r.folds) {
      const std::string stem = "hist_" + slug(r) + "_" + file_safe(fold.test_city);
      detail::write_file(dir / (stem + ".csv"), histogram_csv(fold.histogram));
      detail::write_file(dir / (stem + ".svg"),
                         histogram_svg(fold.histogram, report_label(r) + " errors, " + fold.test_city + " held out"));
      outputs.push_back(stem + ".csv");
      outputs.push_back(stem + ".svg");
    }
  }

  json config;
  config["features_file"] = a.features;
  config["models"] = specs;
  config["runs"] = a.runs;
  config["seed"] = a.seed;
  config["seed_rule"] = "seed + fold*1000 + run";
  config["jobs"] = a.jobs;
  config["ofcom_reference"] = a.ofcom;
  config["bin_width_db"] = a.bin_width;
  write_run_manifest(dir, "holdout", argv, config, {a.features}, outputs);

  out << table;
  return kExitOk;
}

// ---------------------------------------------------------------------------
// analyze-obstacle-loss

struct AnalyzeArgs {
  std::string model;
  std::vector<double> freqs{449.0, 3602.0};
  std::vector<double> dists{5000.0, 10000.0};
  double o_max = 1000.0;
  std::size_t points = 101;
  std::string split = "all_clutter";
  bool allow_flat = false;
  unsigned jobs = 1;
  std::string out_dir;
};

int cmd_analyze(const AnalyzeArgs& a, const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  require_file(a.model, "model file");
  const auto split = DepthSplit::parse(a.split);
  if (!split) throw ConfigError("--split must be all_clutter, all_terrain or ratio:<0..1>, got " + a.split);
  for (double f : a.freqs) {
    if (!(f > 0.0)) throw ConfigError("--freqs values must be positive");
  }
  for (double d : a.dists) {
    if (!(d > 0.0)) throw ConfigError("--dists values must be positive");
  }

  const TrainedModel model = load_model(a.model);
  if (!is_depth_sensitive(model)) {
    if (!a.allow_flat) {
      throw ConfigError("model " + a.model +
                        " has no depth features so every curve is flat; pass --allow-flat to sweep it anyway");
    }
    err << "warning: 2-feature model, curves are depth independent\n";
  }

  const auto curves = sweep_obstacle_loss(model, a.freqs, a.dists, a.o_max, a.points, *split, a.jobs);
  const auto ordering = check_frequency_ordering(curves);

  const fs::path dir(a.out_dir);
  ensure_dir(dir);
  detail::write_file(dir / "obstacle_loss.csv", curves_csv(curves));
  const std::string title = "Obstacle loss, " + std::string(model_kind_name(model_kind(model))) + " " +
                            std::to_string(dimension(model_config(model))) + "-feature";
  detail::write_file(dir / "obstacle_loss.svg", curves_svg(curves, title));

  json config;
  config["model_file"] = a.model;
  config["freqs_mhz"] = double_list(a.freqs);
  config["dists_m"] = double_list(a.dists);
  config["o_max_m"] = a.o_max;
  config["points"] = a.points;
  config["depth_split"] = split->name();
  config["allow_flat"] = a.allow_flat;
  config["jobs"] = a.jobs;
  config["frequency_ordering"] = ordering.pass ? "pass" : "warn";
  write_run_manifest(dir, "analyze-obstacle-loss", argv, config, {a.model}, {"obstacle_loss.csv", "obstacle_loss.svg"});

  out << "curves: " << curves.size() << ", points per curve: " << a.points << ", depth split: " << split->name()
      << '\n';
  out << "frequency ordering over o in [10, 1000] m: " << (ordering.pass ? "pass" : "warn") << '\n';
  for (const auto& v : ordering.violations) out << "  " << v << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// predict

struct PredictArgs {
  std::string model;
  double d = 0.0;
  double f = 0.0;
  double t = 0.0;
  double c = 0.0;
  std::optional<double> o;
};

int cmd_predict(const PredictArgs& a, std::ostream& out) {
  require_file(a.model, "model file");
  const TrainedModel model = load_model(a.model);
  FeatureRow row;
  row.d = a.d;
  row.f = a.f;
  row.t = a.t;
  row.c = a.c;
  row.o = a.o ? *a.o : a.t + a.c;
  if (model_config(model) == FeatureConfig::Four && a.o && std::abs(*a.o - (a.t + a.c)) > 1e-9) {
    throw ConfigError("--o disagrees with --t + --c for a 4-feature model");
  }
  const double pl = predict(model, row);
  const double free_space = fspl_db(a.f, a.d);
  out << "path_loss_db: " << format_fixed(pl, 4) << '\n';
  out << "fspl_db: " << format_fixed(free_space, 4) << '\n';
  out << "obstacle_loss_db: " << format_fixed(pl - free_space, 4) << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// profile

struct ProfileArgs {
  std::string dtm;
  std::string dsm;
  std::vector<double> tx;
  std::vector<double> rx;
  double tx_h = 10.0;
  double rx_h = 1.5;
  double step = 0.0;
  bool curvature = false;
  double k_factor = 4.0 / 3.0;
  std::string out;
};

int cmd_profile(const ProfileArgs& a, std::ostream& out) {
  require_file(a.dtm, "DTM grid");
  require_file(a.dsm, "DSM grid");
  const GridPair grids = GridPair::load(a.dtm, a.dsm);
  const Link link{a.tx[0], a.tx[1], a.rx[0], a.rx[1], a.tx_h, a.rx_h};
  PathProfile profile = extract_profile(grids, link, a.step > 0.0 ? std::optional<double>(a.step) : std::nullopt);
  if (a.curvature) profile = apply_earth_curvature(std::move(profile), a.k_factor);
  const std::string csv = profile_to_csv(profile);
  if (a.out.empty()) {
    out << csv;
    return kExitOk;
  }
  detail::write_file(a.out, csv);
  const DepthSummary depths = compute_depths(profile);
  out << "samples: " << profile.size() << " at step " << detail::format_double(profile.step) << " m\n";
  out << "d_3d_m: " << detail::format_double(profile.link_distance_3d) << '\n';
  out << "terrain_depth_m: " << detail::format_double(depths.terrain_depth) << '\n';
  out << "clutter_depth_m: " << detail::format_double(depths.clutter_depth) << '\n';
  out << "obstacle_depth_m: " << detail::format_double(depths.obstacle_depth) << '\n';
  out << "los: " << (depths.is_los ? "yes" : "no") << '\n';
  out << "invalid_fraction: " << detail::format_double(depths.invalid_fraction) << '\n';
  return kExitOk;
}

bool is_config_error(ErrorCode code) {
  return code == ErrorCode::MissingCityGrids || code == ErrorCode::UnknownModelKind ||
         code == ErrorCode::VersionMismatch;
}

}  // namespace

// ---------------------------------------------------------------------------

std::map<std::string, GridManifestEntry> parse_grid_manifest(const std::string& text, const fs::path& base_dir) {
  std::map<std::string, GridManifestEntry> entries;
  std::size_t line_no = 0;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto trimmed = detail::trim(line);
    if (trimmed.empty()) continue;
    const auto fields = detail::split(trimmed, ',');
    if (fields.size() != 3) {
      throw ConfigError("grids manifest line " + std::to_string(line_no) + ": expected city,dtm_path,dsm_path");
    }
    const std::string city(detail::trim(fields[0]));
    if (city.empty()) throw ConfigError("grids manifest line " + std::to_string(line_no) + ": empty city");
    if (entries.count(city)) {
      throw ConfigError("grids manifest line " + std::to_string(line_no) + ": duplicate city " + city);
    }
    auto resolve = [&](std::string_view p) {
      fs::path path{std::string(detail::trim(p))};
      return path.is_absolute() ? path : base_dir / path;
    };
    entries[city] = {resolve(fields[1]), resolve(fields[2])};
  }
  return entries;
}

std::string file_digest(const fs::path& path) {
  const std::string bytes = detail::read_file(path);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::IoFailure, "sha256 failed for " + path.string());
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xf];
  }
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Path-loss features from terrain and surface rasters"};
  app.name(args.empty() ? "pathdepth" : args.front());
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  const auto positive = CLI::PositiveNumber;
  const auto jobs_range = CLI::Range(1u, 256u);
  const auto model_names = CLI::IsMember({"logreg", "gbt", "fcn"});
  const auto feature_counts = CLI::IsMember({2, 3, 4});

  BuildArgs build;
  auto* c_build = app.add_subcommand("build-dataset", "Profile measurements against grids into a feature table");
  c_build->add_option("--measurements", build.measurements, "measurements CSV")->required();
  c_build->add_option("--grids", build.grids, "grids manifest (city,dtm_path,dsm_path)")->required();
  c_build->add_option("--out-dir", build.out_dir, "output directory")->required();
  c_build->add_option("--step", build.step, "profile step in m (default half a cell)")->check(positive);
  c_build->add_flag("--curvature", build.curvature, "apply effective-earth curvature");
  c_build->add_option("--k-factor", build.k_factor, "effective earth radius factor")
      ->check(positive)
      ->capture_default_str();
  c_build->add_option("--max-invalid-fraction", build.max_invalid_fraction, "reject profiles above this nodata share")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  c_build->add_option("--latlon", build.latlon, "coordinates are lat/lon; projection origin lat,lon")
      ->delimiter(',')
      ->expected(2);
  c_build->add_option("--jobs", build.jobs, "worker threads")->check(jobs_range)->capture_default_str();

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "Fit one model on a feature table");
  c_train->add_option("table", train.features, "features CSV")->required();
  c_train->add_option("--model", train.model, "logreg, gbt or fcn")->check(model_names)->capture_default_str();
  c_train->add_option("--features", train.n_features, "feature config 2, 3 or 4")
      ->check(feature_counts)
      ->capture_default_str();
  c_train->add_option("--seed", train.seed, "random seed")->envname("PATHDEPTH_SEED")->capture_default_str();
  c_train->add_option("--out-dir", train.out_dir, "output directory")->required();
  add_model_flags(c_train, train.flags);

  HoldoutArgs hold;
  auto* c_hold = app.add_subcommand("holdout", "City-holdout round robin");
  c_hold->add_option("table", hold.features, "features CSV")->required();
  c_hold->add_option("--model", hold.models, "model kinds, comma separated")
      ->delimiter(',')
      ->check(model_names)
      ->capture_default_str();
  c_hold->add_option("--features", hold.n_features, "feature configs, comma separated")
      ->delimiter(',')
      ->check(feature_counts)
      ->capture_default_str();
  c_hold->add_option("--runs", hold.runs, "training runs per fold")->check(positive)->capture_default_str();
  c_hold->add_option("--seed", hold.seed, "random seed")->envname("PATHDEPTH_SEED")->capture_default_str();
  c_hold->add_option("--jobs", hold.jobs, "worker threads")->check(jobs_range)->capture_default_str();
  c_hold->add_flag("--ofcom", hold.ofcom, "add the Ofcom drive-test reference values");
  c_hold->add_option("--bin-width", hold.bin_width, "histogram bin width in dB")
      ->check(positive)
      ->capture_default_str();
  c_hold->add_option("--out-dir", hold.out_dir, "output directory")->required();
  add_model_flags(c_hold, hold.flags);

  AnalyzeArgs an;
  auto* c_an = app.add_subcommand("analyze-obstacle-loss", "Sweep model minus free-space loss over depth");
  c_an->add_option("model", an.model, "model file")->required();
  c_an->add_option("--freqs", an.freqs, "frequencies in MHz")->delimiter(',')->capture_default_str();
  c_an->add_option("--dists", an.dists, "distances in m")->delimiter(',')->capture_default_str();
  c_an->add_option("--omax", an.o_max, "largest obstacle depth in m")->check(positive)->capture_default_str();
  c_an->add_option("--points", an.points, "samples per curve")->check(CLI::Range(2, 100000))->capture_default_str();
  c_an->add_option("--split", an.split, "depth split for 4-feature models")->capture_default_str();
  c_an->add_flag("--allow-flat", an.allow_flat, "sweep 2-feature models too");
  c_an->add_option("--jobs", an.jobs, "worker threads")->check(jobs_range)->capture_default_str();
  c_an->add_option("--out-dir", an.out_dir, "output directory")->required();

  PredictArgs pr;
  auto* c_pr = app.add_subcommand("predict", "Predict path loss for one link");
  c_pr->add_option("model", pr.model, "model file")->required();
  c_pr->add_option("--d", pr.d, "slant distance in m")->required()->check(positive);
  c_pr->add_option("--f", pr.f, "frequency in MHz")->required()->check(positive);
  c_pr->add_option("--t", pr.t, "terrain depth in m")->check(CLI::NonNegativeNumber);
  c_pr->add_option("--c", pr.c, "clutter depth in m")->check(CLI::NonNegativeNumber);
  c_pr->add_option("--o", pr.o, "total obstacle depth in m (default t + c)")->check(CLI::NonNegativeNumber);

  ProfileArgs pf;
  auto* c_pf = app.add_subcommand("profile", "Dump one path profile as CSV");
  c_pf->add_option("--dtm", pf.dtm, "terrain grid")->required();
  c_pf->add_option("--dsm", pf.dsm, "surface grid")->required();
  c_pf->add_option("--tx", pf.tx, "transmitter x,y")->delimiter(',')->expected(2)->required();
  c_pf->add_option("--rx", pf.rx, "receiver x,y")->delimiter(',')->expected(2)->required();
  c_pf->add_option("--tx-h", pf.tx_h, "transmitter height above ground")->capture_default_str();
  c_pf->add_option("--rx-h", pf.rx_h, "receiver height above ground")->capture_default_str();
  c_pf->add_option("--step", pf.step, "sample step in m (default half a cell)")->check(positive);
  c_pf->add_flag("--curvature", pf.curvature, "apply effective-earth curvature");
  c_pf->add_option("--k-factor", pf.k_factor, "effective earth radius factor")->check(positive);
  c_pf->add_option("--out", pf.out, "CSV path (default stdout)");

  std::vector<std::string> owned = args.empty() ? std::vector<std::string>{"pathdepth"} : args;
  std::vector<char*> argv;
  for (auto& s : owned) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*c_build) return cmd_build_dataset(build, owned, out);
    if (*c_train) return cmd_train(train, owned, out);
    if (*c_hold) return cmd_holdout(hold, owned, out);
    if (*c_an) return cmd_analyze(an, owned, out, err);
    if (*c_pr) return cmd_predict(pr, out);
    if (*c_pf) return cmd_profile(pf, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return is_config_error(e.code()) ? kExitUsage : kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace pathdepth::cli
