#include "pathdepth/models.hpp"

#include "pathdepth/error.hpp"
#include "pathdepth/text_util.hpp"

#include <sstream>

namespace pathdepth {

std::string_view model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::LogReg: return "logreg";
    case ModelKind::Gbt: return "gbt";
    case ModelKind::Fcn: return "fcn";
  }
  return "unknown";
}

std::optional<ModelKind> model_kind_from_name(std::string_view name) {
  const std::string n = detail::to_lower(detail::trim(name));
  if (n == "logreg") return ModelKind::LogReg;
  if (n == "gbt") return ModelKind::Gbt;
  if (n == "fcn") return ModelKind::Fcn;
  return std::nullopt;
}

ModelKind model_kind(const TrainedModel& model) { return static_cast<ModelKind>(model.index()); }

FeatureConfig model_config(const TrainedModel& model) {
  return std::visit([](const auto& m) { return m.config; }, model);
}

double predict(const TrainedModel& model, const Eigen::Ref<const Eigen::VectorXd>& features) {
  if (!features.allFinite()) throw Error(ErrorCode::InvalidArgument, "features must be finite");
  switch (model_kind(model)) {
    case ModelKind::LogReg: return logreg_predict(std::get<LogRegModel>(model), features);
    case ModelKind::Gbt: return gbt_predict(std::get<GbtModel>(model), features);
    case ModelKind::Fcn: return fcn_predict(std::get<FcnModel>(model), features);
  }
  return 0.0;
}

double predict(const TrainedModel& model, const FeatureRow& row) {
  return predict(model, feature_vector(row, model_config(model)));
}

Eigen::VectorXd predict(const TrainedModel& model, const std::vector<FeatureRow>& rows) {
  if (const auto* fcn = std::get_if<FcnModel>(&model)) {
    return fcn_predict_rows(*fcn, feature_matrix(rows, fcn->config));
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Eigen::Index>(i)) = predict(model, rows[i]);
  return out;
}

TrainedModel fit_model(const std::vector<FeatureRow>& rows, const ModelSpec& spec, std::uint64_t seed) {
  switch (spec.kind) {
    case ModelKind::LogReg:
      return logreg_fit(rows, spec.config, spec.depth_floor).model;
    case ModelKind::Gbt: {
      GbtParams params = spec.gbt;
      params.seed = seed;
      return gbt_fit(rows, spec.config, params).model;
    }
    case ModelKind::Fcn: {
      TrainSpec train = spec.fcn;
      train.seed = seed;
      return fcn_fit(rows, spec.config, train).model;
    }
  }
  throw Error(ErrorCode::UnknownModelKind, "unsupported model kind");
}

// ---------------------------------------------------------------------------
// text serialization

namespace {

constexpr std::string_view kUnits = "f:MHz,d:m,depths:m";

class Writer {
 public:
  template <typename... Values>
  void line(std::string_view key, const Values&... values) {
    out_ << key << ':';
    (put(values), ...);
    out_ << '\n';
  }

  template <typename Derived>
  void array(std::string_view key, const Eigen::DenseBase<Derived>& values) {
    out_ << key << ':';
    for (Eigen::Index i = 0; i < values.size(); ++i) put(values(i));
    out_ << '\n';
  }

  std::string str() const { return out_.str(); }

 private:
  void put(double v) { out_ << ' ' << detail::format_double(v); }
  void put(int v) { out_ << ' ' << v; }
  void put(long long v) { out_ << ' ' << v; }
  void put(std::size_t v) { out_ << ' ' << v; }
  void put(std::string_view v) { out_ << ' ' << v; }

  std::ostringstream out_;
};

class Reader {
 public:
  explicit Reader(std::string_view text) {
    for (auto line : detail::split(text, '\n')) {
      line = detail::trim(line);
      if (!line.empty() && line.front() != '#') lines_.push_back(line);
    }
  }

  /// Values of the next line, which must carry `key`.
  std::vector<std::string_view> expect(std::string_view key) {
    if (pos_ >= lines_.size()) fail("file ends before '" + std::string(key) + "'");
    const std::string_view line = lines_[pos_++];
    const auto colon = line.find(':');
    if (colon == std::string_view::npos || detail::trim(line.substr(0, colon)) != key) {
      fail("expected '" + std::string(key) + "' at line '" + std::string(line.substr(0, 40)) + "'");
    }
    return detail::split_whitespace(line.substr(colon + 1));
  }

  std::string_view word(std::string_view key) {
    const auto v = expect(key);
    if (v.size() != 1) fail("'" + std::string(key) + "' takes one value");
    return v[0];
  }

  double number(std::string_view key) {
    const auto v = detail::parse_double(word(key));
    if (!v) fail("'" + std::string(key) + "' is not a number");
    return *v;
  }

  long long integer(std::string_view key, long long lo, long long hi) {
    const auto v = detail::parse_int(word(key));
    if (!v || *v < lo || *v > hi) fail("'" + std::string(key) + "' is out of range");
    return *v;
  }

  Eigen::VectorXd numbers(std::string_view key, Eigen::Index count) {
    const auto v = expect(key);
    if (static_cast<Eigen::Index>(v.size()) != count) {
      fail("'" + std::string(key) + "' needs " + std::to_string(count) + " values, found " +
           std::to_string(v.size()));
    }
    Eigen::VectorXd out(count);
    for (Eigen::Index i = 0; i < count; ++i) {
      const auto x = detail::parse_double(v[static_cast<std::size_t>(i)]);
      if (!x) fail("'" + std::string(key) + "' holds a non-numeric value");
      out(i) = *x;
    }
    return out;
  }

  /// The closing "end" line; without it the file was cut short.
  void finish() {
    if (pos_ >= lines_.size() || lines_[pos_] != "end") fail("file is truncated (no closing 'end' line)");
    if (++pos_ != lines_.size()) fail("unexpected trailing content");
  }

  [[noreturn]] static void fail(const std::string& msg) { throw Error(ErrorCode::ModelParse, msg); }

 private:
  std::vector<std::string_view> lines_;
  std::size_t pos_ = 0;
};

void write_model(Writer& w, const LogRegModel& m) {
  w.line("depth_floor", m.depth_floor);
  w.array("coeffs", m.coeffs);
}

void write_model(Writer& w, const GbtModel& m) {
  w.line("base_prediction", m.base_prediction);
  w.line("learning_rate", m.learning_rate);
  w.line("l2_lambda", m.l2_lambda);
  w.line("max_depth", m.max_depth);
  w.line("seed", static_cast<std::size_t>(m.seed));
  w.line("n_trees", m.trees.size());
  for (const auto& tree : m.trees) {
    w.line("tree", tree.nodes.size());
    for (const auto& n : tree.nodes) w.line("node", n.feature, n.threshold, n.left, n.right, n.value);
  }
}

void write_model(Writer& w, const FcnModel& m) {
  const auto& p = m.params;
  w.line("hidden_units", static_cast<long long>(p.hidden()));
  w.line("dropout_rate", m.dropout_rate);
  w.array("input_mean", m.input_mean);
  w.array("input_std", m.input_std);
  w.line("target_mean", m.target_mean);
  w.line("target_std", m.target_std);
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> w1 = p.w1;
  w.array("w1", w1.reshaped<Eigen::RowMajor>());
  w.array("b1", p.b1);
  w.array("w2", p.w2);
  w.line("b2", p.b2);
}

LogRegModel read_logreg(Reader& r, FeatureConfig config) {
  LogRegModel m;
  m.config = config;
  m.depth_floor = r.number("depth_floor");
  if (!(m.depth_floor > 0.0)) Reader::fail("depth_floor must be positive");
  m.coeffs = r.numbers("coeffs", dimension(config) + 1);
  return m;
}

GbtModel read_gbt(Reader& r, FeatureConfig config) {
  GbtModel m;
  m.config = config;
  m.base_prediction = r.number("base_prediction");
  m.learning_rate = r.number("learning_rate");
  m.l2_lambda = r.number("l2_lambda");
  m.max_depth = static_cast<int>(r.integer("max_depth", 0, 64));
  const auto seed = detail::parse_int(r.word("seed"));
  if (!seed) Reader::fail("seed is not an integer");
  m.seed = static_cast<std::uint64_t>(*seed);
  const auto n_trees = r.integer("n_trees", 0, 1'000'000);
  for (long long t = 0; t < n_trees; ++t) {
    GbtTree tree;
    const auto n_nodes = r.integer("tree", 1, 1 << 20);
    for (long long k = 0; k < n_nodes; ++k) {
      const Eigen::VectorXd v = r.numbers("node", 5);
      GbtNode node;
      node.feature = static_cast<int>(v(0));
      node.threshold = v(1);
      node.left = static_cast<int>(v(2));
      node.right = static_cast<int>(v(3));
      node.value = v(4);
      if (!node.is_leaf()) {
        const bool children_ok = node.left > k && node.left < n_nodes && node.right > k && node.right < n_nodes;
        if (node.feature >= dimension(config) || !children_ok) Reader::fail("tree node out of range");
      }
      tree.nodes.push_back(node);
    }
    m.trees.push_back(std::move(tree));
  }
  return m;
}

FcnModel read_fcn(Reader& r, FeatureConfig config) {
  FcnModel m;
  m.config = config;
  const Eigen::Index dim = dimension(config);
  const auto hidden = static_cast<Eigen::Index>(r.integer("hidden_units", 1, 1 << 16));
  m.dropout_rate = r.number("dropout_rate");
  m.input_mean = r.numbers("input_mean", dim);
  m.input_std = r.numbers("input_std", dim);
  if ((m.input_std.array() <= 0.0).any()) Reader::fail("input_std must be positive");
  m.target_mean = r.number("target_mean");
  m.target_std = r.number("target_std");
  const Eigen::VectorXd w1 = r.numbers("w1", hidden * dim);
  m.params.w1 = w1.reshaped<Eigen::RowMajor>(hidden, dim);
  m.params.b1 = r.numbers("b1", hidden);
  m.params.w2 = r.numbers("w2", hidden).transpose();
  m.params.b2 = r.number("b2");
  return m;
}

}  // namespace

std::string serialize_model(const TrainedModel& model) {
  Writer w;
  w.line("kind", model_kind_name(model_kind(model)));
  w.line("version", kModelFormatVersion);
  w.line("feature_config", dimension(model_config(model)));
  w.line("units", kUnits);
  std::visit([&](const auto& m) { write_model(w, m); }, model);
  return w.str() + "end\n";
}

TrainedModel parse_model(std::string_view text) {
  Reader r(text);
  const std::string_view kind_name = r.word("kind");
  const auto kind = model_kind_from_name(kind_name);
  if (!kind) throw Error(ErrorCode::UnknownModelKind, "unknown model kind '" + std::string(kind_name) + "'");
  const auto version = detail::parse_int(r.word("version"));
  if (!version) Reader::fail("version is not an integer");
  if (*version != kModelFormatVersion) {
    throw Error(ErrorCode::VersionMismatch, "model format version " + std::to_string(*version) +
                                                " is not supported (expected " +
                                                std::to_string(kModelFormatVersion) + ")");
  }
  const auto config = feature_config_from_int(r.integer("feature_config", 2, 4));
  if (r.word("units") != kUnits) Reader::fail("unsupported units; expected " + std::string(kUnits));

  TrainedModel model;
  switch (*kind) {
    case ModelKind::LogReg: model = read_logreg(r, *config); break;
    case ModelKind::Gbt: model = read_gbt(r, *config); break;
    case ModelKind::Fcn: model = read_fcn(r, *config); break;
  }
  r.finish();
  return model;
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  detail::write_file(path, serialize_model(model));
}

TrainedModel load_model(const std::filesystem::path& path) {
  try {
    return parse_model(detail::read_file(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::IoFailure) throw;
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

}  // namespace pathdepth
