#include "pathdepth/analysis.hpp"

#include "pathdepth/error.hpp"
#include "pathdepth/parallel.hpp"
#include "pathdepth/svg.hpp"
#include "pathdepth/text_util.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace pathdepth {

DepthSplit DepthSplit::ratio(double terrain_fraction) {
  if (!(terrain_fraction >= 0.0 && terrain_fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "terrain fraction must lie in [0, 1]");
  }
  return {Kind::Ratio, terrain_fraction};
}

std::optional<DepthSplit> DepthSplit::parse(std::string_view text) {
  const std::string t = detail::to_lower(detail::trim(text));
  if (t == "all_clutter") return all_clutter();
  if (t == "all_terrain") return all_terrain();
  if (t.rfind("ratio:", 0) == 0) {
    const auto r = detail::parse_double(std::string_view(t).substr(6));
    if (r && *r >= 0.0 && *r <= 1.0) return ratio(*r);
  }
  return std::nullopt;
}

std::pair<double, double> DepthSplit::apply(double o) const {
  switch (kind) {
    case Kind::AllClutter: return {0.0, o};
    case Kind::AllTerrain: return {o, 0.0};
    case Kind::Ratio: {
      const double t = terrain_fraction * o;
      return {t, o - t};
    }
  }
  return {0.0, o};
}

std::string DepthSplit::name() const {
  switch (kind) {
    case Kind::AllClutter: return "all_clutter";
    case Kind::AllTerrain: return "all_terrain";
    case Kind::Ratio: return "ratio:" + detail::format_double(terrain_fraction);
  }
  return "all_clutter";
}

bool is_depth_sensitive(const TrainedModel& model) { return model_config(model) != FeatureConfig::Two; }

double obstacle_loss(const TrainedModel& model, double f_mhz, double d_m, double o_m, const DepthSplit& split) {
  if (!(f_mhz > 0.0) || !(d_m > 0.0) || !(o_m >= 0.0)) {
    throw Error(ErrorCode::NonPositiveInput, "obstacle loss needs f > 0, d > 0 and o >= 0");
  }
  FeatureRow row;
  row.d = d_m;
  row.f = f_mhz;
  std::tie(row.t, row.c) = split.apply(o_m);
  row.o = o_m;
  return predict(model, row) - fspl_db(f_mhz, d_m);
}

std::vector<ObstacleLossCurve> sweep_obstacle_loss(const TrainedModel& model, const std::vector<double>& freqs,
                                                   const std::vector<double>& dists, double o_max,
                                                   std::size_t n_points, const DepthSplit& split, unsigned jobs) {
  if (n_points < 2) throw Error(ErrorCode::InvalidArgument, "a sweep needs at least 2 points");
  if (!(o_max > 0.0)) throw Error(ErrorCode::NonPositiveInput, "o_max must be positive");
  std::vector<ObstacleLossCurve> curves(freqs.size() * dists.size());
  parallel_for(curves.size(), jobs, [&](std::size_t k) {
    ObstacleLossCurve& curve = curves[k];
    curve.f = freqs[k / dists.size()];
    curve.d = dists[k % dists.size()];
    curve.split = split;
    curve.points.resize(n_points);
    for (std::size_t i = 0; i < n_points; ++i) {
      // endpoints land exactly on 0 and o_max
      const double o = i + 1 == n_points ? o_max
                                         : o_max * static_cast<double>(i) / static_cast<double>(n_points - 1);
      curve.points[i] = {o, obstacle_loss(model, curve.f, curve.d, o, split)};
    }
  });
  return curves;
}

FrequencyOrdering check_frequency_ordering(const std::vector<ObstacleLossCurve>& curves, double o_lo,
                                           double o_hi) {
  FrequencyOrdering result;
  for (const auto& low : curves) {
    for (const auto& high : curves) {
      if (!(high.f > low.f) || high.d != low.d || high.points.size() != low.points.size()) continue;
      for (std::size_t i = 0; i < low.points.size(); ++i) {
        const double o = low.points[i].o;
        if (o < o_lo || o > o_hi) continue;
        if (high.points[i].loss < low.points[i].loss) {
          char buf[160];
          std::snprintf(buf, sizeof(buf), "d=%g m, o=%g m: %g MHz loss %.2f dB < %g MHz loss %.2f dB", low.d, o,
                        high.f, high.points[i].loss, low.f, low.points[i].loss);
          result.violations.emplace_back(buf);
          result.pass = false;
          break;
        }
      }
    }
  }
  return result;
}

std::string curves_csv(const std::vector<ObstacleLossCurve>& curves) {
  std::ostringstream out;
  out << "f_mhz,d_m,o_m,obstacle_loss_db\n";
  for (const auto& c : curves) {
    for (const auto& p : c.points) {
      out << detail::format_double(c.f) << ',' << detail::format_double(c.d) << ',' << detail::format_double(p.o)
          << ',' << detail::format_double(p.loss) << '\n';
    }
  }
  return out.str();
}

std::string curves_svg(const std::vector<ObstacleLossCurve>& curves, const std::string& title) {
  std::vector<svg::Series> series;
  for (const auto& c : curves) {
    char label[64];
    std::snprintf(label, sizeof(label), "%g MHz, %g km", c.f, c.d / 1000.0);
    svg::Series s{label, {}};
    for (const auto& p : c.points) s.points.emplace_back(p.o, p.loss);
    series.push_back(std::move(s));
  }
  return svg::line_chart(title, "Total obstacle depth (m)", "Obstacle loss (dB)", series);
}

}  // namespace pathdepth
