#pragma once

#include "pathdepth/models.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pathdepth {

/// How a total obstacle depth o is handed to a 4-feature model as (t, c).
struct DepthSplit {
  enum class Kind { AllClutter, AllTerrain, Ratio };
  Kind kind = Kind::AllClutter;
  double terrain_fraction = 0.0;  // used by Ratio

  static DepthSplit all_clutter() { return {Kind::AllClutter, 0.0}; }
  static DepthSplit all_terrain() { return {Kind::AllTerrain, 1.0}; }
  static DepthSplit ratio(double terrain_fraction);
  /// Accepts "all_clutter", "all_terrain" or "ratio:<terrain fraction>".
  static std::optional<DepthSplit> parse(std::string_view text);

  std::pair<double, double> apply(double o) const;  // (t, c)
  std::string name() const;
};

/// True when the model's predictions can depend on depth at all.
bool is_depth_sensitive(const TrainedModel& model);

/// Model path loss minus free-space path loss at (f, d, o).
double obstacle_loss(const TrainedModel& model, double f_mhz, double d_m, double o_m,
                     const DepthSplit& split = DepthSplit::all_clutter());

struct ObstacleLossPoint {
  double o = 0.0;
  double loss = 0.0;
};

struct ObstacleLossCurve {
  double f = 0.0;
  double d = 0.0;
  DepthSplit split;
  std::vector<ObstacleLossPoint> points;
};

/// One curve per (f, d) pair over a uniform depth grid [0, o_max].
std::vector<ObstacleLossCurve> sweep_obstacle_loss(const TrainedModel& model, const std::vector<double>& freqs,
                                                   const std::vector<double>& dists, double o_max,
                                                   std::size_t n_points,
                                                   const DepthSplit& split = DepthSplit::all_clutter(),
                                                   unsigned jobs = 1);

/// Pass/warn diagnostic: at equal distance, higher-frequency curves should
/// lie above lower-frequency ones over o in [o_lo, o_hi].
struct FrequencyOrdering {
  bool pass = true;
  std::vector<std::string> violations;
};

FrequencyOrdering check_frequency_ordering(const std::vector<ObstacleLossCurve>& curves, double o_lo = 10.0,
                                           double o_hi = 1000.0);

std::string curves_csv(const std::vector<ObstacleLossCurve>& curves);
std::string curves_svg(const std::vector<ObstacleLossCurve>& curves, const std::string& title);

}  // namespace pathdepth
