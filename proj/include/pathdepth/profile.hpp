#pragma once

#include "pathdepth/raster.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>

namespace pathdepth {

/// Transmitter/receiver pair. Antenna heights are above local terrain.
struct Link {
  double tx_x = 0.0;
  double tx_y = 0.0;
  double rx_x = 0.0;
  double rx_y = 0.0;
  double tx_h_agl = 0.0;
  double rx_h_agl = 0.0;

  double horizontal_distance() const;
  Link reversed() const { return {rx_x, rx_y, tx_x, tx_y, rx_h_agl, tx_h_agl}; }
};

/// Heights sampled along the direct tx->rx segment, stored column-wise.
/// Samples sit at s = step, 2*step, ... strictly inside (0, horizontal_distance).
struct PathProfile {
  double step = 0.0;
  double horizontal_distance = 0.0;
  double link_distance_3d = 0.0;
  double tx_height = 0.0;  // absolute antenna heights
  double rx_height = 0.0;

  Eigen::ArrayXd s;
  Eigen::ArrayXd terrain_h;
  Eigen::ArrayXd surface_h;
  Eigen::ArrayXd ray_h;
  Eigen::Array<bool, Eigen::Dynamic, 1> valid;

  Eigen::Index size() const noexcept { return s.size(); }
};

struct DepthSummary {
  double terrain_depth = 0.0;   // t
  double clutter_depth = 0.0;   // c
  double obstacle_depth = 0.0;  // o = t + c
  bool is_los = true;
  double invalid_fraction = 0.0;
};

/// Extracts the profile. With no step given the step is half the cell size.
PathProfile extract_profile(const GridPair& grids, const Link& link, std::optional<double> step = std::nullopt);

DepthSummary compute_depths(const PathProfile& profile);

inline constexpr double kEarthRadius = 6371000.0;

/// Earth bulge s(D - s) / (2 k R) at distance s along a path of length D.
template <typename Scalar>
Scalar earth_bulge(Scalar s, Scalar path_length, Scalar k_factor) {
  return s * (path_length - s) / (Scalar(2) * k_factor * Scalar(kEarthRadius));
}

/// Lowers terrain and surface by the effective-earth bulge; the ray is left alone.
PathProfile apply_earth_curvature(PathProfile profile, double k_factor = 4.0 / 3.0);

/// CSV with columns s,terrain_h,surface_h,ray_h,valid.
std::string profile_to_csv(const PathProfile& profile);

}  // namespace pathdepth
