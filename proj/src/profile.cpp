#include "pathdepth/profile.hpp"

#include "pathdepth/error.hpp"
#include "pathdepth/text_util.hpp"

#include <cmath>
#include <sstream>

namespace pathdepth {

double Link::horizontal_distance() const { return std::hypot(rx_x - tx_x, rx_y - tx_y); }

namespace {

double endpoint_terrain(const RasterGrid& dtm, double x, double y, const char* which) {
  const HeightSample h = sample_height(dtm, x, y);
  switch (h.status) {
    case SampleStatus::Value:
      return h.value;
    case SampleStatus::OutOfBounds:
      throw Error(ErrorCode::EndpointOutOfBounds, std::string(which) + " lies outside the grid extent");
    case SampleStatus::Nodata:
      break;
  }
  throw Error(ErrorCode::EndpointOnNodata, std::string(which) + " lies on a nodata terrain cell");
}

}  // namespace

PathProfile extract_profile(const GridPair& grids, const Link& link, std::optional<double> step) {
  const double dx = step.value_or(grids.dtm.cell_size() / 2.0);
  if (!(dx > 0.0) || !std::isfinite(dx)) {
    throw Error(ErrorCode::StepNonPositive, "profile step must be positive");
  }
  if (link.tx_h_agl < 0.0 || link.rx_h_agl < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "antenna heights must be non-negative");
  }
  const double distance = link.horizontal_distance();
  if (!(distance > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "transmitter and receiver coincide");
  }

  PathProfile p;
  p.step = dx;
  p.horizontal_distance = distance;
  p.tx_height = endpoint_terrain(grids.dtm, link.tx_x, link.tx_y, "transmitter") + link.tx_h_agl;
  p.rx_height = endpoint_terrain(grids.dtm, link.rx_x, link.rx_y, "receiver") + link.rx_h_agl;
  p.link_distance_3d = std::hypot(distance, p.tx_height - p.rx_height);

  // largest k with k * step < distance
  const auto n = static_cast<Eigen::Index>(std::max(0.0, std::ceil(distance / dx) - 1.0));
  p.s.resize(n);
  p.terrain_h.resize(n);
  p.surface_h.resize(n);
  p.valid.resize(n);

  const double ux = (link.rx_x - link.tx_x) / distance;
  const double uy = (link.rx_y - link.tx_y) / distance;
  for (Eigen::Index i = 0; i < n; ++i) {
    // s = k * step directly, no accumulated drift
    p.s(i) = dx * static_cast<double>(i + 1);
    const double x = link.tx_x + p.s(i) * ux;
    const double y = link.tx_y + p.s(i) * uy;
    const HeightSample t = sample_height(grids.dtm, x, y);
    const HeightSample c = sample_height(grids.dsm, x, y);
    p.valid(i) = t.ok() && c.ok();
    p.terrain_h(i) = t.ok() ? t.value : 0.0;
    p.surface_h(i) = p.valid(i) ? std::max(c.value, t.value) : p.terrain_h(i);
  }
  p.ray_h = p.tx_height + (p.rx_height - p.tx_height) * (p.s / distance);
  return p;
}

DepthSummary compute_depths(const PathProfile& profile) {
  if (profile.size() == 0) {
    throw Error(ErrorCode::EmptyProfile, "profile has no samples between the antennas");
  }
  const auto terrain_blocked = profile.valid && (profile.terrain_h > profile.ray_h);
  const auto clutter_blocked = profile.valid && !terrain_blocked && (profile.surface_h > profile.ray_h);

  DepthSummary d;
  d.terrain_depth = static_cast<double>(terrain_blocked.count()) * profile.step;
  d.clutter_depth = static_cast<double>(clutter_blocked.count()) * profile.step;
  d.obstacle_depth = d.terrain_depth + d.clutter_depth;
  d.is_los = d.obstacle_depth == 0.0;
  d.invalid_fraction =
      static_cast<double>((!profile.valid).count()) / static_cast<double>(profile.size());
  return d;
}

PathProfile apply_earth_curvature(PathProfile profile, double k_factor) {
  if (!(k_factor > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "k-factor must be positive");
  }
  const double D = profile.horizontal_distance;
  const Eigen::ArrayXd bulge = profile.s * (D - profile.s) / (2.0 * k_factor * kEarthRadius);
  profile.terrain_h -= bulge;
  profile.surface_h -= bulge;
  return profile;
}

std::string profile_to_csv(const PathProfile& profile) {
  std::ostringstream out;
  out << "s,terrain_h,surface_h,ray_h,valid\n";
  for (Eigen::Index i = 0; i < profile.size(); ++i) {
    out << detail::format_double(profile.s(i)) << ',' << detail::format_double(profile.terrain_h(i)) << ','
        << detail::format_double(profile.surface_h(i)) << ',' << detail::format_double(profile.ray_h(i)) << ','
        << (profile.valid(i) ? 1 : 0) << '\n';
  }
  return out.str();
}

}  // namespace pathdepth
