#pragma once

// Fixtures and reference implementations shared by the test binaries. The
// oracles here are written against the definitions, not against the library
// code paths, so agreement between the two means something.

#include "pathdepth/dataset.hpp"
#include "pathdepth/fcn.hpp"
#include "pathdepth/random.hpp"
#include "pathdepth/raster.hpp"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace testing {

using namespace pathdepth;

// A grid whose cell (row, col) takes fn(x_center, y_center).
inline RasterGrid grid_from(std::size_t ncols, std::size_t nrows, double cell, double x0, double y0,
                            const std::function<double(double, double)>& fn, double nodata = -9999.0) {
  HeightArray v(nrows, ncols);
  for (std::size_t r = 0; r < nrows; ++r) {
    for (std::size_t c = 0; c < ncols; ++c) {
      const double x = x0 + (static_cast<double>(c) + 0.5) * cell;
      const double y = y0 + (static_cast<double>(nrows - r) - 0.5) * cell;
      v(r, c) = fn(x, y);
    }
  }
  return RasterGrid({ncols, nrows, x0, y0, cell}, nodata, v);
}

inline GridPair flat_pair(std::size_t n, double cell, double height = 0.0) {
  auto g = grid_from(n, n, cell, 0.0, 0.0, [&](double, double) { return height; });
  return GridPair::make(g, g);
}

// 100 x 3 one-metre strip along x; terrain and surface from x alone.
inline GridPair strip_pair(const std::function<double(double)>& terrain, const std::function<double(double)>& surface) {
  auto dtm = grid_from(100, 3, 1.0, 0.0, 0.0, [&](double x, double) { return terrain(x); });
  auto dsm = grid_from(100, 3, 1.0, 0.0, 0.0, [&](double x, double) { return surface(x); });
  return GridPair::make(dtm, dsm);
}

// Building 20 m tall over x in [40, 60) on flat ground.
inline GridPair building_fixture() {
  return strip_pair([](double) { return 0.0; }, [](double x) { return x >= 40.0 && x < 60.0 ? 20.0 : 0.0; });
}

// Hill 15 m over x in [40, 60) with canopy 5 m on top of it.
inline GridPair canopy_hill_fixture() {
  auto hill = [](double x) { return x >= 40.0 && x < 60.0 ? 15.0 : 0.0; };
  return strip_pair(hill, [=](double x) { return hill(x) + (x >= 40.0 && x < 60.0 ? 5.0 : 0.0); });
}

// ---------------------------------------------------------------------------
// exact depth oracle

struct ExactDepths {
  double terrain = 0.0;
  double clutter = 0.0;
  int terrain_runs = 0;
  int clutter_runs = 0;
};

// Walks the segment cell by cell. Inside a cell the heights are constant and
// the ray is a straight line, so the obstructed length is found in closed
// form. Nodata is not handled; generators must avoid it.
inline ExactDepths exact_depths(const RasterGrid& dtm, const RasterGrid& dsm, double x1, double y1, double h1_agl,
                                double x2, double y2, double h2_agl) {
  const auto& g = dtm.geometry();
  const double cs = g.cell_size;
  auto cell_of = [&](double x, double y) {
    long col = static_cast<long>(std::floor((x - g.x_origin) / cs));
    long row_from_bottom = static_cast<long>(std::floor((y - g.y_origin) / cs));
    col = std::clamp(col, 0L, static_cast<long>(g.ncols) - 1);
    row_from_bottom = std::clamp(row_from_bottom, 0L, static_cast<long>(g.nrows) - 1);
    return std::pair<std::size_t, std::size_t>(g.nrows - 1 - static_cast<std::size_t>(row_from_bottom),
                                               static_cast<std::size_t>(col));
  };
  const auto [r1, c1] = cell_of(x1, y1);
  const auto [r2, c2] = cell_of(x2, y2);
  const double ray1 = dtm.at(r1, c1) + h1_agl;
  const double ray2 = dtm.at(r2, c2) + h2_agl;
  const double dx = x2 - x1;
  const double dy = y2 - y1;
  const double length = std::hypot(dx, dy);

  std::vector<double> cuts{0.0, 1.0};
  auto add_cuts = [&](double a, double d, double origin) {
    if (d == 0.0) return;
    const double lo = std::min(a, a + d);
    const double hi = std::max(a, a + d);
    for (double k = std::ceil((lo - origin) / cs); origin + k * cs <= hi; k += 1.0) {
      const double u = (origin + k * cs - a) / d;
      if (u > 0.0 && u < 1.0) cuts.push_back(u);
    }
  };
  add_cuts(x1, dx, g.x_origin);
  add_cuts(y1, dy, g.y_origin);
  std::sort(cuts.begin(), cuts.end());

  // Length of the part of [ua, ub] where lo <= ray < hi.
  auto band = [&](double ua, double ub, double lo, double hi) {
    const double ra = ray1 + (ray2 - ray1) * ua;
    const double rb = ray1 + (ray2 - ray1) * ub;
    if (ra == rb) return ra >= lo && ra < hi ? (ub - ua) * length : 0.0;
    // ray(u) is monotone; find u where it crosses lo and hi
    auto at = [&](double h) { return ua + (h - ra) / (rb - ra) * (ub - ua); };
    double a = at(lo);
    double b = at(hi);
    if (a > b) std::swap(a, b);
    a = std::max(a, ua);
    b = std::min(b, ub);
    return b > a ? (b - a) * length : 0.0;
  };

  ExactDepths out;
  bool in_t = false;
  bool in_c = false;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double ua = cuts[i];
    const double ub = cuts[i + 1];
    if (ub <= ua) continue;
    const double um = 0.5 * (ua + ub);
    const auto [r, c] = cell_of(x1 + dx * um, y1 + dy * um);
    const double t = dtm.at(r, c);
    const double s = std::max(dsm.at(r, c), t);
    const double lt = band(ua, ub, -INFINITY, t);
    const double lc = band(ua, ub, t, s);
    out.terrain += lt;
    out.clutter += lc;
    // a run carries over a cell edge only when the ray is still inside the
    // band at the start of this interval
    const double ra = ray1 + (ray2 - ray1) * ua;
    const double rb = ray1 + (ray2 - ray1) * ub;
    const bool t_here = lt > 0.0;
    const bool c_here = lc > 0.0;
    if (t_here && !(in_t && ra < t)) ++out.terrain_runs;
    if (c_here && !(in_c && ra >= t && ra < s)) ++out.clutter_runs;
    in_t = t_here && rb <= t;
    in_c = c_here && rb >= t && rb <= s;
  }
  return out;
}

// ---------------------------------------------------------------------------
// least squares by normal equations, solved by Gaussian elimination with
// partial pivoting in long double

inline std::vector<double> normal_equations(const std::vector<std::vector<double>>& design, const std::vector<double>& y) {
  const std::size_t p = design.front().size();
  std::vector<std::vector<long double>> a(p, std::vector<long double>(p + 1, 0.0L));
  for (std::size_t i = 0; i < design.size(); ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      for (std::size_t k = 0; k < p; ++k) a[j][k] += static_cast<long double>(design[i][j]) * design[i][k];
      a[j][p] += static_cast<long double>(design[i][j]) * y[i];
    }
  }
  for (std::size_t col = 0; col < p; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < p; ++r) {
      if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
    }
    std::swap(a[col], a[piv]);
    for (std::size_t r = 0; r < p; ++r) {
      if (r == col) continue;
      const long double m = a[r][col] / a[col][col];
      for (std::size_t k = col; k <= p; ++k) a[r][k] -= m * a[col][k];
    }
  }
  std::vector<double> beta(p);
  for (std::size_t j = 0; j < p; ++j) beta[j] = static_cast<double>(a[j][p] / a[j][j]);
  return beta;
}

// Design row in the documented order: log10 f, log10 d, floored log10 depths, 1.
inline std::vector<double> logreg_row(const FeatureRow& r, FeatureConfig config, double floor = 1.0) {
  std::vector<double> row{std::log10(r.f), std::log10(r.d)};
  if (config == FeatureConfig::Three) row.push_back(std::log10(std::max(r.o, floor)));
  if (config == FeatureConfig::Four) {
    row.push_back(std::log10(std::max(r.t, floor)));
    row.push_back(std::log10(std::max(r.c, floor)));
  }
  row.push_back(1.0);
  return row;
}

// ---------------------------------------------------------------------------
// synthetic drive-test rows

struct SyntheticSpec {
  double a = 20.0;  // log10 f
  double b = 25.0;  // log10 d
  double c = 10.0;  // log10 max(o, 1)
  double intercept = 30.0;
  double noise_db = 0.0;
};

// Depths: a third terrain only, a third clutter only, a third mixed; about
// 10% line of sight. Ground truth depends on o only.
inline std::vector<FeatureRow> synthetic_rows(std::size_t n, const std::vector<std::string>& cities,
                                              const SyntheticSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<FeatureRow> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    FeatureRow& r = rows[i];
    r.city = cities[i % cities.size()];
    r.d = std::pow(10.0, rng.uniform(2.5, 4.5));
    r.f = std::pow(10.0, rng.uniform(std::log10(400.0), std::log10(4000.0)));
    if (rng.uniform() < 0.1) {
      r.t = r.c = 0.0;
    } else {
      const double o = std::pow(10.0, rng.uniform(0.0, 3.0));
      const double kind = rng.uniform();
      const double share = kind < 1.0 / 3.0 ? 1.0 : kind < 2.0 / 3.0 ? 0.0 : rng.uniform();
      r.t = o * share;
      r.c = o - r.t;
    }
    r.o = r.t + r.c;
    r.is_los = r.o == 0.0;
    r.pl = spec.a * std::log10(r.f) + spec.b * std::log10(r.d) + spec.c * std::log10(std::max(r.o, 1.0)) +
           spec.intercept + spec.noise_db * rng.normal();
  }
  return rows;
}

// ---------------------------------------------------------------------------
// network oracle: loops only, no Eigen expressions

inline double fcn_loop_eval(const FcnParameters<double>& p, const std::vector<double>& x) {
  double out = p.b2;
  for (Eigen::Index h = 0; h < p.hidden(); ++h) {
    double z = p.b1(h);
    for (Eigen::Index j = 0; j < p.inputs(); ++j) z += p.w1(h, j) * x[static_cast<std::size_t>(j)];
    if (z > 0.0) out += p.w2(h) * z;
  }
  return out;
}

// Flatten/unflatten in the order w1 (column-major), b1, w2, b2.
inline std::vector<double*> fcn_slots(FcnParameters<double>& p) {
  std::vector<double*> slots;
  for (Eigen::Index i = 0; i < p.w1.size(); ++i) slots.push_back(p.w1.data() + i);
  for (Eigen::Index i = 0; i < p.b1.size(); ++i) slots.push_back(p.b1.data() + i);
  for (Eigen::Index i = 0; i < p.w2.size(); ++i) slots.push_back(p.w2.data() + i);
  slots.push_back(&p.b2);
  return slots;
}

inline double fcn_mse(const FcnParameters<double>& p, const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index j = 0; j < x.cols(); ++j) row[static_cast<std::size_t>(j)] = x(i, j);
    const double e = fcn_loop_eval(p, row) - y(i);
    s += e * e;
  }
  return s / static_cast<double>(x.rows());
}

// ---------------------------------------------------------------------------

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("pathdepth_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::filesystem::path operator/(const std::string& name) const { return path / name; }
};

}  // namespace testing
