#include "pathdepth/dataset.hpp"

#include "pathdepth/error.hpp"
#include "pathdepth/parallel.hpp"
#include "pathdepth/text_util.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

namespace pathdepth {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

std::optional<bool> parse_flag(std::string_view text) {
  const std::string v = detail::to_lower(detail::trim(text));
  if (v == "1" || v == "true") return true;
  if (v == "0" || v == "false") return false;
  return std::nullopt;
}

std::string normalized_header(std::string_view line) {
  std::string out;
  for (auto field : detail::split(line, ',')) {
    if (!out.empty()) out += ',';
    out += detail::to_lower(detail::trim(field));
  }
  return out;
}

// Splits text into lines, dropping a trailing '\r' from each.
std::vector<std::string_view> lines_of(std::string_view text) {
  auto lines = detail::split(text, '\n');
  for (auto& l : lines) {
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
  }
  return lines;
}

bool is_blank(std::string_view line) { return detail::trim(line).empty(); }

}  // namespace

std::pair<double, double> latlon_to_local(double lat, double lon, const LatLonCoordinates& ref) {
  const double x = kEarthRadius * (lon - ref.ref_lon) * kDegToRad * std::cos(ref.ref_lat * kDegToRad);
  const double y = kEarthRadius * (lat - ref.ref_lat) * kDegToRad;
  return {x, y};
}

IngestResult ingest_measurements(std::string_view csv, const CoordinateMode& mode) {
  const auto lines = lines_of(csv);
  std::size_t header_line = 0;
  while (header_line < lines.size() && is_blank(lines[header_line])) ++header_line;
  if (header_line == lines.size()) {
    throw Error(ErrorCode::EmptyInput, "measurement CSV is empty");
  }
  const bool latlon = std::holds_alternative<LatLonCoordinates>(mode);
  const std::string_view expected = latlon ? kLatLonMeasurementHeader : kPlanarMeasurementHeader;
  if (normalized_header(lines[header_line]) != expected) {
    throw Error(ErrorCode::SchemaMismatch,
                "measurement header must be '" + std::string(expected) + "'");
  }

  IngestResult result;
  for (std::size_t li = header_line + 1; li < lines.size(); ++li) {
    if (is_blank(lines[li])) continue;
    const std::size_t line_no = li + 1;
    auto reject = [&](std::string reason) { result.rejects.push_back({line_no, std::move(reason)}); };

    const auto fields = detail::split(lines[li], ',');
    if (fields.size() != 10) {
      reject("expected 10 fields, found " + std::to_string(fields.size()));
      continue;
    }
    std::array<double, 8> num{};
    bool ok = true;
    for (std::size_t k = 0; k < 8; ++k) {
      const auto v = detail::parse_double(fields[k + 1]);
      if (!v || !std::isfinite(*v)) {
        reject("field " + std::to_string(k + 2) + " is not a finite number");
        ok = false;
        break;
      }
      num[k] = *v;
    }
    if (!ok) continue;
    const auto above = parse_flag(fields[9]);
    if (!above) {
      reject("above_noise_floor must be 0/1/true/false");
      continue;
    }

    Measurement m;
    m.city = std::string(detail::trim(fields[0]));
    if (latlon) {
      const auto& ref = std::get<LatLonCoordinates>(mode);
      std::tie(m.tx_x, m.tx_y) = latlon_to_local(num[0], num[1], ref);
      std::tie(m.rx_x, m.rx_y) = latlon_to_local(num[2], num[3], ref);
    } else {
      m.tx_x = num[0];
      m.tx_y = num[1];
      m.rx_x = num[2];
      m.rx_y = num[3];
    }
    m.tx_h_agl = num[4];
    m.rx_h_agl = num[5];
    m.freq_mhz = num[6];
    m.path_loss_db = num[7];
    m.above_noise_floor = *above;
    m.source_line = line_no;

    if (m.city.empty()) {
      reject("empty city label");
    } else if (!(m.freq_mhz > 0.0)) {
      reject("freq_mhz must be positive");
    } else if (m.tx_h_agl < 0.0 || m.rx_h_agl < 0.0) {
      reject("antenna heights must be non-negative");
    } else {
      result.measurements.push_back(std::move(m));
    }
  }
  if (result.measurements.empty() && result.rejects.empty()) {
    throw Error(ErrorCode::EmptyInput, "measurement CSV has a header but no rows");
  }
  return result;
}

NoiseFloorResult filter_noise_floor(std::vector<Measurement> measurements) {
  NoiseFloorResult out;
  const std::size_t before = measurements.size();
  std::erase_if(measurements, [](const Measurement& m) { return !m.above_noise_floor; });
  out.removed = before - measurements.size();
  out.kept = std::move(measurements);
  return out;
}

std::optional<FeatureConfig> feature_config_from_int(long long n) {
  switch (n) {
    case 2: return FeatureConfig::Two;
    case 3: return FeatureConfig::Three;
    case 4: return FeatureConfig::Four;
    default: return std::nullopt;
  }
}

Eigen::VectorXd feature_vector(const FeatureRow& row, FeatureConfig config) {
  switch (config) {
    case FeatureConfig::Two: return Eigen::Vector2d(row.d, row.f);
    case FeatureConfig::Three: return Eigen::Vector3d(row.d, row.f, row.o);
    case FeatureConfig::Four: return Eigen::Vector4d(row.d, row.f, row.t, row.c);
  }
  return {};
}

Eigen::MatrixXd feature_matrix(const std::vector<FeatureRow>& rows, FeatureConfig config) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), dimension(config));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = feature_vector(rows[i], config).transpose();
  }
  return x;
}

Eigen::VectorXd target_vector(const std::vector<FeatureRow>& rows) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) y(static_cast<Eigen::Index>(i)) = rows[i].pl;
  return y;
}

FeatureTable build_feature_table(const std::vector<Measurement>& measurements,
                                 const std::map<std::string, GridPair>& grids_by_city,
                                 const FeatureOptions& options) {
  std::set<std::string> missing;
  for (const auto& m : measurements) {
    if (!grids_by_city.count(m.city)) missing.insert(m.city);
  }
  if (!missing.empty()) {
    std::string names;
    for (const auto& c : missing) names += (names.empty() ? "" : ", ") + c;
    throw Error(ErrorCode::MissingCityGrids, "no grids for city: " + names);
  }

  struct Slot {
    std::optional<FeatureRow> row;
    std::string reason;
  };
  std::vector<Slot> slots(measurements.size());

  parallel_for(measurements.size(), options.jobs, [&](std::size_t i) {
    const Measurement& m = measurements[i];
    Slot& slot = slots[i];
    if (!std::isfinite(m.path_loss_db)) {
      slot.reason = "non-finite path loss";
      return;
    }
    try {
      PathProfile profile = extract_profile(grids_by_city.at(m.city), m.link(), options.step);
      if (options.curvature) profile = apply_earth_curvature(std::move(profile), options.k_factor);
      // links shorter than one step have no interior samples: nothing can obstruct them
      const DepthSummary depth = profile.size() > 0 ? compute_depths(profile) : DepthSummary{};
      if (depth.invalid_fraction > options.max_invalid_fraction) {
        slot.reason = "invalid sample fraction " + detail::format_double(depth.invalid_fraction) +
                      " exceeds " + detail::format_double(options.max_invalid_fraction);
        return;
      }
      FeatureRow row;
      row.d = profile.link_distance_3d;
      row.f = m.freq_mhz;
      row.t = depth.terrain_depth;
      row.c = depth.clutter_depth;
      row.o = depth.obstacle_depth;
      row.pl = m.path_loss_db;
      row.city = m.city;
      row.is_los = depth.is_los;
      slot.row = std::move(row);
    } catch (const Error& e) {
      slot.reason = e.what();
    }
  });

  FeatureTable table;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i].row) {
      table.rows.push_back(std::move(*slots[i].row));
      table.source_index.push_back(i);
    } else {
      table.rejects.push_back({i, std::move(slots[i].reason)});
    }
  }
  return table;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double pos = q / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + (values[hi] - values[lo]) * frac;
}

TableStats summarize_table(const std::vector<FeatureRow>& rows) {
  TableStats s;
  s.n_rows = rows.size();
  if (rows.empty()) return s;
  std::vector<double> t, c, o, pl, d;
  std::size_t los = 0;
  for (const auto& r : rows) {
    t.push_back(r.t);
    c.push_back(r.c);
    o.push_back(r.o);
    pl.push_back(r.pl);
    d.push_back(r.d);
    los += r.is_los ? 1 : 0;
    ++s.rows_per_city[r.city];
  }
  auto pct = [](const std::vector<double>& v) {
    return Percentiles{percentile(v, 10), percentile(v, 50), percentile(v, 90)};
  };
  s.los_fraction = static_cast<double>(los) / static_cast<double>(rows.size());
  s.terrain_depth = pct(t);
  s.clutter_depth = pct(c);
  s.obstacle_depth = pct(o);
  s.pl_min = *std::min_element(pl.begin(), pl.end());
  s.pl_max = *std::max_element(pl.begin(), pl.end());
  s.pl_median = percentile(pl, 50);
  s.d_min = *std::min_element(d.begin(), d.end());
  s.d_max = *std::max_element(d.begin(), d.end());
  s.d_median = percentile(d, 50);
  return s;
}

std::string table_to_csv(const std::vector<FeatureRow>& rows) {
  std::ostringstream out;
  out << kFeatureTableHeader << '\n';
  for (const auto& r : rows) {
    out << r.city << ',' << detail::format_double(r.d) << ',' << detail::format_double(r.f) << ','
        << detail::format_double(r.t) << ',' << detail::format_double(r.c) << ',' << detail::format_double(r.o)
        << ',' << detail::format_double(r.pl) << ',' << (r.is_los ? 1 : 0) << '\n';
  }
  return out.str();
}

std::vector<FeatureRow> parse_table(std::string_view csv) {
  const auto lines = lines_of(csv);
  std::size_t li = 0;
  while (li < lines.size() && is_blank(lines[li])) ++li;
  if (li == lines.size()) {
    throw Error(ErrorCode::SchemaMismatch, "feature table has no header row");
  }

  static constexpr std::array<std::string_view, 8> kColumns = {"city", "d_m",  "f_mhz", "t_m",
                                                               "c_m",  "o_m",  "pl_db", "is_los"};
  const auto header = detail::split(lines[li], ',');
  std::array<std::size_t, 8> col{};
  for (std::size_t k = 0; k < kColumns.size(); ++k) {
    const auto it = std::find_if(header.begin(), header.end(), [&](std::string_view h) {
      return detail::to_lower(detail::trim(h)) == kColumns[k];
    });
    if (it == header.end()) {
      throw Error(ErrorCode::SchemaMismatch, "feature table is missing column '" + std::string(kColumns[k]) + "'");
    }
    col[k] = static_cast<std::size_t>(it - header.begin());
  }

  std::vector<FeatureRow> rows;
  for (++li; li < lines.size(); ++li) {
    if (is_blank(lines[li])) continue;
    const std::string where = "feature table line " + std::to_string(li + 1);
    const auto fields = detail::split(lines[li], ',');
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::SchemaMismatch, where + ": expected " + std::to_string(header.size()) + " fields");
    }
    std::array<double, 6> num{};
    for (std::size_t k = 0; k < 6; ++k) {
      const auto v = detail::parse_double(fields[col[k + 1]]);
      if (!v || !std::isfinite(*v)) {
        throw Error(ErrorCode::SchemaMismatch, where + ": column '" + std::string(kColumns[k + 1]) +
                                                   "' is not a finite number");
      }
      num[k] = *v;
    }
    const auto los = parse_flag(fields[col[7]]);
    if (!los) throw Error(ErrorCode::SchemaMismatch, where + ": is_los must be 0/1");
    FeatureRow r;
    r.city = std::string(detail::trim(fields[col[0]]));
    r.d = num[0];
    r.f = num[1];
    r.t = num[2];
    r.c = num[3];
    r.o = num[4];
    r.pl = num[5];
    r.is_los = *los;
    if (r.city.empty() || !(r.d > 0.0) || !(r.f > 0.0) || r.t < 0.0 || r.c < 0.0) {
      throw Error(ErrorCode::SchemaMismatch, where + ": values out of range");
    }
    if (std::abs(r.o - (r.t + r.c)) > 1e-9 * std::max(1.0, r.o)) {
      throw Error(ErrorCode::SchemaMismatch, where + ": o_m differs from t_m + c_m");
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

void save_table(const std::vector<FeatureRow>& rows, const std::filesystem::path& path) {
  detail::write_file(path, table_to_csv(rows));
}

std::vector<FeatureRow> load_table(const std::filesystem::path& path) {
  return parse_table(detail::read_file(path));
}

}  // namespace pathdepth
