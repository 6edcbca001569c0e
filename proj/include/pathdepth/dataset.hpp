#pragma once

#include "pathdepth/profile.hpp"
#include "pathdepth/raster.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace pathdepth {

inline constexpr std::string_view kPlanarMeasurementHeader =
    "city,tx_x,tx_y,rx_x,rx_y,tx_h_agl,rx_h_agl,freq_mhz,path_loss_db,above_noise_floor";
inline constexpr std::string_view kLatLonMeasurementHeader =
    "city,tx_lat,tx_lon,rx_lat,rx_lon,tx_h_agl,rx_h_agl,freq_mhz,path_loss_db,above_noise_floor";
inline constexpr std::string_view kFeatureTableHeader = "city,d_m,f_mhz,t_m,c_m,o_m,pl_db,is_los";

/// One drive-test sample with coordinates already in planar metres.
struct Measurement {
  std::string city;
  double tx_x = 0.0;
  double tx_y = 0.0;
  double rx_x = 0.0;
  double rx_y = 0.0;
  double tx_h_agl = 0.0;
  double rx_h_agl = 0.0;
  double freq_mhz = 0.0;
  double path_loss_db = 0.0;
  bool above_noise_floor = true;
  std::size_t source_line = 0;  // 1-based CSV line, 0 when not read from a file

  Link link() const { return {tx_x, tx_y, rx_x, rx_y, tx_h_agl, rx_h_agl}; }
};

struct RejectedRow {
  std::size_t index = 0;  // input line (ingest) or measurement index (feature build)
  std::string reason;
};

struct PlanarCoordinates {};
struct LatLonCoordinates {
  double ref_lat = 0.0;  // degrees
  double ref_lon = 0.0;
};
using CoordinateMode = std::variant<PlanarCoordinates, LatLonCoordinates>;

/// Equirectangular projection about the reference point, in metres.
std::pair<double, double> latlon_to_local(double lat, double lon, const LatLonCoordinates& ref);

struct IngestResult {
  std::vector<Measurement> measurements;
  std::vector<RejectedRow> rejects;
};

IngestResult ingest_measurements(std::string_view csv, const CoordinateMode& mode = PlanarCoordinates{});

struct NoiseFloorResult {
  std::vector<Measurement> kept;
  std::size_t removed = 0;
};

NoiseFloorResult filter_noise_floor(std::vector<Measurement> measurements);

enum class FeatureConfig { Two = 2, Three = 3, Four = 4 };

constexpr int dimension(FeatureConfig config) { return static_cast<int>(config); }
std::optional<FeatureConfig> feature_config_from_int(long long n);

struct FeatureRow {
  double d = 0.0;  // slant distance, m
  double f = 0.0;  // MHz
  double t = 0.0;  // terrain depth, m
  double c = 0.0;  // clutter depth, m
  double o = 0.0;  // t + c
  double pl = 0.0; // dB
  std::string city;
  bool is_los = true;
};

/// Model inputs for one row: [d, f], [d, f, o] or [d, f, t, c].
Eigen::VectorXd feature_vector(const FeatureRow& row, FeatureConfig config);
Eigen::MatrixXd feature_matrix(const std::vector<FeatureRow>& rows, FeatureConfig config);
Eigen::VectorXd target_vector(const std::vector<FeatureRow>& rows);

struct FeatureOptions {
  std::optional<double> step;  // default: half the cell size
  bool curvature = false;
  double k_factor = 4.0 / 3.0;
  double max_invalid_fraction = 0.05;
  unsigned jobs = 1;
};

struct FeatureTable {
  std::vector<FeatureRow> rows;
  std::vector<std::size_t> source_index;  // measurement index of each row
  std::vector<RejectedRow> rejects;
};

/// Profiles every measurement against its city's grids. Rows keep input
/// order for any job count.
FeatureTable build_feature_table(const std::vector<Measurement>& measurements,
                                 const std::map<std::string, GridPair>& grids_by_city,
                                 const FeatureOptions& options = {});

struct Percentiles {
  double p10 = 0.0;
  double p50 = 0.0;
  double p90 = 0.0;
};

struct TableStats {
  std::size_t n_rows = 0;
  double los_fraction = 0.0;
  Percentiles terrain_depth;
  Percentiles clutter_depth;
  Percentiles obstacle_depth;
  double pl_min = 0.0;
  double pl_median = 0.0;
  double pl_max = 0.0;
  double d_min = 0.0;
  double d_median = 0.0;
  double d_max = 0.0;
  std::map<std::string, std::size_t> rows_per_city;
};

/// Linear-interpolated percentile, q in [0, 100].
double percentile(std::vector<double> values, double q);
TableStats summarize_table(const std::vector<FeatureRow>& rows);

std::string table_to_csv(const std::vector<FeatureRow>& rows);
std::vector<FeatureRow> parse_table(std::string_view csv);
void save_table(const std::vector<FeatureRow>& rows, const std::filesystem::path& path);
std::vector<FeatureRow> load_table(const std::filesystem::path& path);

}  // namespace pathdepth
