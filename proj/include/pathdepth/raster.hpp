#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

namespace pathdepth {

using HeightArray = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class SampleStatus { Value, Nodata, OutOfBounds };

struct HeightSample {
  SampleStatus status = SampleStatus::OutOfBounds;
  double value = 0.0;

  bool ok() const noexcept { return status == SampleStatus::Value; }
};

struct GridGeometry {
  std::size_t ncols = 0;
  std::size_t nrows = 0;
  double x_origin = 0.0;  // lower-left corner
  double y_origin = 0.0;
  double cell_size = 1.0;

  double width() const noexcept { return static_cast<double>(ncols) * cell_size; }
  double height() const noexcept { return static_cast<double>(nrows) * cell_size; }
  bool operator==(const GridGeometry&) const = default;
};

/// Uniform elevation grid. Rows are stored north to south, as they appear in
/// the ASCII body; row 0 is the northernmost row.
class RasterGrid {
 public:
  RasterGrid() = default;
  RasterGrid(GridGeometry geometry, double nodata_value, HeightArray values);

  const GridGeometry& geometry() const noexcept { return geometry_; }
  std::size_t ncols() const noexcept { return geometry_.ncols; }
  std::size_t nrows() const noexcept { return geometry_.nrows; }
  double x_origin() const noexcept { return geometry_.x_origin; }
  double y_origin() const noexcept { return geometry_.y_origin; }
  double cell_size() const noexcept { return geometry_.cell_size; }
  double nodata_value() const noexcept { return nodata_; }

  const HeightArray& values() const noexcept { return values_; }
  double at(std::size_t row, std::size_t col) const { return values_(row, col); }
  bool is_nodata(std::size_t row, std::size_t col) const { return values_(row, col) == nodata_; }

  /// Storage (row, col) of the cell containing (x, y), or nullopt outside the
  /// extent. Points on a shared cell edge resolve to the smaller index.
  std::optional<std::pair<std::size_t, std::size_t>> cell_index(double x, double y) const;

  /// Planar coordinates of the centre of storage cell (row, col).
  std::pair<double, double> cell_center(std::size_t row, std::size_t col) const;

  std::size_t nodata_count() const;
  /// Min/max over non-nodata cells; nullopt when every cell is nodata.
  std::optional<std::pair<double, double>> value_range() const;

 private:
  friend struct GridPair;
  GridGeometry geometry_;
  double nodata_ = -9999.0;
  HeightArray values_;
};

HeightSample sample_height(const RasterGrid& grid, double x, double y);

RasterGrid parse_ascii_grid(std::string_view text);
std::string to_ascii_grid(const RasterGrid& grid);

RasterGrid parse_binary_grid(std::string_view bytes);
std::string to_binary_grid(const RasterGrid& grid);

/// Reads either format; the binary form is recognised by its magic bytes.
RasterGrid load_grid(const std::filesystem::path& path);
void save_ascii_grid(const RasterGrid& grid, const std::filesystem::path& path);
void save_binary_grid(const RasterGrid& grid, const std::filesystem::path& path);

/// Terrain and surface grids over identical geometry.
struct GridPair {
  static constexpr double kClampTolerance = 0.01;

  RasterGrid dtm;
  RasterGrid dsm;
  /// Cells where the surface sat more than kClampTolerance below terrain.
  std::size_t clamped_cells = 0;

  /// Validates geometry and lifts surface cells below terrain up to terrain.
  static GridPair make(RasterGrid dtm, RasterGrid dsm);
  static GridPair load(const std::filesystem::path& dtm_path, const std::filesystem::path& dsm_path);
};

}  // namespace pathdepth
