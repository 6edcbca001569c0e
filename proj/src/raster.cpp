#include "pathdepth/raster.hpp"

#include "pathdepth/error.hpp"
#include "pathdepth/text_util.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace pathdepth {

namespace {

constexpr std::array<std::string_view, 6> kHeaderKeys = {"ncols",     "nrows",    "xllcorner",
                                                         "yllcorner", "cellsize", "nodata_value"};

constexpr char kBinaryMagic[4] = {'P', 'D', 'G', 'R'};
constexpr std::uint32_t kBinaryVersion = 1;
constexpr std::size_t kBinaryHeaderSize = 4 + 4 + 4 + 4 + 8 + 8 + 8 + 4;

void check_geometry(const GridGeometry& g) {
  if (g.ncols == 0 || g.nrows == 0) {
    throw Error(ErrorCode::MalformedHeader, "ncols and nrows must be positive");
  }
  if (!(g.cell_size > 0.0) || !std::isfinite(g.cell_size)) {
    throw Error(ErrorCode::MalformedHeader, "cellsize must be positive and finite");
  }
  if (!std::isfinite(g.x_origin) || !std::isfinite(g.y_origin)) {
    throw Error(ErrorCode::MalformedHeader, "origin must be finite");
  }
}

// Index of the cell holding offset u (in cell units) along one axis with n
// cells. Edges shared by two cells go to the lower index.
std::optional<std::size_t> axis_index(double u, std::size_t n) {
  if (!(u >= 0.0) || u > static_cast<double>(n)) return std::nullopt;
  const double c = std::ceil(u) - 1.0;
  return static_cast<std::size_t>(std::max(0.0, c));
}

template <typename T>
T read_le(const char* p) {
  T value;
  std::memcpy(&value, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    auto* bytes = reinterpret_cast<unsigned char*>(&value);
    std::reverse(bytes, bytes + sizeof(T));
  }
  return value;
}

template <typename T>
void write_le(std::string& out, T value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes, bytes + sizeof(T));
  }
  out.append(bytes, sizeof(T));
}

}  // namespace

RasterGrid::RasterGrid(GridGeometry geometry, double nodata_value, HeightArray values)
    : geometry_(geometry), nodata_(nodata_value), values_(std::move(values)) {
  check_geometry(geometry_);
  if (static_cast<std::size_t>(values_.rows()) != geometry_.nrows ||
      static_cast<std::size_t>(values_.cols()) != geometry_.ncols) {
    throw Error(ErrorCode::BodyShapeMismatch, "value array does not match ncols x nrows");
  }
  for (Eigen::Index i = 0; i < values_.size(); ++i) {
    const double v = values_.data()[i];
    if (v != nodata_ && !std::isfinite(v)) {
      throw Error(ErrorCode::NonFiniteCell, "cell " + std::to_string(i) + " is not finite");
    }
  }
}

std::optional<std::pair<std::size_t, std::size_t>> RasterGrid::cell_index(double x, double y) const {
  const double cs = geometry_.cell_size;
  const auto col = axis_index((x - geometry_.x_origin) / cs, geometry_.ncols);
  const double top = geometry_.y_origin + geometry_.height();
  const auto row = axis_index((top - y) / cs, geometry_.nrows);
  if (!col || !row) return std::nullopt;
  return std::make_pair(*row, *col);
}

std::pair<double, double> RasterGrid::cell_center(std::size_t row, std::size_t col) const {
  const double cs = geometry_.cell_size;
  const double x = geometry_.x_origin + (static_cast<double>(col) + 0.5) * cs;
  const double y = geometry_.y_origin + geometry_.height() - (static_cast<double>(row) + 0.5) * cs;
  return {x, y};
}

std::size_t RasterGrid::nodata_count() const {
  return static_cast<std::size_t>((values_ == nodata_).count());
}

std::optional<std::pair<double, double>> RasterGrid::value_range() const {
  std::optional<std::pair<double, double>> range;
  for (Eigen::Index i = 0; i < values_.size(); ++i) {
    const double v = values_.data()[i];
    if (v == nodata_) continue;
    if (!range) {
      range = {v, v};
    } else {
      range->first = std::min(range->first, v);
      range->second = std::max(range->second, v);
    }
  }
  return range;
}

HeightSample sample_height(const RasterGrid& grid, double x, double y) {
  const auto idx = grid.cell_index(x, y);
  if (!idx) return {SampleStatus::OutOfBounds, 0.0};
  const double v = grid.at(idx->first, idx->second);
  if (v == grid.nodata_value()) return {SampleStatus::Nodata, 0.0};
  return {SampleStatus::Value, v};
}

RasterGrid parse_ascii_grid(std::string_view text) {
  std::map<std::string, double> header;
  std::size_t pos = 0;
  for (int line_no = 0; line_no < 6; ++line_no) {
    if (pos >= text.size()) {
      throw Error(ErrorCode::MalformedHeader, "expected 6 header lines");
    }
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const auto fields = detail::split_whitespace(text.substr(pos, end - pos));
    pos = end + 1;
    if (fields.size() != 2) {
      throw Error(ErrorCode::MalformedHeader,
                  "header line " + std::to_string(line_no + 1) + " must be 'key value'");
    }
    const std::string key = detail::to_lower(fields[0]);
    if (std::find(kHeaderKeys.begin(), kHeaderKeys.end(), key) == kHeaderKeys.end()) {
      throw Error(ErrorCode::MalformedHeader, "unknown header key '" + std::string(fields[0]) + "'");
    }
    if (header.count(key)) {
      throw Error(ErrorCode::MalformedHeader, "duplicate header key '" + key + "'");
    }
    const auto value = detail::parse_double(fields[1]);
    if (!value) {
      throw Error(ErrorCode::MalformedHeader,
                  "non-numeric value for '" + key + "': " + std::string(fields[1]));
    }
    header[key] = *value;
  }
  for (auto key : kHeaderKeys) {
    if (!header.count(std::string(key))) {
      throw Error(ErrorCode::MalformedHeader, "missing header key '" + std::string(key) + "'");
    }
  }

  auto as_count = [&](const std::string& key) -> std::size_t {
    const double v = header[key];
    if (!(v >= 1.0) || v != std::floor(v) || v > 1e9) {
      throw Error(ErrorCode::MalformedHeader, key + " must be a positive integer");
    }
    return static_cast<std::size_t>(v);
  };

  GridGeometry geometry;
  geometry.ncols = as_count("ncols");
  geometry.nrows = as_count("nrows");
  geometry.x_origin = header["xllcorner"];
  geometry.y_origin = header["yllcorner"];
  geometry.cell_size = header["cellsize"];
  check_geometry(geometry);
  const double nodata = header["nodata_value"];

  const auto tokens = detail::split_whitespace(pos < text.size() ? text.substr(pos) : std::string_view{});
  const std::size_t expected = geometry.ncols * geometry.nrows;
  if (tokens.size() != expected) {
    throw Error(ErrorCode::BodyShapeMismatch, "expected " + std::to_string(expected) + " cells, found " +
                                                  std::to_string(tokens.size()));
  }
  HeightArray values(geometry.nrows, geometry.ncols);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto v = detail::parse_double(tokens[i]);
    if (!v || !std::isfinite(*v)) {
      throw Error(ErrorCode::NonFiniteCell, "cell " + std::to_string(i) + " ('" + std::string(tokens[i]) +
                                                "') is not a finite number");
    }
    values.data()[i] = *v;
  }
  return RasterGrid(geometry, nodata, std::move(values));
}

std::string to_ascii_grid(const RasterGrid& grid) {
  std::ostringstream out;
  out << "ncols " << grid.ncols() << '\n'
      << "nrows " << grid.nrows() << '\n'
      << "xllcorner " << detail::format_double(grid.x_origin()) << '\n'
      << "yllcorner " << detail::format_double(grid.y_origin()) << '\n'
      << "cellsize " << detail::format_double(grid.cell_size()) << '\n'
      << "NODATA_value " << detail::format_double(grid.nodata_value()) << '\n';
  for (std::size_t r = 0; r < grid.nrows(); ++r) {
    for (std::size_t c = 0; c < grid.ncols(); ++c) {
      if (c) out << ' ';
      out << detail::format_double(grid.at(r, c));
    }
    out << '\n';
  }
  return out.str();
}

RasterGrid parse_binary_grid(std::string_view bytes) {
  if (bytes.size() < kBinaryHeaderSize || std::memcmp(bytes.data(), kBinaryMagic, 4) != 0) {
    throw Error(ErrorCode::MalformedHeader, "missing PDGR binary grid header");
  }
  const char* p = bytes.data() + 4;
  const auto version = read_le<std::uint32_t>(p);
  if (version != kBinaryVersion) {
    throw Error(ErrorCode::MalformedHeader, "unsupported binary grid version " + std::to_string(version));
  }
  GridGeometry geometry;
  geometry.ncols = read_le<std::uint32_t>(p + 4);
  geometry.nrows = read_le<std::uint32_t>(p + 8);
  geometry.x_origin = read_le<double>(p + 12);
  geometry.y_origin = read_le<double>(p + 20);
  geometry.cell_size = read_le<double>(p + 28);
  const float nodata = read_le<float>(p + 36);
  check_geometry(geometry);

  const std::size_t count = geometry.ncols * geometry.nrows;
  if (bytes.size() != kBinaryHeaderSize + count * sizeof(float)) {
    throw Error(ErrorCode::BodyShapeMismatch, "binary body holds " +
                                                  std::to_string((bytes.size() - kBinaryHeaderSize) / 4) +
                                                  " values, expected " + std::to_string(count));
  }
  HeightArray values(geometry.nrows, geometry.ncols);
  const char* body = bytes.data() + kBinaryHeaderSize;
  for (std::size_t i = 0; i < count; ++i) {
    const float v = read_le<float>(body + 4 * i);
    if (v != nodata && !std::isfinite(v)) {
      throw Error(ErrorCode::NonFiniteCell, "cell " + std::to_string(i) + " is not finite");
    }
    values.data()[i] = static_cast<double>(v);
  }
  return RasterGrid(geometry, static_cast<double>(nodata), std::move(values));
}

std::string to_binary_grid(const RasterGrid& grid) {
  std::string out(kBinaryMagic, 4);
  write_le<std::uint32_t>(out, kBinaryVersion);
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(grid.ncols()));
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(grid.nrows()));
  write_le<double>(out, grid.x_origin());
  write_le<double>(out, grid.y_origin());
  write_le<double>(out, grid.cell_size());
  write_le<float>(out, static_cast<float>(grid.nodata_value()));
  const HeightArray& v = grid.values();
  for (Eigen::Index i = 0; i < v.size(); ++i) write_le<float>(out, static_cast<float>(v.data()[i]));
  return out;
}

RasterGrid load_grid(const std::filesystem::path& path) {
  const std::string bytes = detail::read_file(path);
  try {
    if (bytes.size() >= 4 && std::memcmp(bytes.data(), kBinaryMagic, 4) == 0) {
      return parse_binary_grid(bytes);
    }
    return parse_ascii_grid(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

void save_ascii_grid(const RasterGrid& grid, const std::filesystem::path& path) {
  detail::write_file(path, to_ascii_grid(grid));
}

void save_binary_grid(const RasterGrid& grid, const std::filesystem::path& path) {
  detail::write_file(path, to_binary_grid(grid));
}

GridPair GridPair::make(RasterGrid dtm, RasterGrid dsm) {
  const GridGeometry& a = dtm.geometry();
  const GridGeometry& b = dsm.geometry();
  auto mismatch = [](const char* field, auto x, auto y) {
    std::ostringstream msg;
    msg << "DTM/DSM " << field << " differ (" << x << " vs " << y << ")";
    throw Error(ErrorCode::GeometryMismatch, msg.str());
  };
  if (a.ncols != b.ncols) mismatch("ncols", a.ncols, b.ncols);
  if (a.nrows != b.nrows) mismatch("nrows", a.nrows, b.nrows);
  if (a.x_origin != b.x_origin) mismatch("xllcorner", a.x_origin, b.x_origin);
  if (a.y_origin != b.y_origin) mismatch("yllcorner", a.y_origin, b.y_origin);
  if (a.cell_size != b.cell_size) mismatch("cellsize", a.cell_size, b.cell_size);

  GridPair pair;
  HeightArray& surface = dsm.values_;
  const HeightArray& terrain = dtm.values();
  for (Eigen::Index i = 0; i < surface.size(); ++i) {
    const double t = terrain.data()[i];
    double& s = surface.data()[i];
    if (t == dtm.nodata_value() || s == dsm.nodata_value() || s >= t) continue;
    if (s < t - kClampTolerance) ++pair.clamped_cells;
    s = t;
  }
  pair.dtm = std::move(dtm);
  pair.dsm = std::move(dsm);
  return pair;
}

GridPair GridPair::load(const std::filesystem::path& dtm_path, const std::filesystem::path& dsm_path) {
  return make(load_grid(dtm_path), load_grid(dsm_path));
}

}  // namespace pathdepth
