#include "support.hpp"

#include "pathdepth/error.hpp"
#include "pathdepth/raster.hpp"
#include "pathdepth/text_util.hpp"

#include <doctest.h>

using namespace pathdepth;

namespace {

const char* kTwoByTwo =
    "ncols 2\n"
    "nrows 2\n"
    "xllcorner 0\n"
    "yllcorner 0\n"
    "cellsize 1\n"
    "NODATA_value -9999\n"
    "1 2\n"
    "3 4\n";

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("ascii grid parses header and body") {
  const RasterGrid g = parse_ascii_grid(kTwoByTwo);
  CHECK(g.ncols() == 2);
  CHECK(g.nrows() == 2);
  CHECK(g.cell_size() == 1.0);
  CHECK(g.at(0, 0) == 1.0);
  CHECK(g.at(0, 1) == 2.0);
  CHECK(g.at(1, 0) == 3.0);
  CHECK(g.at(1, 1) == 4.0);
}

TEST_CASE("ascii header keys are case-insensitive and order-free") {
  const RasterGrid g = parse_ascii_grid(
      "CELLSIZE 2\nNRows 1\nnodata_value -1\nNCOLS 3\nYLLCORNER 10\nxllcorner 5\n7 8 9\n");
  CHECK(g.ncols() == 3);
  CHECK(g.nrows() == 1);
  CHECK(g.x_origin() == 5.0);
  CHECK(g.y_origin() == 10.0);
  CHECK(g.cell_size() == 2.0);
  CHECK(g.nodata_value() == -1.0);
}

TEST_CASE("ascii grid errors") {
  CHECK(code_of([] {
          parse_ascii_grid("ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\nNODATA_value -9999\n1 2 3\n");
        }) == ErrorCode::BodyShapeMismatch);
  CHECK(code_of([] { parse_ascii_grid("ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 2\n3 4\n"); }) ==
        ErrorCode::MalformedHeader);
  CHECK(code_of([] {
          parse_ascii_grid("ncols 2\nncols 2\nxllcorner 0\nyllcorner 0\ncellsize 1\nNODATA_value 0\n1 2\n3 4\n");
        }) == ErrorCode::MalformedHeader);
  CHECK(code_of([] {
          parse_ascii_grid("ncols two\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\nNODATA_value 0\n1 2\n3 4\n");
        }) == ErrorCode::MalformedHeader);
  CHECK(code_of([] {
          parse_ascii_grid("ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 0\nNODATA_value 0\n1 2\n3 4\n");
        }) == ErrorCode::MalformedHeader);
  CHECK(code_of([] {
          parse_ascii_grid("ncols 2\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 1\nNODATA_value 0\n1 nan\n");
        }) == ErrorCode::NonFiniteCell);
}

TEST_CASE("nodata cell is excluded from statistics") {
  const RasterGrid g = parse_ascii_grid(
      "ncols 3\nnrows 3\nxllcorner 0\nyllcorner 0\ncellsize 1\nNODATA_value -9999\n"
      "5 6 7\n8 -9999 10\n11 12 13\n");
  CHECK(g.is_nodata(1, 1));
  CHECK(g.nodata_count() == 1);
  const auto range = g.value_range();
  REQUIRE(range);
  CHECK(range->first == 5.0);
  CHECK(range->second == 13.0);
  CHECK(sample_height(g, 1.5, 1.5).status == SampleStatus::Nodata);
}

TEST_CASE("sample_height follows north-to-south storage") {
  const RasterGrid g = parse_ascii_grid(kTwoByTwo);
  const HeightSample s = sample_height(g, 0.4, 0.4);
  REQUIRE(s.ok());
  CHECK(s.value == 3.0);
  CHECK(sample_height(g, 1.6, 1.6).value == 2.0);
  CHECK(sample_height(g, -5.0, 0.0).status == SampleStatus::OutOfBounds);
  CHECK(sample_height(g, 2.5, 1.0).status == SampleStatus::OutOfBounds);
}

TEST_CASE("cell edges resolve to the smaller index") {
  const RasterGrid g = parse_ascii_grid(kTwoByTwo);
  // x = 1 sits between columns 0 and 1
  CHECK(g.cell_index(1.0, 0.5)->second == 0);
  // y = 1 sits between storage rows 0 (north) and 1 (south)
  CHECK(g.cell_index(0.5, 1.0)->first == 0);
  CHECK(sample_height(g, 1.0, 1.0).value == 1.0);
  // outer edges stay inside
  CHECK(g.cell_index(0.0, 0.0).has_value());
  CHECK(g.cell_index(2.0, 2.0).has_value());
}

TEST_CASE("cell centres sample their own value on random grids") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t nc = 1 + rng.below(9);
    const std::size_t nr = 1 + rng.below(9);
    const double cs = rng.uniform(0.25, 30.0);
    const double x0 = rng.uniform(-1e5, 1e5);
    const double y0 = rng.uniform(-1e5, 1e5);
    HeightArray v(nr, nc);
    for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = rng.uniform(-50.0, 500.0);
    const RasterGrid g({nc, nr, x0, y0, cs}, -9999.0, v);
    for (std::size_t r = 0; r < nr; ++r) {
      for (std::size_t c = 0; c < nc; ++c) {
        const auto [x, y] = g.cell_center(r, c);
        const HeightSample s = sample_height(g, x, y);
        REQUIRE(s.ok());
        CHECK(s.value == v(r, c));
      }
    }
  }
}

TEST_CASE("ascii and binary round trips") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t nc = 1 + rng.below(12);
    const std::size_t nr = 1 + rng.below(12);
    HeightArray v(nr, nc);
    for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = rng.uniform(-100.0, 900.0);
    v(0, 0) = -9999.0;
    const RasterGrid g({nc, nr, rng.uniform(0, 5e5), rng.uniform(0, 5e5), rng.uniform(0.5, 5.0)}, -9999.0, v);

    const RasterGrid a = parse_ascii_grid(to_ascii_grid(g));
    CHECK(a.geometry() == g.geometry());
    CHECK(a.nodata_value() == g.nodata_value());
    CHECK((a.values() - g.values()).abs().maxCoeff() <= 1e-9);

    // float32 body: exact after one trip through float
    const RasterGrid b = parse_binary_grid(to_binary_grid(g));
    CHECK(b.geometry() == g.geometry());
    CHECK(b.is_nodata(0, 0));
    for (std::size_t r = 0; r < nr; ++r) {
      for (std::size_t c = 0; c < nc; ++c) {
        CHECK(b.at(r, c) == static_cast<double>(static_cast<float>(g.at(r, c))));
      }
    }
  }
}

TEST_CASE("binary grid layout") {
  HeightArray v(1, 2);
  v << 1.5, -2.0;
  const RasterGrid g({2, 1, 10.0, 20.0, 0.5}, -9999.0, v);
  const std::string bytes = to_binary_grid(g);
  CHECK(bytes.substr(0, 4) == "PDGR");
  CHECK(bytes.size() == 44 + 2 * 4);
  CHECK(code_of([&] { parse_binary_grid(bytes.substr(0, bytes.size() - 1)); }) == ErrorCode::BodyShapeMismatch);
  std::string bad_version = bytes;
  bad_version[4] = 2;
  CHECK(code_of([&] { parse_binary_grid(bad_version); }) == ErrorCode::MalformedHeader);
}

TEST_CASE("load_grid detects the format") {
  testing::TempDir dir("raster");
  const RasterGrid g = parse_ascii_grid(kTwoByTwo);
  save_ascii_grid(g, dir / "a.asc");
  save_binary_grid(g, dir / "b.pdg");
  CHECK(load_grid(dir / "a.asc").values().isApprox(g.values()));
  CHECK(load_grid(dir / "b.pdg").values().isApprox(g.values()));
  CHECK(code_of([&] { load_grid(dir / "missing.asc"); }) == ErrorCode::IoFailure);
}

TEST_CASE("grid pair rejects each mismatched geometry field") {
  const RasterGrid base = parse_ascii_grid(kTwoByTwo);
  const GridGeometry g = base.geometry();
  std::vector<GridGeometry> perturbed(5, g);
  perturbed[0].ncols = 3;
  perturbed[1].nrows = 3;
  perturbed[2].x_origin = 0.5;
  perturbed[3].y_origin = 0.5;
  perturbed[4].cell_size = 2.0;
  for (const auto& p : perturbed) {
    HeightArray v = HeightArray::Constant(static_cast<Eigen::Index>(p.nrows), static_cast<Eigen::Index>(p.ncols), 9.0);
    const RasterGrid other(p, -9999.0, v);
    CHECK(code_of([&] { GridPair::make(base, other); }) == ErrorCode::GeometryMismatch);
  }
}

TEST_CASE("surface below terrain is clamped and counted") {
  HeightArray t(1, 3), s(1, 3);
  t << 10, 10, 10;
  s << 9.995, 5, 12;
  const GridGeometry geo{3, 1, 0, 0, 1};
  const GridPair pair = GridPair::make(RasterGrid(geo, -9999, t), RasterGrid(geo, -9999, s));
  CHECK(pair.clamped_cells == 1);
  CHECK(pair.dsm.at(0, 0) == 10.0);
  CHECK(pair.dsm.at(0, 1) == 10.0);
  CHECK(pair.dsm.at(0, 2) == 12.0);
}

TEST_CASE("text helpers") {
  using namespace pathdepth::detail;
  CHECK(parse_double("+1.5").value() == 1.5);
  CHECK_FALSE(parse_double("1.5x").has_value());
  CHECK(parse_int("42").value() == 42);
  CHECK(format_double(0.1) == "0.1");
  CHECK(parse_double(format_double(1.0 / 3.0)).value() == 1.0 / 3.0);
  CHECK(split("a,b,,c", ',').size() == 4);
}
