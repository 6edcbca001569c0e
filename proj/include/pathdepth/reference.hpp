#pragma once

#include <array>
#include <string_view>

// Published figures for the Ofcom UK drive-test campaign. These are quoted
// constants for side-by-side display; nothing here is computed.
namespace pathdepth::reference {

struct CityBaseline {
  std::string_view city;
  double fspl_rmse_db;
  double p1812_rmse_db;
};

inline constexpr std::array<CityBaseline, 6> kCityBaselines = {{
    {"London", 45.7, 8.8},
    {"Merthyr", 43.5, 13.4},
    {"Nottingham", 40.5, 12.6},
    {"Southampton", 47.1, 9.5},
    {"Stevenage", 45.7, 12.3},
    {"Boston", 31.9, 11.4},
}};

inline constexpr double kMedianFsplRmseDb = 44.6;
inline constexpr double kMedianP1812RmseDb = 11.85;

struct LogRegCoefficients {
  int features;
  std::string_view names;
  std::array<double, 5> values;
  int count;
};

// London holdout, f in the reference study's (unstated) units.
inline constexpr std::array<LogRegCoefficients, 3> kLondonLogReg = {{
    {2, "A, B, C", {30.52, 31.08, -253.24, 0.0, 0.0}, 3},
    {3, "A, B, C, D", {18.32, 31.77, 11.03, -242.34, 0.0}, 4},
    {4, "A, B, C, D, E", {20.93, 31.76, 3.96, 8.50, -247.91}, 5},
}};

}  // namespace pathdepth::reference
