#pragma once

#include <cmath>
#include <numbers>

namespace pathdepth {

inline constexpr double kSpeedOfLight = 299792458.0;

/// 20 log10(4 pi 1e6 / c): the FSPL offset for f in MHz and d in metres
/// (about -27.5522 dB).
template <typename Scalar = double>
Scalar fspl_offset_db() {
  using std::log10;
  return Scalar(20) * log10(Scalar(4) * Scalar(std::numbers::pi) * Scalar(1e6) / Scalar(kSpeedOfLight));
}

/// Free-space path loss in dB, f in MHz, d in metres. Throws NonPositiveInput.
double fspl_db(double f_mhz, double d_m);

}  // namespace pathdepth
