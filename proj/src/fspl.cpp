#include "pathdepth/fspl.hpp"

#include "pathdepth/error.hpp"

namespace pathdepth {

double fspl_db(double f_mhz, double d_m) {
  if (!(f_mhz > 0.0) || !(d_m > 0.0)) {
    throw Error(ErrorCode::NonPositiveInput, "FSPL needs positive frequency and distance");
  }
  return 20.0 * std::log10(d_m) + 20.0 * std::log10(f_mhz) + fspl_offset_db();
}

}  // namespace pathdepth
