#pragma once

// File formats: hourly CSV inputs, trajectory CSV output, and atomic file
// replacement. Numeric fields are printed with %.12g so re-running a
// scenario reproduces byte-identical files.
//
// Hourly inputs are strict: a header row naming the value column, then
// exactly 24 rows for hours 0 through 23 in order. Parse errors carry the
// file name and line number.

#include <stdexcept>
#include <string>
#include <vector>

#include "hems/model.hpp"

namespace hems::io {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shortest representation with 12 significant digits.
std::string format_double(double v);

// Reads a two-column CSV "hour,<value_column>" covering hours 0..23.
std::vector<double> read_hourly_csv(const std::string& path,
                                    const std::string& value_column);

// Writes content to path via a temporary file in the same directory plus a
// rename, so readers never observe a partial file.
void atomic_write(const std::string& path, const std::string& content);

// Control trajectory with the resulting stored energy, one row per step.
// soc_after[t] is the stored energy at the end of step t; the hour column
// counts up from start_hour without wrapping.
std::string trajectory_csv(const DecisionTrajectory& x,
                           const std::vector<double>& soc_after,
                           int start_hour);

// Inverse of trajectory_csv; the soc column is parsed for validity but
// discarded, since it is recomputable from the controls.
DecisionTrajectory parse_trajectory_csv(const std::string& path,
                                        int* start_hour = nullptr);

} // namespace hems::io
