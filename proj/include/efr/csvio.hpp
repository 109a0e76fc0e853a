#pragma once

#include <string>
#include <vector>

#include "efr/grid.hpp"

namespace efr {

// Round-trip-exact float formatting (17 significant digits).
std::string format_full(double x);

// Curves CSV: header "id,<s_1>,...,<s_S>" where the abscissae live in the
// header itself; each row is an id followed by S values.
CurveSample read_curves(const std::string& path);
void write_curves(const std::string& path, const CurveSample& sample);

// Responses CSV: header "id,y". Returned values are aligned with sample.ids;
// every sample id must appear exactly once.
std::vector<double> read_responses(const std::string& path,
                                   const CurveSample& sample);
void write_responses(const std::string& path,
                     const std::vector<std::string>& ids,
                     const std::vector<double>& y);

} // namespace efr
