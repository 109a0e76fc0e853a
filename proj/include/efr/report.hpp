#pragma once

#include <string>
#include <vector>

namespace efr {

// Deterministic SVG chart of predicted extremiles against tau for one
// evaluation point. Same inputs always yield byte-identical markup.
std::string render_extremile_svg(const std::string& title,
                                 const std::vector<double>& taus,
                                 const std::vector<double>& values);

} // namespace efr
