#pragma once

#include <string>
#include <string_view>

namespace tpinn {

// Shortest decimal that parses back to the same double.
std::string format_shortest(double v);
// %.17g: 17 significant digits, always round-trips.
std::string format_g17(double v);
// Fixed notation with the given number of decimals.
std::string format_fixed(double v, int decimals);
// Strict full-string parse; throws FormatError naming `what` on failure.
double parse_double(std::string_view text, std::string_view what);

}  // namespace tpinn
