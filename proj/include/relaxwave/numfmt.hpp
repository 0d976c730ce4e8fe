#pragma once

#include <string>
#include <string_view>

namespace relaxwave {

// Shortest text that still round-trips a double exactly: %.17g.
std::string g17(double v);

// Parse a decimal number, accepting a comma as the decimal separator
// ("1,4433" == "1.4433"). Throws ValidationError on malformed input.
double parse_number(std::string_view text);

// Extended-precision variant for threshold-grade constants. Also accepts an
// exact ratio "p/q" so inputs like 13/3 don't lose bits before use.
long double parse_number_ld(std::string_view text);

} // namespace relaxwave
