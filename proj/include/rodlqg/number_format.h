#pragma once

#include <string>

namespace rodlqg {

/// Shortest decimal string that parses back to the same double; "nan",
/// "inf" and "-inf" for non-finite values.
std::string FormatShortest(double v);

/// Fixed number of significant digits, for human-readable tables.
std::string FormatSignificant(double v, int digits = 6);

}  // namespace rodlqg
