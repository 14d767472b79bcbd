#pragma once

#include <string>

namespace qlap {

// Shortest decimal text that round-trips to the same double.
std::string format_double(double v);

}  // namespace qlap
