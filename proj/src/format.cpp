#include "qlap/format.hpp"

#include <array>
#include <charconv>

namespace qlap {

std::string format_double(double v) {
  std::array<char, 64> buf;
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

}  // namespace qlap
