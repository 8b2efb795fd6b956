#ifndef CSYNC_CSV_HPP
#define CSYNC_CSV_HPP

#include <charconv>
#include <string>

namespace csync {

/// Shortest round-trip decimal form, locale-independent ('.' decimal).
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace csync

#endif  // CSYNC_CSV_HPP
