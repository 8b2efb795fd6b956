#ifndef CSYNC_ERRORS_HPP
#define CSYNC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace csync {

// Precondition / contract violations (dimension mismatches, out-of-range
// arguments). Everything below derives from contract_error so callers can
// catch the whole family at once.
class contract_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class invalid_geometry_error : public contract_error {
 public:
  using contract_error::contract_error;
};

class singular_geometry_error : public contract_error {
 public:
  using contract_error::contract_error;
};

class degenerate_measurement_error : public contract_error {
 public:
  using contract_error::contract_error;
};

// Enumeration refused because the instance is too large.
class size_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class parse_error : public std::runtime_error {
 public:
  parse_error(const std::string& what, int line) : std::runtime_error(what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class validation_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace csync

#endif  // CSYNC_ERRORS_HPP
