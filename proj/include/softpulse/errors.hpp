#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace softpulse {

// Requested cluster/qubit count exceeds the configured maximum.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Sequence text could not be tokenized; `position` is the byte offset of the
// offending character in the input.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, std::size_t position)
      : std::runtime_error(msg + " (at position " + std::to_string(position) + ")"),
        position(position) {}
  std::size_t position;
};

// Integration produced non-finite values, or a quadrature grid is too coarse.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A per-order residual fell between the zero and nonzero thresholds, so the
// refocusing order cannot be stated honestly.
class AmbiguousOrderError : public std::runtime_error {
 public:
  AmbiguousOrderError(const std::string& msg, int order, const std::string& cluster)
      : std::runtime_error(msg), order(order), cluster(cluster) {}
  int order;
  std::string cluster;
};

}  // namespace softpulse
