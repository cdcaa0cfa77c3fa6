#pragma once

#include <iosfwd>
#include <string>

#include "entpulse/gaussian.hpp"

namespace entpulse {

// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double value);

// Plain-text Gaussian state dump:
//   line 1: mode labels
//   line 2: mean vector (2N values)
//   lines 3..2N+2: covariance rows
// Fields are whitespace-separated; numbers use format_double.
void write_state(std::ostream& out, const GaussianState& state);
GaussianState read_state(std::istream& in);

}  // namespace entpulse
