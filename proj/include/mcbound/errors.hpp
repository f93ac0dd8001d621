#pragma once

#include <stdexcept>
#include <string>

namespace mcb {

// Malformed input: wrong dimensions, out-of-range parameters, bad files.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The input is well-formed but the mathematics does not go through
// (non-unique stationary law, ill-conditioned eigenbasis, failed quadrature,
// invalid certificate, unreachable threshold).
class MathError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class QuadratureError : public MathError {
 public:
  using MathError::MathError;
};

}  // namespace mcb
