#pragma once

#include <stdexcept>
#include <string>

namespace qdlab {

// Invalid input: bad labels, out-of-domain parameters, shape mismatches.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numerical run went unhealthy (step underflow, trace drift, Fock leak).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qdlab
