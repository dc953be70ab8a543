#pragma once

#include <stdexcept>
#include <string>

namespace secperc {

// Quadrature or optimizer failed to reach the requested accuracy.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace secperc
