#pragma once

#include <stdexcept>
#include <string>

namespace pspectral {

/// A numerical procedure failed to reach its tolerance (step-size underflow,
/// iteration cap, lost bracket).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pspectral
