#pragma once

#include <cmath>
#include <string>

#include "fracppp/errors.hpp"

namespace fracppp {

/// Gamma function on (0, 2], the range needed for alpha * Gamma(alpha) with 0 < alpha <= 1.
inline double gamma_fn(double x) {
  if (!(x > 0.0) || x > 2.0) {
    throw DomainError("gamma_fn: argument must lie in (0, 2], got " + std::to_string(x));
  }
  return std::tgamma(x);
}

}  // namespace fracppp
