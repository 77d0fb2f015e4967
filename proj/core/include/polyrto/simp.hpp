#pragma once

#include <cmath>
#include <utility>
#include <vector>

namespace polyrto {

/// SIMP interpolation: stiffness multiplier ε + (1 − ε) ρ^p applied to the solid element stiffness.
struct SimpParams {
  double penal = 3.0;
  double eps = 1e-9;
  /// (iteration, penal) pairs, sorted by iteration; empty means fixed `penal`.
  std::vector<std::pair<int, double>> continuation;

  double modulus(double rho) const { return eps + (1.0 - eps) * std::pow(rho, penal); }
  double modulus_derivative(double rho) const { return penal * (1.0 - eps) * std::pow(rho, penal - 1.0); }

  /// Copy with `penal` taken from the continuation schedule at `iteration`.
  SimpParams at_iteration(int iteration) const {
    SimpParams s = *this;
    for (const auto& [it, p] : continuation)
      if (iteration >= it) s.penal = p;
    return s;
  }

  void validate() const;
};

}  // namespace polyrto
