#pragma once

// Normalized Laurent-polynomial attenuation
//   alpha(rho) = rho^-1 + sum_{l=1..L} beta_l rho^-(l+1)

#include <cmath>
#include <string>
#include <vector>

#include "wavelock/errors.hpp"

namespace wavelock {

struct AttenuationModel {
  std::vector<double> coeffs;  // beta_1..beta_L

  int order() const { return static_cast<int>(coeffs.size()); }
};

namespace detail {
inline void require_positive_range(double rho, const char* what) {
  if (!(rho > 0.0) || !std::isfinite(rho))
    throw DomainError(std::string(what) + ": distance must be positive and finite");
}
}  // namespace detail

inline double evaluate(const AttenuationModel& model, double rho) {
  detail::require_positive_range(rho, "attenuation");
  const double inv = 1.0 / rho;
  // Horner in 1/rho: inv * (1 + inv*(b1 + inv*(b2 + ...)))
  double acc = 0.0;
  for (auto it = model.coeffs.rbegin(); it != model.coeffs.rend(); ++it) acc = inv * (*it + acc);
  return inv * (1.0 + acc);
}

/// Ground-truth law used by the simulator: rho^-1.25.
inline double true_model_eval(double rho) {
  detail::require_positive_range(rho, "true attenuation");
  return std::pow(rho, -1.25);
}

/// d alpha / d beta_l = rho^-(l+1), 1-based l.
inline double d_evaluate_d_beta(const AttenuationModel& model, double rho, int l) {
  if (l < 1 || l > model.order())
    throw std::out_of_range("d_evaluate_d_beta: coefficient index out of range");
  detail::require_positive_range(rho, "attenuation derivative");
  return std::pow(rho, -(l + 1));
}

}  // namespace wavelock
