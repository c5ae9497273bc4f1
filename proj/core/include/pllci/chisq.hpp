#pragma once

#include <cstdint>

namespace pllci {

/// Reference chi-squared distribution with a positive number of degrees
/// of freedom.
class ChiSquaredDist {
 public:
  /// Throws std::domain_error when dof is 0.
  explicit ChiSquaredDist(std::uint64_t dof);

  std::uint64_t dof() const { return dof_; }
  /// ln P(X > stat).
  double log_sf(double stat) const;

 private:
  std::uint64_t dof_;
};

/// Natural log of the chi-squared upper tail, ln Q(dof/2, stat/2).
/// stat must be >= 0 and dof >= 1; dof == 0 throws std::domain_error.
double log_sf_chisq(double stat, std::uint64_t dof);

/// ln Q(a, x) for the regularized upper incomplete gamma function.
double log_gamma_q(double a, double x);

}  // namespace pllci
