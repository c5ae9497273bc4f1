#include "pllci/chisq.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace pllci {

namespace {

constexpr double kEps = 1e-17;
constexpr int kMaxTerms = 100000;

// ln of the prefactor x^a e^-x / Gamma(a).
double log_prefactor(double a, double x) {
  return a * std::log(x) - x - std::lgamma(a);
}

// ln P(a, x) by the power series; converges fast for x < a + 1.
double log_gamma_p_series(double a, double x) {
  double ap = a;
  double term = 1.0 / a;
  double sum = term;
  for (int n = 0; n < kMaxTerms; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kEps) break;
  }
  return log_prefactor(a, x) + std::log(sum);
}

// ln Q(a, x) by the Legendre continued fraction (modified Lentz); used for
// x >= a + 1.
double log_gamma_q_fraction(double a, double x) {
  constexpr double tiny = std::numeric_limits<double>::min() / kEps;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxTerms; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps * 4) break;
  }
  return log_prefactor(a, x) + std::log(h);
}

}  // namespace

double log_gamma_q(double a, double x) {
  if (!(a > 0.0)) throw std::domain_error("incomplete gamma needs a > 0");
  if (std::isnan(x) || x < 0.0) throw std::domain_error("incomplete gamma needs x >= 0");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return -std::numeric_limits<double>::infinity();
  if (x < a + 1.0) return std::log1p(-std::exp(log_gamma_p_series(a, x)));
  return log_gamma_q_fraction(a, x);
}

double log_sf_chisq(double stat, std::uint64_t dof) {
  if (dof == 0) throw std::domain_error("chi-squared tail with zero degrees of freedom");
  if (std::isnan(stat) || stat < 0.0) {
    throw std::domain_error("chi-squared statistic must be nonnegative");
  }
  return log_gamma_q(0.5 * static_cast<double>(dof), 0.5 * stat);
}

ChiSquaredDist::ChiSquaredDist(std::uint64_t dof) : dof_(dof) {
  if (dof_ == 0) throw std::domain_error("chi-squared distribution needs dof >= 1");
}

double ChiSquaredDist::log_sf(double stat) const { return log_sf_chisq(stat, dof_); }

}  // namespace pllci
