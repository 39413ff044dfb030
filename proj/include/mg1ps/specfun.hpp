#pragma once

#include <cmath>
#include <span>
#include <stdexcept>

#include "mg1ps/numeric.hpp"

namespace mg1ps {

/// Gamma function for positive argument.
inline double gamma_fn(double x) {
  if (!(x > 0.0)) {
    if (x <= 0.0 && x == std::floor(x))
      throw std::domain_error("gamma_fn: pole at nonpositive integer");
    throw std::domain_error("gamma_fn: requires x > 0");
  }
  return std::tgamma(x);
}

inline double erfc(double z) { return std::erfc(z); }

/// Scaled complementary error function exp(x^2) erfc(x), x >= 0.
inline double erfcx(double x) {
  if (x < 25.0) return std::exp(x * x) * std::erfc(x);
  // asymptotic 1/(x sqrt(pi)) (1 - 1/(2x^2) + 3/(4x^4) - 15/(8x^6) + ...)
  double ix2 = 1.0 / (x * x);
  double s = 1.0 + ix2 * (-0.5 + ix2 * (0.75 + ix2 * (-1.875 + ix2 * 6.5625)));
  return s / (x * std::sqrt(M_PI));
}

/// Generalized hypergeometric 0Fk([]; b1..bk; z) by direct series.
/// Entire in z; terminates when the term drops below 1e-15 of the sum.
inline double hyper_0Fk(std::span<const double> lower, double z) {
  for (double b : lower)
    if (b <= 0.0 && b == std::floor(b))
      throw std::domain_error("hyper_0Fk: nonpositive integer lower parameter");
  double term = 1.0, sum = 1.0;
  for (long m = 0; m < 1000000; ++m) {
    double den = static_cast<double>(m + 1);
    for (double b : lower) den *= (b + static_cast<double>(m));
    term *= z / den;
    sum += term;
    if (std::abs(term) < 1e-15 * std::abs(sum) && m > 2) return sum;
  }
  throw std::runtime_error("hyper_0Fk: series did not converge in 1e6 terms");
}

namespace detail {

// D_{-m}(z) = e^{-z^2/4}/Gamma(m) * int_0^inf t^{m-1} e^{-t^2/2 - z t} dt, m>=1
inline double pcf_integral(int m, double z) {
  double lg = std::lgamma(static_cast<double>(m));
  auto f = [&](double t) {
    if (t <= 0.0) return 0.0;
    double lnv = (m - 1) * std::log(t) - 0.5 * t * t - z * t - lg;
    return std::exp(lnv);
  };
  double val = integrate_half_line<double>(f, 0.0, 1e-300, 1e-12);
  return std::exp(-0.25 * z * z) * val;
}

}  // namespace detail

/// Parabolic cylinder function D_nu(z) for integer orders 0, -1, ..., -60.
/// D_0, D_{-1} are closed forms; deeper orders use the descending three-term
/// recurrence, switching to the integral representation when cancellation
/// would exceed 1e-6 relative.
inline double pcf_D(int order, double z) {
  if (order > 0 || order < -60)
    throw std::domain_error("pcf_D: order must be in [-60, 0]");
  if (z < -50.0) throw std::overflow_error("pcf_D: exp(z^2/4) overflow range");
  double d0 = std::exp(-0.25 * z * z);
  if (order == 0) return d0;
  // D_{-1}(z) = sqrt(pi/2) e^{z^2/4} erfc(z/sqrt 2) = sqrt(pi/2) e^{-z^2/4} erfcx(z/sqrt 2)
  double dm1;
  if (z >= 0.0)
    dm1 = std::sqrt(M_PI / 2.0) * d0 * erfcx(z / std::sqrt(2.0));
  else
    dm1 = std::sqrt(M_PI / 2.0) * std::exp(0.25 * z * z) *
          std::erfc(z / std::sqrt(2.0));
  if (order == -1) return dm1;
  // descend: D_{-l-1} = (D_{-l+1} - z D_{-l}) / l
  double prev = d0, cur = dm1;
  double eprev = 1e-16 * std::abs(prev), ecur = 1e-16 * std::abs(cur);
  for (int l = 1; l <= -order - 1; ++l) {
    double next = (prev - z * cur) / l;
    double enext =
        (eprev + std::abs(z) * ecur +
         1e-16 * (std::abs(prev) + std::abs(z * cur))) /
        l;
    if (!(std::abs(next) > 0.0) || enext > 1e-6 * std::abs(next)) {
      next = detail::pcf_integral(l + 1, z);
      enext = 1e-12 * std::abs(next);
    }
    prev = cur;
    eprev = ecur;
    cur = next;
    ecur = enext;
  }
  return cur;
}

}  // namespace mg1ps
