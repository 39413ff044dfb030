#pragma once

// Test-only oracles, kept independent of the library implementation paths
// they check.

#include <cmath>
#include <complex>
#include <vector>

namespace oracle {

// Plain power-series summation of 0Fk with explicit Pochhammer products,
// summing a fixed number of terms at a given working exponent cap.
inline double hyper_0Fk_series(const std::vector<double>& lower, double z,
                               int terms = 200) {
  long double sum = 0.0L;
  for (int m = 0; m < terms; ++m) {
    long double t = 1.0L;
    for (int j = 1; j <= m; ++j) t *= z / j;
    for (double b : lower)
      for (int j = 0; j < m; ++j) t /= (b + j);
    sum += t;
  }
  return static_cast<double>(sum);
}

// Left side of the series identity
//   sum_m z^m k^{km} / ((m+1)! (km+k-1)!)  ==  0Fk([];[1+1/k,...,2-1/k,2];z)/(k-1)!
inline double hyper_identity_lhs(int k, double z, int terms = 80) {
  long double sum = 0.0L;
  for (int m = 0; m < terms; ++m) {
    long double t = std::pow((long double)k, (long double)k * m);
    for (int j = 1; j <= m + 1; ++j) t /= j;
    for (int j = 1; j <= k * m + k - 1; ++j) t /= j;
    t *= std::pow((long double)z, m);
    sum += t;
  }
  return static_cast<double>(sum);
}

// D_{-m}(z) via direct quadrature of the defining integral with the composite
// Simpson rule (independent of the library's Gauss-Kronrod machinery).
inline double pcf_D_integral(int m, double z) {
  long double lg = std::lgamma(static_cast<long double>(m));
  auto f = [&](long double t) -> long double {
    if (t <= 0.0L) return 0.0L;
    return std::exp((m - 1) * std::log(t) - 0.5L * t * t - z * t - lg);
  };
  // integrand decays like e^{-t^2/2}; [0, 40+|z|] is ample
  const long double b = 40.0L + std::fabs(z);
  const int n = 200000;
  const long double h = b / n;
  long double s = f(0.0L) + f(b);
  for (int i = 1; i < n; ++i) s += f(i * h) * ((i % 2) ? 4.0L : 2.0L);
  long double val = s * h / 3.0L;
  return static_cast<double>(std::exp(-0.25L * z * z) * val);
}

// Composite-Simpson LST of a density sampled on [0, cut]: independent check
// of closed-form transforms.
template <class Density>
std::complex<double> lst_simpson(Density&& b, std::complex<double> tau,
                                 double cut, int n = 200000) {
  using C = std::complex<long double>;
  C lt(static_cast<long double>(tau.real()), static_cast<long double>(tau.imag()));
  const long double h = static_cast<long double>(cut) / n;
  auto f = [&](long double y) -> C {
    return static_cast<long double>(b(static_cast<double>(y))) *
           std::exp(-lt * y);
  };
  C s = f(0.0L) + f(static_cast<long double>(cut));
  for (int i = 1; i < n; ++i) s += f(i * h) * ((i % 2) ? 4.0L : 2.0L);
  C val = s * h / 3.0L;
  return {static_cast<double>(val.real()), static_cast<double>(val.imag())};
}

}  // namespace oracle
