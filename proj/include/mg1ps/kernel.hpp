#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "mg1ps/dist.hpp"
#include "mg1ps/numeric.hpp"

namespace mg1ps {

/// Vertical-contour description used by the transform quadratures.
struct ContourSpec {
  double shift = 0.1;        // abscissa of the vertical line
  int nodes = 64;            // initial node count (doubled adaptively)
  double half_width = 50.0;  // initial truncation
  enum class Kind { VerticalLine, LeftIndented, RightIndented } kind =
      Kind::VerticalLine;
  void validate() const {
    if (nodes < 64 || nodes % 2 != 0)
      throw std::invalid_argument("ContourSpec: nodes must be even and >= 64");
  }
};

/// Density value at (t|x) or (t): continuous part plus any atom mass at t=x,
/// tagged with the regime that produced it.
struct DensityValue {
  double t = 0.0;
  double x = 0.0;                 // 0 when unconditional
  double value = 0.0;             // continuous-part density
  double atom = 0.0;              // point mass at t == x (0 if none)
  std::string regime = "exact";
  double error_estimate = 0.0;    // relative
  bool converged = true;
};

namespace kernel {

/// f(tau; s), the Laplace transform (in tau) of the denominator of E[e^{-sV(x)}].
/// Analytic at tau = 0; for |tau| < 1e-4 mu the removable singularity is
/// evaluated from the moment series of b^ about 0.
inline cplx f_kernel(const ServiceDistribution& d, double lambda, cplx s,
                     cplx tau) {
  const double mu = d.mu();
  const double rho = lambda / mu;
  if (std::abs(tau) < 1e-4 * mu) {
    // f = -lambda(m2/2 - m3 tau/6 + m4 tau^2/24 - m5 tau^3/120)
    //     - h^2/s - tau h^3/s^2 - tau^2 h^4/s^3 - tau^3 h^5/s^4,
    // h(tau) = (1-rho) + lambda(m2 tau/2 - m3 tau^2/6 + m4 tau^3/24 - m5 tau^4/120)
    const double m2 = d.moment(2), m3 = d.moment(3), m4 = d.moment(4),
                 m5 = d.moment(5);
    cplx h = (1.0 - rho) +
             lambda * tau *
                 (m2 / 2.0 - tau * (m3 / 6.0 - tau * (m4 / 24.0 - tau * m5 / 120.0)));
    cplx h2 = h * h;
    cplx out = -lambda * (m2 / 2.0 - m3 * tau / 6.0 + m4 * tau * tau / 24.0 -
                          m5 * tau * tau * tau / 120.0);
    out -= h2 / s;
    out -= tau * h2 * h / (s * s);
    out -= tau * tau * h2 * h2 / (s * s * s);
    out -= tau * tau * tau * h2 * h2 * h / (s * s * s * s);
    return out;
  }
  cplx omb = d.one_minus_lst(tau);        // 1 - b^(tau)
  cplx bracket = tau - s - lambda * omb;  // denominator root locus
  double scale = std::abs(tau) + std::abs(s) + lambda;
  if (std::abs(bracket) < 1e-12 * scale)
    throw std::domain_error("f_kernel: tau hits a pole of f");
  cplx num = (1.0 - rho) * tau * tau - (1.0 - rho) * lambda * omb * tau +
             s * rho * tau - s * lambda * omb;
  return num / (tau * tau * bracket);
}

/// Roots of (tau - s - lambda)(tau + k mu)^k + lambda (k mu)^k = 0,
/// the k+1 poles of f for Erlang-k service.
inline std::vector<cplx> erlang_f_poles(const ServiceDistribution& d,
                                        double lambda, cplx s) {
  const int k = d.erlang_k();
  const double km = k * d.mu();
  // (tau + km)^k coefficients
  std::vector<cplx> pk(k + 1);
  double binom = 1.0;
  for (int j = 0; j <= k; ++j) {
    pk[j] = binom * std::pow(km, k - j);
    binom *= double(k - j) / double(j + 1);
  }
  std::vector<cplx> poly(k + 2, 0.0);
  const cplx a = s + lambda;
  for (int j = 0; j <= k; ++j) {
    poly[j + 1] += pk[j];
    poly[j] -= a * pk[j];
  }
  poly[0] += lambda * std::pow(km, k);
  return polynomial_roots(poly);
}

/// Nonzero roots Q_j of (Q - mu)(Q + k mu)^k + mu (k mu)^k = 0 for Erlang-k.
/// Q = 0 is an exact double root; it is deflated analytically before solving.
inline std::vector<cplx> erlang_Q_roots(int k, double mu) {
  if (k < 2) return {};
  const double km = k * mu;
  std::vector<double> pk(k + 1);
  double binom = 1.0;
  for (int j = 0; j <= k; ++j) {
    pk[j] = binom * std::pow(km, k - j);
    binom *= double(k - j) / double(j + 1);
  }
  std::vector<double> poly(k + 2, 0.0);
  for (int j = 0; j <= k; ++j) {
    poly[j + 1] += pk[j];
    poly[j] -= mu * pk[j];
  }
  poly[0] += mu * std::pow(km, k);
  // constant and linear coefficients vanish identically
  std::vector<cplx> deflated(k);
  for (int j = 0; j < k; ++j) deflated[j] = poly[j + 2];
  return polynomial_roots(deflated);
}

/// Scaled denominator F~(s,x) = e^{-s x} F(s,x), where
/// F(s,x) = (1/2 pi i) int f(tau;s) e^{tau x} dtau.
/// Erlang kinds use the finite residue sum over the poles of f; the
/// deterministic kind uses an exact finite series; other kinds use
/// trapezoidal quadrature along a shifted vertical contour.
inline cplx F_tilde(const ServiceDistribution& d, double lambda, cplx s,
                    double x);

namespace detail {

inline cplx F_tilde_erlang(const ServiceDistribution& d, double lambda, cplx s,
                           double x) {
  const double rho = lambda / d.mu();
  auto poles = erlang_f_poles(d, lambda, s);
  cplx tot = 0.0;
  for (cplx tau : poles) {
    cplx dpsi = 1.0 + lambda * d.lst_deriv_analytic(tau, 1);
    if (std::abs(dpsi) < 1e-12)
      throw std::domain_error("F_tilde: degenerate (double) pole of f");
    cplx ratio;  // (s/tau)^2, guarded near the tau ~ s/(1-rho) root for s -> 0
    if (std::abs(s) < 1e-6 * d.mu() && std::abs(tau) < 1e-4 * d.mu()) {
      const double m2 = d.moment(2);
      cplx q = (1.0 - rho) *
               (1.0 + lambda * m2 * s / (2.0 * (1.0 - rho) * (1.0 - rho)));
      ratio = q * q;
    } else {
      cplx r = s / tau;
      ratio = r * r;
    }
    tot += ratio / dpsi * std::exp((tau - s) * x);
  }
  return tot;
}

// I~_m = e^{-s y} int_0^y u^m e^{a u} du with a = s + lambda (deterministic kind).
inline std::vector<cplx> det_scaled_int(cplx s, double lambda, double y,
                                        int mmax) {
  const cplx a = s + lambda;
  std::vector<cplx> I(mmax + 1);
  const double ay = std::abs(a) * y;
  if (ay > double(mmax) + 4.0 && std::abs(a) > 1e-8) {
    // upward recursion: I~_m = (y^m e^{lambda y} - m I~_{m-1})/a
    I[0] = (std::exp(lambda * y) - std::exp(-s * y)) / a;
    double ym = 1.0;
    for (int m = 1; m <= mmax; ++m) {
      ym *= y;
      I[m] = (ym * std::exp(lambda * y) - double(m) * I[m - 1]) / a;
    }
  } else {
    // series: int_0^y u^m e^{au} du = y^{m+1} sum_j (a y)^j / ((m+1+j) j!)
    for (int m = 0; m <= mmax; ++m) {
      cplx term = 1.0, sum = 1.0 / double(m + 1);
      cplx az = a * y;
      for (int j = 1; j <= 400; ++j) {
        term *= az / double(j);
        cplx add = term / double(m + 1 + j);
        sum += add;
        if (std::abs(add) < 1e-18 * (1.0 + std::abs(sum)) && j > 3) break;
      }
      I[m] = std::pow(y, m + 1) * sum * std::exp(-s * y);
    }
  }
  return I;
}

inline cplx F_tilde_det(const ServiceDistribution& d, double lambda, cplx s,
                        double x) {
  const double mu = d.mu();
  const double rho = lambda / mu;
  // F~ = e^{-sx}[(1-rho) + s x] + s^2 sum_{L=0}^{floor(x mu)} (-lambda)^L e^{-s L/mu} w~_L(x - L/mu)
  // with w~_L(y) = e^{-s y} (y I_L - I_{L+1})/L!
  cplx out = std::exp(-s * x) * ((1.0 - rho) + s * x);
  const int Lmax = static_cast<int>(std::floor(x * mu * (1.0 + 1e-12)));
  double Lfact = 1.0;
  double lampow = 1.0;
  for (int L = 0; L <= Lmax; ++L) {
    double y = x - L / mu;
    if (y > 1e-14) {
      auto I = det_scaled_int(s, lambda, y, L + 1);
      cplx w = (y * I[L] - I[L + 1]) / Lfact;
      out += s * s * lampow * std::exp(-s * (L / mu)) * w;
    }
    lampow *= -lambda;
    Lfact *= (L + 1.0);
  }
  return out;
}

// Trapezoidal full-line integral of g(c + i u), u in R, with node-reusing
// step halving and magnitude-based truncation.  Returns (1/2 pi) int g du.
template <class G>
cplx trapezoid_line(G&& g, double step0, double width0, double rel_tol,
                    int max_halvings = 7) {
  // truncation width: march outward on the coarse grid until |g| stays small
  double h = step0;
  cplx sum = g(0.0);
  double peak = std::abs(sum);
  double W = 0.0;
  int quiet = 0;
  for (int i = 1; i < 4000000; ++i) {
    double u = i * h;
    cplx v = g(u) + g(-u);
    sum += v;
    peak = std::max(peak, std::abs(v));
    W = u;
    if (std::abs(v) < 0.05 * rel_tol * peak && u >= width0)
      ++quiet;
    else
      quiet = 0;
    if (quiet >= 8) break;
  }
  cplx total = sum * h;
  // halve the step, reusing previous nodes (new contributions at odd multiples)
  for (int it = 0; it < max_halvings; ++it) {
    double h2 = h * 0.5;
    cplx odd = 0.0;
    for (double u = h2; u <= W; u += h) odd += g(u) + g(-u);
    cplx refined = total * 0.5 + odd * h2;
    bool done = std::abs(refined - total) < rel_tol * std::abs(refined);
    total = refined;
    h = h2;
    if (done) break;
  }
  return total / (2.0 * M_PI);
}

inline cplx F_tilde_quadrature(const ServiceDistribution& d, double lambda,
                               cplx s, double x) {
  const double mu = d.mu();
  const double rho = lambda / mu;
  const cplx a = s + lambda;
  // closed parts: e^{-sx}[(1-rho)+sx] + s^2 e^{-sx}(e^{ax}-1-ax)/a^2
  cplx out = std::exp(-s * x) * ((1.0 - rho) + s * x);
  if (std::abs(a) * x < 1e-4) {
    // (e^{ax}-1-ax)/a^2 ~ x^2/2 (1 + ax/3 + ...)
    out += s * s * std::exp(-s * x) * x * x *
           (0.5 + a * x / 6.0 + a * a * x * x / 24.0);
  } else {
    out += s * s * (std::exp(lambda * x) - std::exp(-s * x) * (1.0 + a * x)) /
           (a * a);
  }
  // remainder kernel: -lambda b^(tau) / (tau^2 (tau-a)(tau-a+lambda b^(tau)))
  const double c = std::max(0.5 * mu, a.real() + lambda) + 0.5 * mu;
  auto g = [&](double u) -> cplx {
    cplx tau(c, u);
    cplx bh = d.lst(tau);
    cplx ta = tau - a;
    return std::exp((tau - s) * x) * (-lambda * bh) /
           (tau * tau * ta * (ta + lambda * bh));
  };
  double step = std::min(0.5, M_PI / (4.0 * std::max(x, 0.25))) * mu;
  double width = 30.0 * mu + 2.0 * std::abs(s.imag());
  out += s * s * trapezoid_line(g, step, width, 1e-9);
  return out;
}

}  // namespace detail

inline cplx F_tilde(const ServiceDistribution& d, double lambda, cplx s,
                    double x) {
  if (!(x > 0.0)) throw std::domain_error("F_tilde: requires x > 0");
  switch (d.kind()) {
    case DistKind::Exponential:
    case DistKind::Erlang:
      return detail::F_tilde_erlang(d, lambda, s, x);
    case DistKind::Deterministic:
      return detail::F_tilde_det(d, lambda, s, x);
    default:
      return detail::F_tilde_quadrature(d, lambda, s, x);
  }
}

/// Bracket transform used on the heavy-traffic T-scale:
///   (1/2 pi i) int e^{tau x} / (tau^2 [tau - mu (1 - b^(tau))]) dtau
/// over a contour right of all singularities; equals Q_*(x) plus the C_-
/// contour part of Theorem 2.2 Case 2.
inline double bracket_g(const ServiceDistribution& d, double x) {
  const double mu = d.mu();
  if (d.kind() == DistKind::Exponential || d.kind() == DistKind::Erlang) {
    // residue at the order-4 pole at 0 (Q_*) plus the simple nonzero roots
    const double m2 = d.moment(2), m3 = d.moment(3), m4 = d.moment(4),
                 m5 = d.moment(5);
    double Q = (90.0 * std::pow(m2, 3) * x * x * x +
                90.0 * m2 * m2 * m3 * x * x +
                15.0 * m2 * (4.0 * m3 * m3 - 3.0 * m2 * m4) * x +
                (9.0 * m2 * m2 * m5 + 20.0 * std::pow(m3, 3) -
                 30.0 * m2 * m3 * m4)) /
               (270.0 * mu * std::pow(m2, 4));
    const int k = d.erlang_k();
    if (k >= 2) {
      cplx sum = 0.0;
      for (cplx q : erlang_Q_roots(k, mu)) {
        cplx dN = 1.0 + mu * d.lst_deriv_analytic(q, 1);
        sum += std::exp(q * x) / (q * q * dN);
      }
      Q += sum.real();
    }
    return Q;
  }
  // quadrature with the 1/(tau^2 (tau - mu)) subtraction
  double closed = (std::exp(mu * x) - 1.0 - mu * x) / (mu * mu);
  const double c = 2.5 * mu;
  auto g = [&](double u) -> cplx {
    cplx tau(c, u);
    cplx bh = d.lst(tau);
    cplx tm = tau - mu;
    return std::exp(tau * x) * (-mu * bh) /
           (tau * tau * tm * (tm + mu * bh));
  };
  double step = std::min(0.5, M_PI / (4.0 * std::max(x, 0.25))) * mu;
  cplx rem = detail::trapezoid_line(g, step, 30.0 * mu, 1e-9);
  return closed + rem.real();
}

}  // namespace kernel

/// f(tau;s) for the model (public operation).
inline cplx f_kernel(const ModelParams& p, cplx s, cplx tau) {
  return kernel::f_kernel(p.dist, p.lambda, s, tau);
}

/// F(s,x), the denominator of E[e^{-sV(x)}]/(1-rho).
inline cplx F_denominator(const ModelParams& p, cplx s, double x) {
  return std::exp(s * x) * kernel::F_tilde(p.dist, p.lambda, s, x);
}

/// E[e^{-s V(x)}] = (1-rho) / F(s,x).
inline cplx sojourn_lst(const ModelParams& p, cplx s, double x) {
  return (1.0 - p.rho()) * std::exp(-s * x) /
         kernel::F_tilde(p.dist, p.lambda, s, x);
}

}  // namespace mg1ps
