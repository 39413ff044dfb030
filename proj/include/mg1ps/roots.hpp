#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "mg1ps/kernel.hpp"

namespace mg1ps {

/// Saddle point (s*, tau*) of s t/x - tau(s) with second-derivative data.
struct SaddlePoint {
  double s_star = 0.0;
  double tau_star = 0.0;
  double phi_pp = 0.0;  // phi''(s*) > 0 in the interior regime
  enum class Regime { Interior, Degenerate } regime = Regime::Interior;
};

/// Critical pair (s0, tau0): the t/x -> infinity limit of the saddle,
/// with b^ derivatives at tau0 up to order 4.
struct CriticalPair {
  double s0 = 0.0;
  double tau0 = 0.0;
  double b2 = 0.0;  // b^''(tau0)
  double b3 = 0.0;  // b^'''(tau0)
  double b4 = 0.0;  // b^''''(tau0)
};

/// Root v_n(X) of the spectral equation with its decay-rate coefficients.
struct SpectralRoot {
  int n = 0;
  double v = 0.0;
  double B1 = 0.0;
  double C1 = 0.0;
  double D1 = 0.0;
  double G = 0.0;
};

/// Maximal real zero of F(s,x) plus dF/ds there (the Case-4 residue data).
struct ScResult {
  double s_c = 0.0;
  double dFds = 0.0;          // J-denominator: d/ds F(s,x) at s_c
  bool extended_scan = false;  // root found below s0 (fallback range)
};

namespace roots {

/// Largest real root of tau - s - lambda(1 - b^(tau)) = 0 for s >= s0.
inline double pole_tau(const ModelParams& p, double s);

/// (s0, tau0) from lambda b^'(tau0) = -1.
inline CriticalPair critical_pair(const ModelParams& p) {
  const auto& d = p.dist;
  const double lam = p.lambda;
  auto g = [&](double tau) {
    return -lam * d.lst_deriv(cplx(tau, 0.0), 1).real() - 1.0;
  };
  // g(0) = rho - 1 < 0; g increases as tau decreases toward -eps0
  double lo;
  const double eps0 = d.analyticity_abscissa();
  if (std::isfinite(eps0)) {
    lo = -eps0 * (1.0 - 1e-9);
    if (g(lo) < 0.0)
      throw std::domain_error("critical_pair: no root right of -eps0");
  } else {
    lo = -0.5 * d.mu();
    int guard = 0;
    while (g(lo) < 0.0) {
      lo *= 2.0;
      if (++guard > 200)
        throw std::domain_error("critical_pair: bracket search failed");
    }
  }
  double tau0 = bracketed_root([&](double t) { return g(t); }, lo, 0.0, 1e-14);
  CriticalPair cp;
  cp.tau0 = tau0;
  cp.s0 = tau0 - lam * d.one_minus_lst(cplx(tau0, 0.0)).real();
  cp.b2 = d.lst_deriv(cplx(tau0, 0.0), 2).real();
  cp.b3 = d.lst_deriv(cplx(tau0, 0.0), 3).real();
  cp.b4 = d.lst_deriv(cplx(tau0, 0.0), 4).real();
  return cp;
}

inline double pole_tau(const ModelParams& p, double s) {
  const auto& d = p.dist;
  const double lam = p.lambda;
  auto cp = critical_pair(p);
  if (s < cp.s0 - 1e-12 * (1.0 + std::abs(cp.s0)))
    throw std::domain_error("pole_tau: no real root for s < s0");
  auto psi = [&](double tau) {
    return tau - lam * d.one_minus_lst(cplx(tau, 0.0)).real() - s;
  };
  double hi = s + lam;  // psi(s+lam) >= 0
  if (psi(hi) < 0.0) hi = s + lam + 1.0;
  double lo = std::max(cp.tau0, hi - 2.0 * (hi - cp.tau0));
  lo = cp.tau0;
  if (psi(lo) > 0.0) return cp.tau0;  // s == s0 up to roundoff
  return bracketed_root(psi, lo, hi, 1e-14);
}

/// Saddle for the ratio t/x > 1: -b^'(tau*) = (t-x)/(lambda t).
inline SaddlePoint saddle(const ModelParams& p, double t_over_x) {
  if (!(t_over_x > 1.0))
    throw std::domain_error("saddle: requires t/x > 1");
  const auto& d = p.dist;
  const double lam = p.lambda;
  const double mean_ratio = 1.0 / p.eps();  // t/x at which s* = tau* = 0
  SaddlePoint sp;
  if (std::abs(t_over_x - mean_ratio) <= 1e-6 * mean_ratio) {
    sp.regime = SaddlePoint::Regime::Degenerate;
    sp.s_star = 0.0;
    sp.tau_star = 0.0;
    sp.phi_pp = lam * d.moment(2) / std::pow(p.eps(), 3);
    return sp;
  }
  const double target = (1.0 - 1.0 / t_over_x) / lam;
  auto g = [&](double tau) {
    return -d.lst_deriv(cplx(tau, 0.0), 1).real() - target;
  };
  double lo, hi;
  if (target < d.moment(1)) {
    // tau* > 0: -b^' decreasing from m1 at 0
    lo = 0.0;
    hi = d.mu();
    int guard = 0;
    while (g(hi) > 0.0) {
      hi *= 2.0;
      if (++guard > 200) throw std::domain_error("saddle: bracket failed");
    }
  } else {
    auto cp = critical_pair(p);
    lo = cp.tau0;
    hi = 0.0;
    if (g(lo) < 0.0)
      throw std::domain_error("saddle: target exceeds the tau0 branch");
  }
  double tau = bracketed_root(g, lo, hi, 1e-14);
  sp.tau_star = tau;
  sp.s_star = tau - lam * d.one_minus_lst(cplx(tau, 0.0)).real();
  double b1 = d.lst_deriv(cplx(tau, 0.0), 1).real();
  double b2 = d.lst_deriv(cplx(tau, 0.0), 2).real();
  sp.phi_pp = lam * b2 / std::pow(1.0 + lam * b1, 3);
  return sp;
}

/// Maximal real zero s_c(x) of F(s,x), scanned downward from 0 in steps of
/// |s0|/200; the scan extends to 11 s0 (flagged) before giving up.
inline ScResult solve_sc(const ModelParams& p, double x) {
  if (!(x > 0.0)) throw std::domain_error("solve_sc: requires x > 0");
  auto cp = critical_pair(p);
  auto F = [&](double s) {
    return (std::exp(s * x) * kernel::F_tilde(p.dist, p.lambda, s, x)).real();
  };
  const double step = std::abs(cp.s0) / 200.0;
  double f_hi = F(-1e-9);
  const double s_stop = 11.0 * cp.s0;
  ScResult out;
  double s = -1e-9;
  bool found = false;
  while (s > s_stop) {
    double s_lo = s - step;
    double f_lo = F(s_lo);
    if (f_hi * f_lo <= 0.0) {
      out.s_c = bracketed_root(F, s_lo, s, 1e-13);
      found = true;
      break;
    }
    s = s_lo;
    f_hi = f_lo;
  }
  if (!found) {
    // fallback: for small x (and finite support in heavy traffic) the zero
    // sits well below s0; continue on a geometric grid, flagged
    double s_lo = s * 1.05;
    while (!found && s_lo > 2e4 * cp.s0) {
      s_lo = s * 1.05;
      double f_lo = F(s_lo);
      if (f_hi * f_lo <= 0.0) {
        out.s_c = bracketed_root(F, s_lo, s, 1e-13);
        found = true;
        break;
      }
      s = s_lo;
      f_hi = f_lo;
    }
  }
  if (!found)
    throw std::runtime_error("solve_sc: no sign change located below 0");
  out.extended_scan = out.s_c < cp.s0;
  double h = std::max(1e-6 * std::abs(out.s_c), 1e-4 * std::abs(cp.s0) / 200.0);
  out.dFds = deriv_central(F, out.s_c, h);
  return out;
}

/// d0..d3 coefficients of D1(v) (heavy-traffic r=2 tail correction).
inline double D1_coefficient(double v, double X, double mu, double m2,
                             double m3, double m4) {
  const double v2 = v * v;
  const double mm2 = mu * m2;
  double d0 = 24.0 * std::pow(mu, 3) * std::pow(m2, 3) *
              (-12.0 * mu * mu * std::pow(m2, 4) + 8.0 * mu * m2 * m2 * m3 +
               (v2 + 1.0) * m2 * m4 - (v2 + 3.0) * m3 * m3);
  double d1 = 4.0 * mu * mu * m2 * m2 *
              (36.0 * mu * mu * (v2 - 3.0) * std::pow(m2, 4) -
               24.0 * mu * (4.0 * v2 - 3.0) * m2 * m2 * m3 +
               3.0 * (3.0 * v2 * v2 - 2.0 * v2 + 3.0) * m2 * m4 -
               (11.0 * v2 * v2 - 42.0 * v2 + 27.0) * m3 * m3);
  double d2 = 2.0 * mu * m2 *
              (-36.0 * mu * mu * (v2 + 3.0) * std::pow(m2, 4) -
               24.0 * mu * (v2 * v2 + 2.0 * v2 - 3.0) * m2 * m2 * m3 +
               3.0 * (3.0 * std::pow(v2, 3) - 7.0 * v2 * v2 - 7.0 * v2 + 3.0) *
                   m2 * m4 -
               (13.0 * std::pow(v2, 3) - 27.0 * v2 * v2 - 45.0 * v2 + 27.0) *
                   m3 * m3);
  double d3 = std::pow(v2 + 1.0, 2) *
              (-36.0 * mu * mu * std::pow(m2, 4) + 24.0 * mu * m2 * m2 * m3 -
               3.0 * (v2 * v2 - 6.0 * v2 + 1.0) * m2 * m4 -
               (5.0 * v2 * v2 - 18.0 * v2 + 9.0) * m3 * m3);
  return (v2 + 1.0) * (d0 + d1 * X + d2 * X * X + d3 * X * X * X) /
         (72.0 * std::pow(mu, 3) * std::pow(m2, 5) *
          std::pow(X * (v2 + 1.0) + 2.0 * mm2, 3));
}

/// C1(v) decay-rate correction (heavy-traffic spectral rates).
inline double C1_coefficient(double v, double X, double mu, double m2,
                             double m3) {
  const double v2 = v * v;
  const double mm2 = mu * m2;
  return (v2 + 1.0) /
         (6.0 * mu * mu * std::pow(m2, 3) * ((v2 + 1.0) * X + 2.0 * mm2)) *
         (2.0 * mm2 * (m3 - 3.0 * mu * m2 * m2) +
          (3.0 * mu * m2 * m2 * v2 - 3.0 * m3 * v2 - 3.0 * mu * m2 * m2 + m3) *
              X);
}

/// G(v): spectral residue weight.  The sin coefficient carries v^3 (the
/// Erlang corollary form fixes the misprint in the general statement).
inline double G_weight(double v, double X, double mm2) {
  double c = std::cos(v * X / mm2), s = std::sin(v * X / mm2);
  double den = v * (v * v - 1.0) * X * c +
               (2.0 * v * v * X + mm2 * (v * v + 1.0)) * s;
  return 2.0 * std::pow(v, 3) * std::exp(X / mm2) / den;
}

/// Real positive roots v_n(X) of exp(-2X i v / (mu m2)) = ((1+iv)/(1-iv))^2,
/// i.e. X v/(mu m2) + 2 atan(v) = n pi, one per bracket
/// ((n-1) pi mu m2/X, n pi mu m2/X); attaches B1, C1, G and D1.
inline std::vector<SpectralRoot> spectral_roots(const ModelParams& p, double X,
                                                int n_max) {
  if (!(X > 0.0)) throw std::domain_error("spectral_roots: requires X > 0");
  const auto& d = p.dist;
  const double mu = d.mu();
  const double m2 = d.moment(2), m3 = d.moment(3), m4 = d.moment(4);
  const double mm2 = mu * m2;
  std::vector<SpectralRoot> out;
  out.reserve(n_max);
  for (int n = 1; n <= n_max; ++n) {
    auto W = [&](double v) { return X * v / mm2 + 2.0 * std::atan(v) - n * M_PI; };
    double lo = (n - 1) * M_PI * mm2 / X + 1e-14;
    double hi = n * M_PI * mm2 / X;
    double v = bracketed_root(W, lo, hi, 1e-14);
    // Newton polish on the smooth equation
    for (int it = 0; it < 4; ++it) {
      double f = W(v);
      double df = X / mm2 + 2.0 / (1.0 + v * v);
      v -= f / df;
    }
    SpectralRoot r;
    r.n = n;
    r.v = v;
    r.B1 = -(1.0 + v * v) / (2.0 * mm2);
    r.C1 = C1_coefficient(v, X, mu, m2, m3);
    r.D1 = D1_coefficient(v, X, mu, m2, m3, m4);
    r.G = G_weight(v, X, mm2);
    out.push_back(r);
  }
  return out;
}

/// Paper expansions of v_n(X), exposed for validation.
inline double v1_small_X(double X, double mm2) {
  return std::sqrt(2.0 * mm2 / X) - std::sqrt(2.0) / (12.0 * std::sqrt(mm2)) * std::sqrt(X) +
         11.0 * std::sqrt(2.0) / (1440.0 * std::pow(mm2, 1.5)) * std::pow(X, 1.5);
}
inline double vn_small_X(int n, double X, double mm2) {
  double np = (n - 1) * M_PI;
  return np * mm2 / X + 2.0 / np - 4.0 * X / (np * np * np * mm2);
}
inline double vn_large_X(int n, double X, double mm2) {
  return n * M_PI *
         (mm2 / X - 2.0 * mm2 * mm2 / (X * X) +
          4.0 * std::pow(mm2, 3) / std::pow(X, 3));
}

/// Nonzero roots Q_j of (Q-mu)(Q+k mu)^k + mu (k mu)^k = 0 (k >= 2),
/// sorted by descending real part; all have Re(Q) < 0.
inline std::vector<cplx> erlang_Q_roots(int k, double mu) {
  auto roots = kernel::erlang_Q_roots(k, mu);
  std::sort(roots.begin(), roots.end(), [](cplx a, cplx b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });
  return roots;
}

/// Right side of Omega(X) = sigma* (Theorem 2.4 minimizer equation).
inline double omega_of_X(const ModelParams& p, double X, double N, double r) {
  const double mm2 = p.dist.mu() * p.dist.moment(2);
  double v1 = spectral_roots(p, X, 1)[0].v;
  double v2 = v1 * v1;
  return N * r * std::pow(X, r - 1.0) * (mm2 * X * (v2 + 1.0) + 2.0 * mm2 * mm2) /
         (v2 * (v2 + 1.0));
}

/// Unique positive root X^ of Omega(X) = sigma_* (bisection on a bracket
/// grown geometrically; Omega is increasing with limits 0 and infinity).
inline double xhat(const ModelParams& p, double sigma_star) {
  if (!(sigma_star > 0.0)) throw std::domain_error("xhat: sigma* must be > 0");
  const auto& tail = p.dist.tail();
  if (!tail) throw std::domain_error("xhat: requires a TailSpec");
  const double N = tail->N, r = tail->r;
  double lo = 1e-8, hi = 1.0;
  int guard = 0;
  while (omega_of_X(p, hi, N, r) < sigma_star) {
    hi *= 2.0;
    if (++guard > 200) throw std::runtime_error("xhat: bracket failed (hi)");
  }
  guard = 0;
  while (omega_of_X(p, lo, N, r) > sigma_star) {
    lo *= 0.5;
    if (++guard > 200) throw std::runtime_error("xhat: bracket failed (lo)");
  }
  return bracketed_root(
      [&](double X) { return omega_of_X(p, X, N, r) - sigma_star; }, lo, hi,
      1e-13);
}

// ---- Erlang closed forms (Corollary 2.1 and the heavy-traffic analogues) ----

/// (s~*, tau~*) for Erlang-k service at ratio t/x.
inline std::pair<double, double> erlang_saddle_closed(int k, double mu,
                                                      double lambda,
                                                      double t_over_x) {
  const double xt = 1.0 / t_over_x;
  const double e = 1.0 / (k + 1.0);
  double s = std::pow(lambda * std::pow(mu, k), e) *
                 std::pow(1.0 / (1.0 - xt), e) * (k + 1.0 - xt) -
             lambda - mu * k;
  double tau = k * mu * (std::pow((lambda / mu) / (1.0 - xt), e) - 1.0);
  return {s, tau};
}

/// (s~0, tau~0) for Erlang-k service.
inline std::pair<double, double> erlang_crit_closed(int k, double mu,
                                                    double lambda) {
  const double e = 1.0 / (k + 1.0);
  double root = std::pow(lambda * std::pow(mu, k), e);
  return {(k + 1.0) * root - (k * mu + lambda), k * root - k * mu};
}

/// Hatted heavy-traffic saddle (s^*, tau^*) for Erlang-k: closed form from
/// (k mu/(k mu + tau))^{k+1} = (T-X)/T.
inline std::pair<double, double> erlang_ht_saddle_closed(int k, double mu,
                                                         double X, double T) {
  const double W = std::pow(T / (T - X), 1.0 / (k + 1.0));
  double tau = k * mu * (W - 1.0);
  double s = tau - mu * (1.0 - std::pow(W, -k));
  return {s, tau};
}

}  // namespace roots
}  // namespace mg1ps
