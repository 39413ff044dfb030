#pragma once

#include <array>
#include <cmath>
#include <optional>

#include "mg1ps/roots.hpp"

namespace mg1ps {

struct InvertOptions {
  double alias_margin = 18.0;  // exponent margin A: aliasing ~ e^{-A}
  double rel_tol = 1e-6;       // node doubling stops at this relative change
  int max_terms = 1 << 13;
};

namespace detail {

/// Wynn's epsilon algorithm over a window of partial sums.  Returns the
/// even-column candidate with the best self-consistency; robust against
/// several simultaneous geometric/oscillatory transients.
inline double wynn_epsilon(const std::vector<double>& S) {
  const int n = static_cast<int>(S.size());
  if (n == 1) return S[0];
  std::vector<double> prev(n, 0.0);  // eps_{-1}
  std::vector<double> cur(S);        // eps_0
  double best = S.back();
  double best_diff = std::numeric_limits<double>::max();
  double last_cand = S.back();
  for (int k = 1; k < n; ++k) {
    std::vector<double> next(n - k);
    bool degenerate = false;
    for (int j = 0; j + k < n; ++j) {
      double d = cur[j + 1] - cur[j];
      if (!(std::abs(d) > 0.0)) {
        degenerate = true;
        break;
      }
      next[j] = prev[j + 1] + 1.0 / d;
    }
    if (degenerate) break;
    prev = std::move(cur);
    cur = std::move(next);
    if (k % 2 == 0 && !cur.empty()) {
      double cand = cur.back();
      double diff = std::abs(cand - last_cand);
      if (diff < best_diff) {
        best_diff = diff;
        best = cand;
      }
      last_cand = cand;
    }
  }
  return best;
}

}  // namespace detail

/// Numerical Bromwich inversion of the conditional sojourn density for the
/// kernel prefactor/F(s,x).  Covers both the exact path (lambda_eff = lambda,
/// prefactor = 1-rho) and the heavy-traffic leading kernel (lambda_eff = mu,
/// prefactor = eps).
///
/// The sojourn law carries a point mass at every t = (n+1)x: the tagged job
/// shares the server with exactly n companions for its whole stay, each with
/// residual work beyond x (product-form stationary state), and no arrivals
/// occur.  Those masses a_n = prefactor rho^n H(x)^n e^{-lambda (n+1) x}
/// (H the equilibrium-residual tail) are transform components
/// a_n e^{-s(n+1)x} and are removed before inverting; density() returns the
/// genuinely continuous part.
///
/// The inversion works on the shifted variable w = t - x with
/// G~(s) = prefactor/F~(s,x) - sum_n a_n e^{-s n x} - FT(s), FT the leading
/// continuous term (added back in closed form when the contour allows).  The
/// contour is anchored just right of the dominant singularity
/// (c = s_c + A/2w); the trapezoid series (h = pi/w) is accelerated with
/// Wynn's epsilon and node doubling.
class ConditionalInverter {
 public:
  ConditionalInverter(const ServiceDistribution& d, double lambda_eff,
                      double prefactor, double x, InvertOptions opts = {})
      : dist_(d), lambda_(lambda_eff), pref_(prefactor), x_(x), opts_(opts) {
    if (!(x > 0.0))
      throw std::domain_error("ConditionalInverter: requires x > 0");
    const double rho_eff = lambda_ * d.moment(1);
    const double Hbar = d.equilibrium_tail(x_);
    double mass = pref_ * std::exp(-lambda_ * x_);
    for (int n = 0; n < 400 && mass > 1e-17 * pref_; ++n) {
      atoms_.push_back(mass);
      mass *= rho_eff * Hbar * std::exp(-lambda_ * x_);
    }
    if (lambda_ < d.mu() * (1.0 - 1e-12)) {
      ModelParams p(lambda_, d);
      s_right_ = roots::solve_sc(p, x_).s_c;
    } else {
      s_right_ = 0.0;  // heavy-traffic leading kernel: F(0,x) = 0
    }
    if (dist_.kind() == DistKind::Deterministic) {
      // no density at 0: pull the O(1/s) level out numerically
      double s1 = 30.0 / x_, s2 = 60.0 / x_;
      auto lead = [&](double s) {
        return s * ((pref_ / kernel::F_tilde(dist_, lambda_, s, x_)).real() -
                    atom_train(s).real());
      };
      ft_coef_ = 2.0 * lead(s2) - lead(s1);
      ft_nu_ = 1.0;
    } else {
      auto [al, nu] = dist_.small_y_params();
      ft_coef_ = atoms_[0] * lambda_ * al * std::tgamma(nu) * x_;
      ft_nu_ = nu;
    }
  }

  /// Point mass at t = x (n = 0 atom).
  double atom() const { return atoms_[0]; }
  /// Point mass at t = (n+1) x.
  double atom_mass(int n) const {
    return n < int(atoms_.size()) ? atoms_[size_t(n)] : 0.0;
  }
  int atom_count() const { return int(atoms_.size()); }
  double rightmost_singularity() const { return s_right_; }

  /// Continuous-part density at t > x.
  DensityValue density(double t) const {
    DensityValue out;
    out.t = t;
    out.x = x_;
    out.regime = "exact";
    const double w = t - x_;
    if (!(w > 0.0))
      throw std::domain_error("density: continuous part needs t > x");
    const double c = s_right_ + opts_.alias_margin / (2.0 * w);
    const bool with_ft = c > 0.05;
    const double h = M_PI / w;

    auto term = [&](int j) {
      cplx s(c, j * h);
      cplx g = pref_ / kernel::F_tilde(dist_, lambda_, s, x_) - atom_train(s);
      if (with_ft) g -= ft_coef_ / std::pow(s, ft_nu_);
      return g.real();
    };

    // partial sums of the alternating trapezoid series, accelerated with
    // Wynn's epsilon over a trailing window, re-estimated at doubling
    // checkpoints (the required node doubling)
    std::vector<double> partials;
    partials.reserve(1024);
    double partial = 0.5 * term(0);
    partials.push_back(partial);
    double prev_est = 0.0, est = 0.0;
    bool have_prev = false, converged = false;
    int checkpoint = 48;
    constexpr int kWindow = 96;
    for (int n = 1; n < opts_.max_terms; ++n) {
      partial += (n % 2 ? -1.0 : 1.0) * term(n);
      partials.push_back(partial);
      if (n == checkpoint) {
        int K = std::min<int>(kWindow, partials.size());
        std::vector<double> tail(partials.end() - K, partials.end());
        est = detail::wynn_epsilon(tail);
        double scale = std::abs(est) + 1e-14 * (atoms_[0] + 1e-30);
        double diff = std::abs(est - prev_est) / scale;
        if (have_prev && diff < opts_.rel_tol) {
          converged = true;
          out.error_estimate = diff;
          break;
        }
        if (have_prev) out.error_estimate = diff;
        prev_est = est;
        have_prev = true;
        checkpoint *= 2;
      }
    }
    double val = std::exp(c * w) / w * est;
    if (with_ft && ft_coef_ != 0.0)
      val += ft_coef_ * std::pow(w, ft_nu_ - 1.0) / std::tgamma(ft_nu_);
    out.value = val;
    out.converged = converged;
    return out;
  }

 private:
  // sum_n a_n e^{-s n x}: the atom transforms, shifted by e^{s x}
  cplx atom_train(cplx s) const {
    cplx step = std::exp(-s * x_);
    cplx pw = 1.0, tot = 0.0;
    for (double a : atoms_) {
      tot += a * pw;
      pw *= step;
    }
    return tot;
  }

  ServiceDistribution dist_;
  double lambda_;
  double pref_;
  double x_;
  InvertOptions opts_;
  std::vector<double> atoms_;
  double s_right_ = 0.0;
  double ft_coef_ = 0.0;
  double ft_nu_ = 1.0;
};

/// Point mass of the conditional sojourn law at t = (n+1)x.
inline double conditional_atom_mass(const ModelParams& p, int n, double x) {
  double H = p.dist.equilibrium_tail(x);
  return p.eps() * std::pow(p.rho() * H, n) *
         std::exp(-p.lambda * (n + 1) * x);
}

/// Total conditional mass: all point masses plus the continuous part
/// integrated piecewise between the kink lattice points (n+1)x, with an
/// exponential tail estimate.  Normalization should give 1.
inline double conditional_total_mass(const ModelParams& p, double x,
                                     double horizon_rates = 45.0) {
  ConditionalInverter inv(p.dist, p.lambda, p.eps(), x);
  double atoms = 0.0;
  for (int n = 0; n < inv.atom_count(); ++n) atoms += inv.atom_mass(n);
  auto sc = roots::solve_sc(p, x);
  const double T = x + horizon_rates / std::abs(sc.s_c);
  double cont = 0.0;
  double lo = x;
  for (int n = 2; lo < T && n <= 13; ++n) {
    double hi = std::min(n * x, T);
    cont += integrate<double>(
        [&](double t) { return inv.density(t).value; }, lo * (1.0 + 1e-12),
        hi * (1.0 - 1e-12), 1e-9, 1e-6, 18);
    lo = hi;
  }
  if (lo < T)  // kinks beyond here are negligible
    cont += integrate<double>([&](double t) { return inv.density(t).value; },
                              lo * (1.0 + 1e-12), T, 1e-9, 1e-6, 18);
  double tail = inv.density(T).value / std::abs(sc.s_c);
  return atoms + cont + tail;
}

/// p(t|x) by double-transform inversion; the t = x atom (1-rho) e^{-lambda x}
/// is reported separately in the atom field.
inline DensityValue ptx_exact(const ModelParams& p, double t, double x) {
  if (!(x > 0.0) || !(t > x))
    throw std::domain_error("ptx_exact: requires t > x > 0");
  ConditionalInverter inv(p.dist, p.lambda, p.eps(), x);
  DensityValue out = inv.density(t);
  out.atom = inv.atom();
  return out;
}

/// p(t) = int_0^t b(x) p(t|x) dx plus the atom-line contribution
/// b(t) (1-rho) e^{-lambda t}.
inline double pt_exact(const ModelParams& p, double t) {
  if (!(t > 0.0)) throw std::domain_error("pt_exact: requires t > 0");
  const auto& d = p.dist;
  if (d.kind() == DistKind::Deterministic) {
    double x0 = 1.0 / d.mu();
    if (t <= x0) return 0.0;
    ConditionalInverter inv(d, p.lambda, p.eps(), x0);
    return inv.density(t).value;  // continuous part; the atom sits at t = x0
  }
  double hi = t;
  if (d.kind() == DistKind::FiniteSupport) hi = std::min(hi, d.support_limit());
  auto integrand = [&](double x) {
    if (x <= 0.0 || x >= t) return 0.0;
    ConditionalInverter inv(d, p.lambda, p.eps(), x);
    return d.density(x) * inv.density(t).value;
  };
  // p(.|x) has kinks at t = (n+1)x, i.e. at x = t/(n+1): integrate piecewise
  double integral = 0.0;
  const int segments = 12;
  for (int n = 1; n < segments; ++n) {
    double a = t / (n + 1.0), b = t / double(n);
    a = std::min(a, hi);
    b = std::min(b, hi);
    if (b <= a) continue;
    integral += integrate<double>(integrand, a * (1.0 + 1e-12),
                                  b * (1.0 - 1e-12), 1e-10, 1e-6, 16);
  }
  double head = std::min(t / double(segments), hi);
  integral += integrate<double>(integrand, 1e-9 * hi, head * (1.0 - 1e-12),
                                1e-9, 1e-6, 16);
  // the conditional point masses at t = (n+1)x turn into density lines of
  // p(t) at x_n = t/(n+1), n = 0, 1, ...
  double atom_lines = 0.0;
  for (int n = 0; n < 400; ++n) {
    double xn = t / (n + 1.0);
    if (d.kind() == DistKind::FiniteSupport && xn > d.support_limit()) continue;
    double term = d.density(xn) * conditional_atom_mass(p, n, xn) / (n + 1.0);
    atom_lines += term;
    if (n > 2 && term < 1e-16) break;
  }
  return integral + atom_lines;
}

/// Appendix identity checks for deterministic service: residual of (A2)
/// (contour quadrature vs closed form) combined with the geometric-series
/// identity (A5) by truncated summation.
inline double verify_deterministic_identity(double lambda, double mu, cplx s) {
  double rho = lambda / mu;
  if (!(rho < 1.0))
    throw std::domain_error("verify_deterministic_identity: requires rho < 1");
  auto det = ServiceDistribution::deterministic(mu);
  // (A2): (1/2 pi i) int e^{tau/mu} f(tau;s) dtau
  //       = [s^2 e^{rho+s/mu} + lambda(s + (1-rho)(lambda+s))]/(lambda+s)^2
  cplx lhs = std::exp(s / mu) *
             kernel::detail::F_tilde_quadrature(det, lambda, s, 1.0 / mu);
  cplx rhs = (s * s * std::exp(rho + s / mu) +
              lambda * (s + (1.0 - rho) * (lambda + s))) /
             ((lambda + s) * (lambda + s));
  double resid_a2 = std::abs(lhs - rhs);

  // (A5): sum_L (1/2 pi i) int (-1)^L rho^L e^{(1-L)T} / (T^2 (T-w)^{L+1}) dT
  //       = (e^w - w - 1)/w^2, with w = rho + s/mu
  cplx w = rho + s / mu;
  const double cT = std::max(1.0, w.real() + 0.5);
  cplx total = 0.0;
  for (int L = 0; L <= 6; ++L) {
    cplx val;
    if (L == 0) {
      // subtract e^T/T^3 (inverse 1/2 at time 1) to speed the tail decay
      auto g = [&](double u) -> cplx {
        cplx T(cT, u);
        return std::exp(T) * w / (T * T * T * (T - w));
      };
      val = 0.5 + kernel::detail::trapezoid_line(g, 0.5, 50.0, 1e-10);
    } else {
      auto g = [&](double u) -> cplx {
        cplx T(cT, u);
        return std::exp((1.0 - L) * T) /
               (T * T * std::pow(T - w, double(L + 1)));
      };
      val = kernel::detail::trapezoid_line(g, 0.5, 50.0, 1e-10);
    }
    total += std::pow(-rho, L) * val;
  }
  cplx rhs5 = (std::exp(w) - w - 1.0) / (w * w);
  double resid_a5 = std::abs(total - rhs5);
  return std::max(resid_a2, resid_a5);
}

}  // namespace mg1ps
