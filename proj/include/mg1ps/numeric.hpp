#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace mg1ps {

using cplx = std::complex<double>;

namespace detail {

// Gauss-Kronrod 15-point pair on [-1,1].
inline constexpr double gk_nodes[8] = {
    0.000000000000000000000000000000000e+00,
    2.077849550078984676006894037732449e-01,
    4.058451513773971669066064120769615e-01,
    5.860872354676911302941448382587296e-01,
    7.415311855993944398638647732807884e-01,
    8.648644233597690727897127886409262e-01,
    9.491079123427585245261896840478513e-01,
    9.914553711208126392068546975263285e-01};
inline constexpr double gk_wk[8] = {
    2.094821410847278280129991748917143e-01,
    2.044329400752988924141619992346491e-01,
    1.903505780647854099132564024210137e-01,
    1.690047266392679028265834265985503e-01,
    1.406532597155259187451895905102379e-01,
    1.047900103222501838398763225415180e-01,
    6.309209262997855329070066318920429e-02,
    2.293532201052922496373200805896959e-02};
inline constexpr double gk_wg[4] = {
    4.179591836734693877551020408163265e-01,
    3.818300505051189449503697754889751e-01,
    2.797053914892766679014677714237796e-01,
    1.294849661688696932706114326790820e-01};

template <class T, class F>
void gk15(F&& f, double a, double b, T& kron, double& err, double& scale) {
  const double h = 0.5 * (b - a);
  const double c = 0.5 * (a + b);
  T fc = f(c);
  T resk = gk_wk[0] * fc;
  T resg = gk_wg[0] * fc;
  double resabs = gk_wk[0] * std::abs(fc);
  for (int j = 1; j < 8; ++j) {
    T f1 = f(c - h * gk_nodes[j]);
    T f2 = f(c + h * gk_nodes[j]);
    resk += gk_wk[j] * (f1 + f2);
    resabs += gk_wk[j] * (std::abs(f1) + std::abs(f2));
    if (j % 2 == 0) resg += gk_wg[j / 2] * (f1 + f2);
  }
  kron = resk * h;
  err = std::abs(resk - resg) * std::abs(h);
  scale = resabs * std::abs(h);
}

}  // namespace detail

/// Adaptive Gauss-Kronrod quadrature on a finite interval.
/// Tolerance is absolute + relative against the running estimate.
template <class T = double, class F>
T integrate(F&& f, double a, double b, double abs_tol = 1e-10,
            double rel_tol = 1e-10, int max_depth = 60) {
  struct Seg {
    double a, b, err;
    T val;
    int depth;
  };
  T v0;
  double e0, s0;
  detail::gk15<T>(f, a, b, v0, e0, s0);
  std::vector<Seg> segs{{a, b, e0, v0, 0}};
  T total = v0;
  double toterr = e0;
  for (int iter = 0; iter < 20000 && !segs.empty(); ++iter) {
    if (toterr <= abs_tol + rel_tol * std::abs(total)) break;
    // split the worst segment
    size_t wi = 0;
    for (size_t i = 1; i < segs.size(); ++i)
      if (segs[i].err > segs[wi].err) wi = i;
    Seg s = segs[wi];
    segs.erase(segs.begin() + wi);
    if (s.depth >= max_depth) continue;
    double m = 0.5 * (s.a + s.b);
    T v1, v2;
    double e1, e2, sc;
    detail::gk15<T>(f, s.a, m, v1, e1, sc);
    detail::gk15<T>(f, m, s.b, v2, e2, sc);
    total += v1 + v2 - s.val;
    toterr += e1 + e2 - s.err;
    segs.push_back({s.a, m, e1, v1, s.depth + 1});
    segs.push_back({m, s.b, e2, v2, s.depth + 1});
  }
  return total;
}

/// Adaptive quadrature on [a, inf) via x = a + u/(1-u).
template <class T = double, class F>
T integrate_half_line(F&& f, double a, double abs_tol = 1e-10,
                      double rel_tol = 1e-10) {
  auto g = [&](double u) -> T {
    double om = 1.0 - u;
    double x = a + u / om;
    return f(x) / (om * om);
  };
  return integrate<T>(g, 0.0, 1.0 - 1e-14, abs_tol, rel_tol);
}

/// Bracketed root solve: bisection (up to max_iter halvings) with a Newton
/// polish from secant slopes. Requires f(lo), f(hi) with opposite signs.
template <class F>
double bracketed_root(F&& f, double lo, double hi, double tol = 1e-12,
                      int max_iter = 80) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (!(flo * fhi < 0.0))
    throw std::domain_error("bracketed_root: endpoints do not bracket");
  double a = lo, b = hi, fa = flo;
  for (int i = 0; i < max_iter && (b - a) > tol * (1.0 + std::abs(a)); ++i) {
    double m = 0.5 * (a + b);
    double fm = f(m);
    if (fm == 0.0) return m;
    if (fa * fm < 0.0) {
      b = m;
    } else {
      a = m;
      fa = fm;
    }
  }
  // Newton polish via secant slope
  double x = 0.5 * (a + b);
  double fx = f(x);
  for (int i = 0; i < 6; ++i) {
    double h = std::max(1e-7 * (b - a), 1e-300);
    double d = (f(x + h) - f(x - h)) / (2 * h);
    if (d == 0.0) break;
    double xn = x - fx / d;
    if (xn <= a || xn >= b) break;
    double fxn = f(xn);
    if (std::abs(fxn) >= std::abs(fx)) break;
    x = xn;
    fx = fxn;
  }
  return x;
}

/// All roots of a polynomial sum_i c[i] z^i (c.back() != 0) by Durand-Kerner.
inline std::vector<cplx> polynomial_roots(const std::vector<cplx>& c,
                                          double eps = 1e-14,
                                          int max_iter = 200) {
  const int n = static_cast<int>(c.size()) - 1;
  if (n < 1) return {};
  std::vector<cplx> a(c.begin(), c.end());
  for (auto& v : a) v /= c.back();
  // radius bound and staggered start angles
  double r = 0.0;
  for (int i = 0; i < n; ++i) r = std::max(r, std::abs(a[i]));
  r = 1.0 + r;
  std::vector<cplx> z(n);
  for (int i = 0; i < n; ++i)
    z[i] = std::polar(r * 0.7, 2.0 * M_PI * i / n + 0.4);
  auto eval = [&](cplx x) {
    cplx s = 0.0;
    for (int i = n; i >= 0; --i) s = s * x + a[i];
    return s;
  };
  for (int it = 0; it < max_iter; ++it) {
    double delta = 0.0;
    for (int i = 0; i < n; ++i) {
      cplx num = eval(z[i]);
      cplx den = 1.0;
      for (int j = 0; j < n; ++j)
        if (j != i) den *= (z[i] - z[j]);
      cplx dz = num / den;
      z[i] -= dz;
      delta = std::max(delta, std::abs(dz));
    }
    if (delta < eps * (1.0 + r)) break;
  }
  return z;
}

/// Central difference first derivative with one Richardson step.
template <class F>
double deriv_central(F&& f, double x, double h) {
  double d1 = (f(x + h) - f(x - h)) / (2 * h);
  double d2 = (f(x + h / 2) - f(x - h / 2)) / h;
  return (4.0 * d2 - d1) / 3.0;
}

/// Central difference second derivative with one Richardson step.
template <class F>
double deriv2_central(F&& f, double x, double h) {
  double fx = f(x);
  double d1 = (f(x + h) - 2 * fx + f(x - h)) / (h * h);
  double d2 = (f(x + h / 2) - 2 * fx + f(x - h / 2)) / (h * h / 4);
  return (4.0 * d2 - d1) / 3.0;
}

}  // namespace mg1ps
