#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

#include "mg1ps/numeric.hpp"
#include "mg1ps/specfun.hpp"

namespace mg1ps {

/// Tail law b(y) ~ M y^q exp(-N y^r), 1 <= r <= 2.
struct TailSpec {
  double M = 0.0;
  double N = 0.0;
  double q = 0.0;
  double r = 1.0;
  void validate() const {
    if (!(M > 0.0) || !(N > 0.0))
      throw std::invalid_argument("TailSpec: M and N must be positive");
    if (!(r >= 1.0 && r <= 2.0))
      throw std::invalid_argument("TailSpec: r must lie in [1,2]");
  }
};

enum class DistKind { Exponential, Erlang, Deterministic, FiniteSupport, GeneralAnalytic };

/// Service-time distribution: density, LST with derivatives, moments and the
/// metadata (small-y law, tail law, support edge) that drives regime selection.
/// Immutable after construction; all evaluation is const and reentrant.
class ServiceDistribution {
 public:
  using Density = std::function<double(double)>;

  static ServiceDistribution exponential(double mu) {
    require_positive(mu, "mu");
    ServiceDistribution d;
    d.kind_ = DistKind::Exponential;
    d.mu_ = mu;
    d.shape_ = 1;
    d.eps0_ = mu;
    d.tail_ = TailSpec{mu, mu, 0.0, 1.0};
    return d;
  }

  static ServiceDistribution erlang(int k, double mu) {
    require_positive(mu, "mu");
    if (k < 1) throw std::invalid_argument("erlang: shape k must be >= 1");
    ServiceDistribution d;
    d.kind_ = k == 1 ? DistKind::Exponential : DistKind::Erlang;
    d.mu_ = mu;
    d.shape_ = k;
    d.eps0_ = k * mu;
    // b(y) ~ M y^q e^{-N y}: M = (k mu)^k/(k-1)!, N = k mu, q = k-1
    d.tail_ = TailSpec{std::pow(k * mu, k) / std::tgamma(double(k)), k * mu,
                       double(k - 1), 1.0};
    return d;
  }

  static ServiceDistribution deterministic(double mu) {
    require_positive(mu, "mu");
    ServiceDistribution d;
    d.kind_ = DistKind::Deterministic;
    d.mu_ = mu;
    d.eps0_ = std::numeric_limits<double>::infinity();
    return d;
  }

  /// Uniform on [0, A] (edge law: alpha* = 1/A, nu* = 1).
  static ServiceDistribution uniform(double A) {
    require_positive(A, "A");
    ServiceDistribution d;
    d.kind_ = DistKind::FiniteSupport;
    d.A_ = A;
    d.mu_ = 2.0 / A;  // m1 = A/2
    d.alpha_star_ = 1.0 / A;
    d.nu_star_ = 1.0;
    d.eps0_ = std::numeric_limits<double>::infinity();
    return d;
  }

  /// User-supplied analytic density with a declared analyticity abscissa and
  /// declared small-y behavior b(y) ~ alpha y^{nu-1}.
  static ServiceDistribution general(Density b, double eps0, double alpha,
                                     double nu,
                                     std::optional<TailSpec> tail = {}) {
    if (!b) throw std::invalid_argument("general: density callback required");
    require_positive(eps0, "eps0");
    require_positive(alpha, "alpha");
    require_positive(nu, "nu");
    ServiceDistribution d;
    d.kind_ = DistKind::GeneralAnalytic;
    d.density_ = std::move(b);
    d.eps0_ = eps0;
    d.alpha_ = alpha;
    d.nu_ = nu;
    if (tail) tail->validate();
    d.tail_ = tail;
    double m1 = d.moment_by_quadrature(1);
    d.mu_ = 1.0 / m1;
    double mass = d.moment_by_quadrature(0);
    if (std::abs(mass - 1.0) > 1e-8)
      throw std::invalid_argument("general: density does not integrate to 1");
    return d;
  }

  DistKind kind() const { return kind_; }
  double mu() const { return mu_; }
  int erlang_k() const { return shape_; }
  double support_limit() const { return A_; }
  double analyticity_abscissa() const { return eps0_; }
  double alpha_star() const { return alpha_star_; }
  double nu_star() const { return nu_star_; }

  const std::optional<TailSpec>& tail() const { return tail_; }

  /// Attach (or override) a declared tail law.
  void declare_tail(TailSpec t) {
    t.validate();
    tail_ = t;
  }

  /// Density b(y); throws for the deterministic kind (point mass).
  double density(double y) const {
    if (y < 0.0) return 0.0;
    switch (kind_) {
      case DistKind::Exponential:
        return mu_ * std::exp(-mu_ * y);
      case DistKind::Erlang: {
        int k = shape_;
        return std::pow(k * mu_, k) * std::pow(y, k - 1) *
               std::exp(-k * mu_ * y) / std::tgamma(double(k));
      }
      case DistKind::Deterministic:
        throw std::domain_error("density: deterministic kind is a point mass");
      case DistKind::FiniteSupport:
        return y <= A_ ? 1.0 / A_ : 0.0;
      case DistKind::GeneralAnalytic:
        return density_(y);
    }
    return 0.0;
  }

  /// Laplace-Stieltjes transform b^(tau) = int_0^inf e^{-tau y} b(y) dy.
  cplx lst(cplx tau) const {
    check_domain(tau);
    switch (kind_) {
      case DistKind::Exponential:
        return mu_ / (mu_ + tau);
      case DistKind::Erlang: {
        double km = shape_ * mu_;
        return std::pow(km / (km + tau), shape_);
      }
      case DistKind::Deterministic:
        return std::exp(-tau / mu_);
      case DistKind::FiniteSupport: {
        cplx z = A_ * tau;
        if (std::abs(z) < 0.5) {
          // (1 - e^{-z})/z = sum_j (-z)^j/(j+1)!
          cplx term = 1.0, sum = 1.0;
          for (int j = 1; j <= 30; ++j) {
            term *= -z / double(j + 1);
            sum += term;
            if (std::abs(term) < 1e-20 * (1.0 + std::abs(sum))) break;
          }
          return sum;
        }
        return (1.0 - std::exp(-z)) / z;
      }
      case DistKind::GeneralAnalytic:
        return lst_quadrature(tau, 0);
    }
    return 0.0;
  }

  /// 1 - b^(tau), computed without cancellation near tau = 0.
  cplx one_minus_lst(cplx tau) const {
    check_domain(tau);
    switch (kind_) {
      case DistKind::Exponential:
        return tau / (mu_ + tau);
      case DistKind::Erlang: {
        double km = shape_ * mu_;
        cplx x = tau / (km + tau);
        // 1 - (1-x)^k
        return -expm1_c(double(shape_) * log1p_c(-x));
      }
      case DistKind::Deterministic:
        return -expm1_c(-tau / mu_);
      case DistKind::FiniteSupport: {
        cplx z = A_ * tau;
        if (std::abs(z) < 0.5) {
          // (z - 1 + e^{-z})/z = sum_{j>=2} (-z)^j/j! / z
          cplx term = -z, sum = 0.0;
          for (int j = 2; j <= 40; ++j) {
            term *= -z / double(j);
            sum += term;
            if (std::abs(term) < 1e-20 * (1.0 + std::abs(sum))) break;
          }
          return sum / z;
        }
        return (z - 1.0 + std::exp(-z)) / z;
      }
      case DistKind::GeneralAnalytic: {
        if (std::abs(tau) < 0.25 * eps0_) {
          cplx v = integrate_half_line<cplx>(
              [&](double y) -> cplx {
                return -expm1_c(-tau * y) * density_(y);
              },
              0.0, 1e-12, 1e-12);
          return v;
        }
        return 1.0 - lst_quadrature(tau, 0);
      }
    }
    return 0.0;
  }

  /// d^order/dtau^order b^(tau), order in 1..4 (closed forms; quadrature of
  /// the differentiated defining integral for the general kind).
  cplx lst_deriv(cplx tau, int order) const {
    if (order < 1 || order > 4)
      throw std::invalid_argument("lst_deriv: order must be in 1..4");
    check_domain(tau);
    switch (kind_) {
      case DistKind::Exponential: {
        double sign = (order % 2 == 0) ? 1.0 : -1.0;
        return sign * std::tgamma(order + 1.0) * mu_ /
               std::pow(mu_ + tau, order + 1);
      }
      case DistKind::Erlang: {
        int k = shape_;
        double km = k * mu_;
        double poch = 1.0;
        for (int j = 0; j < order; ++j) poch *= (k + j);
        double sign = (order % 2 == 0) ? 1.0 : -1.0;
        return sign * poch * std::pow(km, k) / std::pow(km + tau, k + order);
      }
      case DistKind::Deterministic:
        return std::pow(-1.0 / mu_, order) * std::exp(-tau / mu_);
      case DistKind::FiniteSupport:
        return uniform_lst_deriv(tau, order);
      case DistKind::GeneralAnalytic:
        return lst_quadrature(tau, order);
    }
    return 0.0;
  }

  /// Meromorphic continuation of b^ for closed-form kinds; residue
  /// computations evaluate at poles left of the integral's abscissa.
  cplx lst_analytic(cplx tau) const {
    switch (kind_) {
      case DistKind::Exponential:
        return mu_ / (mu_ + tau);
      case DistKind::Erlang: {
        double km = shape_ * mu_;
        return std::pow(km / (km + tau), shape_);
      }
      case DistKind::Deterministic:
      case DistKind::FiniteSupport:
        return lst(tau);  // entire
      case DistKind::GeneralAnalytic:
        return lst(tau);  // no continuation available
    }
    return 0.0;
  }

  cplx lst_deriv_analytic(cplx tau, int order) const {
    if (kind_ == DistKind::Exponential || kind_ == DistKind::Erlang) {
      int k = shape_;
      double km = k * mu_;
      double poch = 1.0;
      for (int j = 0; j < order; ++j) poch *= (k + j);
      double sign = (order % 2 == 0) ? 1.0 : -1.0;
      return sign * poch * std::pow(km, k) / std::pow(km + tau, k + order);
    }
    return lst_deriv(tau, order);
  }

  /// Moment m_k = int y^k b(y) dy, k in 0..5 (m5 feeds Q_*).
  double moment(int k) const {
    if (k < 0 || k > 5) throw std::invalid_argument("moment: k must be 0..5");
    if (k == 0) return 1.0;
    switch (kind_) {
      case DistKind::Exponential: {
        double m = 1.0;
        for (int j = 1; j <= k; ++j) m *= j / mu_;
        return m;
      }
      case DistKind::Erlang: {
        // m_j = (k+j-1)! / (k! k^{j-1} mu^j) = prod_{i=K+1}^{K+j-1} i / (K^{j-1} mu^j)
        int K = shape_;
        double num = 1.0;
        for (int j = K + 1; j <= K + k - 1; ++j) num *= j;
        return num / (std::pow(double(K), k - 1) * std::pow(mu_, k));
      }
      case DistKind::Deterministic:
        return std::pow(1.0 / mu_, k);
      case DistKind::FiniteSupport:
        return std::pow(A_, k) / (k + 1.0);
      case DistKind::GeneralAnalytic:
        return moment_by_quadrature(k);
    }
    return 0.0;
  }

  /// Tail of the equilibrium (stationary-residual) distribution,
  /// H(x) = mu int_x^inf (1 - B(y)) dy = mu E[(Y-x)+].
  double equilibrium_tail(double x) const {
    if (x <= 0.0) return 1.0;
    switch (kind_) {
      case DistKind::Exponential:
        return std::exp(-mu_ * x);
      case DistKind::Erlang: {
        int k = shape_;
        double z = k * mu_ * x;
        double term = 1.0, sum = 0.0;
        for (int i = 0; i < k; ++i) {
          sum += (k - i) * term;
          term *= z / (i + 1.0);
        }
        return std::exp(-z) * sum / k;
      }
      case DistKind::Deterministic:
        return std::max(0.0, 1.0 - mu_ * x);
      case DistKind::FiniteSupport:
        return x >= A_ ? 0.0 : std::pow((A_ - x) / A_, 2);
      case DistKind::GeneralAnalytic:
        return mu_ * integrate_half_line<double>(
                         [&](double u) { return (u - x) * density_(u); }, x,
                         1e-12, 1e-10);
    }
    return 0.0;
  }

  /// Small-y law b(y) ~ alpha y^{nu-1}: returns (alpha, nu).
  std::pair<double, double> small_y_params() const {
    switch (kind_) {
      case DistKind::Exponential:
        return {mu_, 1.0};
      case DistKind::Erlang: {
        int k = shape_;
        return {std::pow(k * mu_, k) / std::tgamma(double(k)), double(k)};
      }
      case DistKind::Deterministic:
        throw std::domain_error("small_y_params: deterministic has no density at 0");
      case DistKind::FiniteSupport:
        return {1.0 / A_, 1.0};
      case DistKind::GeneralAnalytic:
        return {alpha_, nu_};
    }
    return {0.0, 0.0};
  }

 private:
  static void require_positive(double v, const char* name) {
    if (!(v > 0.0))
      throw std::invalid_argument(std::string(name) + " must be positive");
  }
  void check_domain(cplx tau) const {
    if (tau.real() <= -eps0_)
      throw std::domain_error("lst: tau left of analyticity abscissa");
  }
  static cplx expm1_c(cplx z) {
    if (std::abs(z) > 0.3) return std::exp(z) - 1.0;
    cplx term = 1.0, sum = 0.0;
    for (int j = 1; j <= 30; ++j) {
      term *= z / double(j);
      sum += term;
      if (std::abs(term) < 1e-20 * (1.0 + std::abs(sum))) break;
    }
    return sum;
  }
  static cplx log1p_c(cplx x) {
    if (std::abs(x) > 0.3) return std::log(1.0 + x);
    cplx term = -1.0, sum = 0.0;
    for (int j = 1; j <= 40; ++j) {
      term *= -x;
      sum += term / double(j);
      if (std::abs(term) < 1e-20 * (1.0 + std::abs(sum)) && j > 3) break;
    }
    return sum;
  }

  cplx uniform_lst_deriv(cplx tau, int n) const {
    cplx z = A_ * tau;
    if (std::abs(z) < 0.5) {
      // b^ = sum_j (-A)^j tau^j / (j+1)! ; differentiate termwise
      cplx sum = 0.0;
      for (int j = n; j <= n + 40; ++j) {
        double c = 1.0;  // j!/(j-n)! / (j+1)!  = 1/((j+1) (j-n)!)
        for (int i = 1; i <= j - n; ++i) c /= i;
        c /= (j + 1.0);
        cplx term = std::pow(-A_, j) * std::pow(tau, j - n) * c;
        sum += term;
        if (std::abs(term) < 1e-20 * (1.0 + std::abs(sum)) && j > n + 3) break;
      }
      return sum;
    }
    // d^n/dtau^n [(1 - e^{-A tau})/(A tau)] via Leibniz on (1/tau) and (1-e^{-A tau})/A
    cplx sum = 0.0;
    double binom = 1.0;
    for (int j = 0; j <= n; ++j) {
      // d^{n-j}/dtau^{n-j} (1/tau) = (-1)^{n-j} (n-j)! tau^{-(n-j+1)}
      double fact = 1.0;
      for (int i = 2; i <= n - j; ++i) fact *= i;
      double sgn = ((n - j) % 2 == 0) ? 1.0 : -1.0;
      cplx left = sgn * fact / std::pow(tau, n - j + 1);
      cplx right;  // d^j/dtau^j (1 - e^{-A tau})/A
      if (j == 0)
        right = (1.0 - std::exp(-z)) / A_;
      else
        right = -std::pow(-A_, j) * std::exp(-z) / A_;
      sum += binom * left * right;
      binom *= double(n - j) / double(j + 1);
    }
    return sum;
  }

  cplx lst_quadrature(cplx tau, int n) const {
    return integrate_half_line<cplx>(
        [&](double y) -> cplx {
          double w = density_(y) * std::pow(-y, n);
          return w * std::exp(-tau * y);
        },
        0.0, 1e-10, 1e-11);
  }
  double moment_by_quadrature(int k) const {
    return integrate_half_line<double>(
        [&](double y) { return std::pow(y, k) * density_(y); }, 0.0, 1e-11,
        1e-11);
  }

  DistKind kind_ = DistKind::Exponential;
  double mu_ = 1.0;
  int shape_ = 1;
  double A_ = 0.0;
  double eps0_ = 1.0;
  double alpha_ = 0.0, nu_ = 1.0;          // small-y law (general kind)
  double alpha_star_ = 0.0, nu_star_ = 0.0;  // support-edge law
  std::optional<TailSpec> tail_;
  Density density_;
};

/// Arrival rate plus service distribution; requires rho = lambda/mu < 1.
struct ModelParams {
  double lambda;
  ServiceDistribution dist;

  ModelParams(double lam, ServiceDistribution d)
      : lambda(lam), dist(std::move(d)) {
    if (!(lambda > 0.0))
      throw std::invalid_argument("ModelParams: lambda must be positive");
    if (!(rho() < 1.0))
      throw std::invalid_argument("ModelParams: requires rho = lambda/mu < 1");
  }

  double mu() const { return dist.mu(); }
  double rho() const { return lambda / dist.mu(); }
  double eps() const { return 1.0 - rho(); }
};

/// Parse the CLI distribution grammar:
///   exp:mu=1 | erlang:k=2,mu=1 | det:mu=1 | uniform:a=2
/// with an optional tail clause appended as ";tail:M=..,N=..,q=..,r=..".
inline ServiceDistribution parse_dist_spec(const std::string& spec) {
  auto fail = [&](const std::string& why, size_t pos) {
    throw std::invalid_argument("dist spec '" + spec + "': " + why +
                                " (at position " + std::to_string(pos) + ")");
  };
  std::string base = spec, tailpart;
  if (auto semi = spec.find(';'); semi != std::string::npos) {
    base = spec.substr(0, semi);
    tailpart = spec.substr(semi + 1);
  }
  auto colon = base.find(':');
  if (colon == std::string::npos) fail("missing ':'", 0);
  std::string name = base.substr(0, colon);
  // parse key=value pairs
  auto parse_kv = [&](const std::string& s, size_t offset) {
    std::vector<std::pair<std::string, double>> kv;
    size_t i = 0;
    while (i < s.size()) {
      auto comma = s.find(',', i);
      std::string item = s.substr(i, comma == std::string::npos ? std::string::npos : comma - i);
      auto eq = item.find('=');
      if (eq == std::string::npos) fail("expected key=value in '" + item + "'", offset + i);
      std::string key = item.substr(0, eq);
      try {
        kv.emplace_back(key, std::stod(item.substr(eq + 1)));
      } catch (const std::exception&) {
        fail("bad number for '" + key + "'", offset + i + eq + 1);
      }
      if (comma == std::string::npos) break;
      i = comma + 1;
    }
    return kv;
  };
  auto kvs = parse_kv(base.substr(colon + 1), colon + 1);
  auto get = [&](const std::string& key, std::optional<double> dflt =
                                             {}) -> double {
    for (auto& [k, v] : kvs)
      if (k == key) return v;
    if (dflt) return *dflt;
    fail("missing field '" + key + "'", colon);
    return 0.0;
  };

  ServiceDistribution d = ServiceDistribution::exponential(1.0);
  if (name == "exp") {
    d = ServiceDistribution::exponential(get("mu"));
  } else if (name == "erlang") {
    double kf = get("k");
    if (kf < 1.0 || kf != std::floor(kf))
      fail("field 'k' must be a positive integer", colon);
    d = ServiceDistribution::erlang(static_cast<int>(kf), get("mu"));
  } else if (name == "det") {
    d = ServiceDistribution::deterministic(get("mu"));
  } else if (name == "uniform") {
    d = ServiceDistribution::uniform(get("a"));
  } else {
    fail("unknown kind '" + name + "'", 0);
  }

  if (!tailpart.empty()) {
    if (tailpart.rfind("tail:", 0) != 0) fail("expected 'tail:' clause", base.size() + 1);
    auto tkv = parse_kv(tailpart.substr(5), base.size() + 6);
    auto tget = [&](const std::string& key) -> double {
      for (auto& [k, v] : tkv)
        if (k == key) return v;
      fail("missing tail field '" + key + "'", base.size() + 1);
      return 0.0;
    };
    d.declare_tail(TailSpec{tget("M"), tget("N"), tget("q"), tget("r")});
  }
  return d;
}

}  // namespace mg1ps
