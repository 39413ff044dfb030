#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "mg1ps/specfun.hpp"
#include "oracles.hpp"

using namespace mg1ps;
using Catch::Approx;

TEST_CASE("gamma_fn basics") {
  CHECK(gamma_fn(1.0) == Approx(1.0).epsilon(1e-12));
  CHECK(gamma_fn(0.5) == Approx(std::sqrt(M_PI)).epsilon(1e-12));
  CHECK(gamma_fn(4.0) == Approx(6.0).epsilon(1e-12));
  CHECK_THROWS_AS(gamma_fn(0.0), std::domain_error);
  CHECK_THROWS_AS(gamma_fn(-2.0), std::domain_error);
}

TEST_CASE("erfc basics and asymptotics") {
  CHECK(mg1ps::erfc(0.0) == Approx(1.0).epsilon(1e-12));
  CHECK(mg1ps::erfc(-1.0) + mg1ps::erfc(1.0) == Approx(2.0).epsilon(1e-12));
  // erfc(z) ~ e^{-z^2}/(sqrt(pi) z); the deviation at finite z is 1/(2z^2)
  // to leading order (1.96% at z=5, 0.5% at z=10)
  for (double z : {5.0, 10.0}) {
    double asym = std::exp(-z * z) / (std::sqrt(M_PI) * z);
    double dev = 1.0 - mg1ps::erfc(z) / asym;
    CHECK(dev == Approx(0.5 / (z * z) - 0.75 / std::pow(z, 4)).epsilon(0.02));
  }
  // erfcx consistency where both paths are exact
  CHECK(erfcx(2.0) == Approx(std::exp(4.0) * std::erfc(2.0)).epsilon(1e-13));
}

TEST_CASE("erfcx: both evaluation paths agree near the switch") {
  for (double x : {24.99, 25.01}) {
    double direct = std::exp(x * x) * std::erfc(x);
    CHECK(erfcx(x) == Approx(direct).epsilon(1e-10));
  }
}

TEST_CASE("hyper_0Fk") {
  // z = 0 gives 1 for any parameter list
  std::vector<double> b1{2.0};
  CHECK(hyper_0Fk(b1, 0.0) == Approx(1.0));
  // 0F1(;2;1) = I_1(2) (frozen from the independent series oracle)
  CHECK(hyper_0Fk(b1, 1.0) == Approx(1.59063685463732906).epsilon(1e-13));
  CHECK(hyper_0Fk(b1, 1.0) ==
        Approx(oracle::hyper_0Fk_series({2.0}, 1.0)).epsilon(1e-12));
  // 0F2(;1.5,2;0.25), frozen from the 200-term oracle at two precisions
  std::vector<double> b2{1.5, 2.0};
  CHECK(hyper_0Fk(b2, 0.25) == Approx(1.08473051241724858).epsilon(1e-13));
  CHECK(hyper_0Fk(b2, 0.25) ==
        Approx(oracle::hyper_0Fk_series({1.5, 2.0}, 0.25)).epsilon(1e-12));
  CHECK_THROWS_AS(hyper_0Fk(std::vector<double>{-1.0}, 0.5), std::domain_error);
}

TEST_CASE("hyper_0Fk matches the series identity") {
  // sum_m z^m k^{km}/((m+1)!(km+k-1)!) = 0Fk([];[1+1/k,..,2-1/k,2];z)/(k-1)!
  for (int k : {1, 2, 3}) {
    std::vector<double> lower;
    for (int j = 1; j < k; ++j) lower.push_back(1.0 + double(j) / k);
    lower.push_back(2.0);
    double kfact = std::tgamma(double(k));
    for (double z : {0.1, 0.7, 2.0, 5.0}) {
      CHECK(hyper_0Fk(lower, z) / kfact ==
            Approx(oracle::hyper_identity_lhs(k, z)).epsilon(1e-10));
    }
  }
}

TEST_CASE("pcf_D closed forms") {
  CHECK(pcf_D(0, 2.0) == Approx(std::exp(-1.0)).epsilon(1e-13));
  CHECK(pcf_D(-1, 0.0) == Approx(std::sqrt(M_PI / 2.0)).epsilon(1e-13));
  // D_{-2}(1), frozen from the integral-representation oracle
  CHECK(pcf_D(-2, 1.0) == Approx(0.268157041991744193).epsilon(1e-10));
  CHECK(pcf_D(-2, 1.0) == Approx(oracle::pcf_D_integral(2, 1.0)).epsilon(1e-9));
  CHECK_THROWS_AS(pcf_D(1, 0.0), std::domain_error);
  CHECK_THROWS_AS(pcf_D(-61, 0.0), std::domain_error);
}

TEST_CASE("pcf_D three-term recurrence residual (property)") {
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> U(-3.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    double z = U(rng);
    for (int l = 1; l <= 9; ++l) {
      // D_{nu+1} - z D_nu + nu D_{nu-1} = 0 with nu = -l
      double lhs = pcf_D(-l + 1, z) - z * pcf_D(-l, z) - l * pcf_D(-l - 1, z);
      double scale = std::abs(pcf_D(-l + 1, z)) + std::abs(z * pcf_D(-l, z)) +
                     std::abs(l * pcf_D(-l - 1, z));
      CHECK(std::abs(lhs) < 1e-8 * std::max(scale, 1e-30));
    }
  }
}

TEST_CASE("pcf_D deep orders against the integral representation") {
  for (int m : {5, 12, 25, 40}) {
    for (double z : {0.5, 3.0, 8.0}) {
      CHECK(pcf_D(-m, z) == Approx(oracle::pcf_D_integral(m, z)).epsilon(5e-8));
    }
  }
}
