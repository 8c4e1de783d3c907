#include "qproc/qseries.hpp"

#include <cmath>
#include <vector>

#include "doctest.h"

using namespace qproc;

TEST_CASE("q_number basics") {
  CHECK(q_number(0, 0.5) == 0.0);
  CHECK(q_number(3, 1.0) == 3.0);
  CHECK(q_number(3, 0.5) == doctest::Approx(1.75).epsilon(1e-15));
  CHECK(q_number(1, -0.7) == 1.0);
  CHECK_THROWS_AS(q_number(2, 1.5), std::domain_error);
  CHECK_THROWS_AS(q_number(-1, 0.5), std::domain_error);
}

TEST_CASE("q_factorial basics") {
  CHECK(q_factorial(0, 0.3) == 1.0);
  CHECK(q_factorial(4, 1.0) == 24.0);
  // [1] [2] [3] at q = 1/2 is 1 * 1.5 * 1.75
  CHECK(q_factorial(3, 0.5) == doctest::Approx(2.625).epsilon(1e-15));
}

TEST_CASE("q_binomial conventions and symmetry") {
  CHECK(q_binomial(5, 7, 0.5) == 0.0);
  CHECK(q_binomial(5, -1, 0.5) == 0.0);
  CHECK(q_binomial(4, 2, 1.0) == doctest::Approx(6.0));
  // direct ratio of q-factorials as the oracle
  const double oracle =
      q_factorial(4, 0.5) / (q_factorial(2, 0.5) * q_factorial(2, 0.5));
  CHECK(oracle == doctest::Approx(2.1875).epsilon(1e-15));
  CHECK(q_binomial(4, 2, 0.5) == doctest::Approx(oracle).epsilon(1e-14));
  for (double q : {-0.8, -0.2, 0.4, 0.9}) {
    for (int n = 0; n <= 10; ++n)
      for (int k = 0; k <= n; ++k)
        CHECK(q_binomial(n, k, q) ==
              doctest::Approx(q_binomial(n, n - k, q)).epsilon(1e-13));
  }
}

TEST_CASE("pochhammer basics") {
  CHECK(pochhammer(0.7, 0.5, 0) == 1.0);
  CHECK(pochhammer(1.0, 0.4, 3) == 0.0);
  CHECK(pochhammer(0.5, 0.5, 2) == doctest::Approx(0.375).epsilon(1e-15));
}

TEST_CASE("pochhammer identity (q|q)_n = (1-q)^n [n]_q!") {
  for (double q : {-0.9, -0.3, 0.0, 0.5, 0.95, 1.0}) {
    for (int n = 0; n <= 12; ++n) {
      const double lhs = pochhammer(q, q, n);
      const double rhs = std::pow(1.0 - q, n) * q_factorial(n, q);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
  }
}

TEST_CASE("q_binomial equals pochhammer ratio") {
  for (double q : {-0.7, 0.3, 0.8}) {
    for (int n = 1; n <= 9; ++n) {
      for (int k = 0; k <= n; ++k) {
        const double ratio = pochhammer(q, q, n) /
                             (pochhammer(q, q, k) * pochhammer(q, q, n - k));
        CHECK(q_binomial(n, k, q) == doctest::Approx(ratio).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("pochhammer_inf against long products") {
  CHECK(pochhammer_inf(0.0, 0.5) == 1.0);
  {
    // 50-term brute force at q = 0.5 is already converged to 1e-12
    double brute = 1.0, p = 1.0;
    for (int i = 0; i < 50; ++i) {
      brute *= (1.0 - 0.5 * p);
      p *= 0.5;
    }
    CHECK(pochhammer_inf(0.5, QParam(0.5, 1e-12)) ==
          doctest::Approx(brute).epsilon(1e-12));
  }
  {
    // log-sum evaluation of the same product at q = 0.9
    double logsum = 0.0, p = 1.0;
    for (int i = 0; i < 2000; ++i) {
      logsum += std::log1p(-0.9 * p);
      p *= 0.9;
    }
    CHECK(pochhammer_inf(0.9, QParam(0.9, 1e-14)) ==
          doctest::Approx(std::exp(logsum)).epsilon(1e-12));
    CHECK(log_pochhammer_inf(0.9, QParam(0.9, 1e-14)) ==
          doctest::Approx(logsum).epsilon(1e-12));
  }
}

TEST_CASE("pochhammer_inf idempotent under larger term caps") {
  const double a = pochhammer_inf(0.6, QParam(0.7, 1e-13, 10'000));
  const double b = pochhammer_inf(0.6, QParam(0.7, 1e-13, 100'000));
  CHECK(a == b);
  CHECK_THROWS_AS(pochhammer_inf(0.5, QParam(1.0)), std::domain_error);
}

TEST_CASE("w_sum") {
  CHECK(w_sum(0, 0.5) == 1.0);
  CHECK(w_sum(3, 1.0) == 8.0);
  CHECK(w_sum(2, 0.5) == doctest::Approx(3.5).epsilon(1e-15));
}

TEST_CASE("classical values at q = 1 and continuity toward them") {
  CHECK(q_number(7, 1.0) == 7.0);
  CHECK(q_factorial(6, 1.0) == 720.0);
  CHECK(w_sum(6, 1.0) == 64.0);
  // continuity: q -> 1 approaches the classical values
  CHECK(q_factorial(6, 1.0 - 1e-9) == doctest::Approx(720.0).epsilon(1e-6));
  CHECK(q_binomial(6, 3, 1.0 - 1e-9) == doctest::Approx(20.0).epsilon(1e-6));
}

TEST_CASE("QParam validation") {
  CHECK_THROWS_AS(QParam(-1.0), std::domain_error);
  CHECK_THROWS_AS(QParam(1.0000001), std::domain_error);
  CHECK_THROWS_AS(QParam(0.5, -1e-9), std::domain_error);
  CHECK_THROWS_AS(QParam(0.5, 1e-12, 0), std::domain_error);
  try {
    QParam bad(1.5);
    CHECK(false);
  } catch (const std::domain_error& e) {
    CHECK(std::string(e.what()).find("does not exist") != std::string::npos);
  }
  CHECK_NOTHROW(QParam(1.0));
  CHECK_NOTHROW(QParam(-0.999999));
}
