#include "qproc/density.hpp"

#include <cmath>

#include "doctest.h"
#include "qproc/orthopoly.hpp"

using namespace qproc;

namespace {
constexpr double kPi = 3.14159265358979323846;

double semicircle_cdf(double x) {
  return 0.5 +
         (x * std::sqrt(4.0 - x * x) + 4.0 * std::asin(0.5 * x)) / (4.0 * kPi);
}
}  // namespace

TEST_CASE("support geometry") {
  const Support s0 = support(0.0);
  CHECK(s0.lo == -2.0);
  CHECK(s0.hi == 2.0);
  CHECK(s0.bounded);
  const Support s75 = support(0.75);
  CHECK(s75.hi == doctest::Approx(4.0).epsilon(1e-15));
  CHECK_FALSE(support(1.0).bounded);
  CHECK_THROWS_AS(support(-1.2), std::domain_error);
}

TEST_CASE("stationary density closed forms") {
  CHECK(pdf_stationary(0.0, 1.0) ==
        doctest::Approx(0.3989422804014327).epsilon(1e-14));
  // q = 0 is the Wigner semicircle on [-2, 2]
  for (double x : {-1.9, -1.0, 0.0, 0.7, 1.5}) {
    CHECK(pdf_stationary(x, 0.0) ==
          doctest::Approx(std::sqrt(4.0 - x * x) / (2.0 * kPi))
              .epsilon(1e-12));
  }
  CHECK(pdf_stationary(3.0, 0.5) == 0.0);
  CHECK(pdf_stationary(-2.0, 0.0) == 0.0);  // endpoint convention
  CHECK(pdf_stationary(support(0.5).hi, 0.5) == 0.0);
}

TEST_CASE("transition density closed forms and collapse") {
  // rho = 0 equals the stationary density exactly
  for (double x : {-1.2, 0.0, 0.9}) {
    CHECK(pdf_transition(x, 0.7, 0.0, 0.5) == pdf_stationary(x, 0.5));
  }
  CHECK(pdf_transition(0.0, 0.0, 0.5, 1.0) ==
        doctest::Approx(1.0 / std::sqrt(2.0 * kPi * 0.75)).epsilon(1e-14));
  CHECK_THROWS_AS(pdf_transition(0.0, 9.0, 0.5, 0.5), std::domain_error);
  CHECK_THROWS_AS(pdf_transition(0.0, 0.1, 1.0, 0.5), std::domain_error);
}

TEST_CASE("transition density integrates to one") {
  for (double q : {-0.9, -0.5, 0.0, 0.5, 0.9}) {
    const QParam par(q);
    const double r = 2.0 / std::sqrt(1.0 - q);
    for (double rho : {0.0, 0.3, 0.8}) {
      for (double yf : {-0.7, 0.0, 0.5}) {
        const double v = integrate_support(
            [&](double x) { return pdf_transition(x, yf * r, rho, par); }, q,
            {});
        CHECK(v == doctest::Approx(1.0).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("mehler expansion") {
  // low term counts have closed partial sums
  const QParam par(0.5);
  const double f = pdf_stationary(0.2, par);
  CHECK(pdf_transition_mehler(0.2, -0.1, 0.4, 0.5, 1) ==
        doctest::Approx(f * (1.0 + 0.4 * 0.2 * -0.1)).epsilon(1e-13));
  CHECK(pdf_transition_mehler(0.2, -0.1, 0.0, 0.5, 40) ==
        doctest::Approx(f).epsilon(1e-14));
  // product-formula oracle
  CHECK(pdf_transition_mehler(0.2, -0.1, 0.4, 0.5, 80) ==
        doctest::Approx(pdf_transition(0.2, -0.1, 0.4, par)).epsilon(1e-8));
  CHECK_THROWS_AS(pdf_transition_mehler(2.7, 0.0, 0.4, 0.5, 10),
                  std::domain_error);
}

TEST_CASE("integrate_support on density moments") {
  const QParam par(0.5);
  QuadratureSpec spec;
  CHECK(integrate_support([&](double x) { return pdf_stationary(x, par); },
                          0.5, spec) == doctest::Approx(1.0).epsilon(1e-11));
  CHECK(integrate_support(
            [&](double x) { return x * pdf_stationary(x, par); }, 0.5,
            spec) == doctest::Approx(0.0).epsilon(1e-12));
  // H_2 H_3 are orthogonal
  const double v = integrate_support(
      [&](double x) {
        const PolySeq h = hermite_seq(3, x, 0.5);
        return h[2] * h[3] * pdf_stationary(x, par);
      },
      0.5, spec);
  CHECK(std::abs(v) <= 1e-10);
  // adaptive scheme agrees
  QuadratureSpec ad;
  ad.scheme = QuadScheme::kAdaptive;
  ad.abs_tol = 1e-11;
  CHECK(integrate_support([&](double x) { return pdf_stationary(x, par); },
                          0.5, ad) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_THROWS_AS(integrate_support([](double) { return 1.0; }, 1.0, spec),
                  std::domain_error);
}

TEST_CASE("gauss-hermite rule matches normal moments") {
  CHECK(integrate_gauss_hermite([](double) { return 1.0; }) ==
        doctest::Approx(1.0).epsilon(1e-14));
  CHECK(integrate_gauss_hermite([](double x) { return x * x; }) ==
        doctest::Approx(1.0).epsilon(1e-13));
  CHECK(integrate_gauss_hermite([](double x) { return std::pow(x, 8); }) ==
        doctest::Approx(105.0).epsilon(1e-12));
  // classical Hermite orthogonality at q = 1
  for (int n = 0; n <= 6; ++n) {
    for (int m = 0; m <= 6; ++m) {
      const double v = integrate_gauss_hermite([&](double x) {
        return hermite_seq(6, x, 1.0)[n] * hermite_seq(6, x, 1.0)[m];
      });
      const double target = n == m ? q_factorial(n, 1.0) : 0.0;
      CHECK(v == doctest::Approx(target).epsilon(1e-10).scale(
                     std::max(1.0, target)));
    }
  }
}

TEST_CASE("orthogonality and propagation under the densities") {
  for (double q : {-0.5, 0.0, 0.5}) {
    const QParam par(q);
    QuadratureSpec spec;
    for (int n = 0; n <= 5; ++n) {
      for (int m = n; m <= 5; ++m) {
        const double v = integrate_support(
            [&](double x) {
              const PolySeq h = hermite_seq(5, x, q);
              return h[n] * h[m] * pdf_stationary(x, par);
            },
            q, spec);
        const double target = n == m ? q_factorial(n, q) : 0.0;
        CHECK(std::abs(v - target) <= 1e-8 * std::max(1.0, target));
      }
    }
    // propagation at one (y, rho)
    const double y = 0.4, rho = 0.6;
    for (int n = 1; n <= 4; ++n) {
      const double v = integrate_support(
          [&](double x) {
            return hermite_seq(4, x, q)[n] * pdf_transition(x, y, rho, par);
          },
          q, spec);
      const double target = std::pow(rho, n) * hermite_seq(4, y, q)[n];
      CHECK(v == doctest::Approx(target).epsilon(1e-8).scale(1.0));
    }
  }
}

TEST_CASE("asc orthogonality target includes the pochhammer factor") {
  const double q = 0.5, rho = 0.6, y = 0.3;
  const QParam par(q);
  for (int n = 0; n <= 4; ++n) {
    for (int m = n; m <= 4; ++m) {
      const double v = integrate_support(
          [&](double x) {
            const PolySeq p = asc_seq(4, x, y, rho, q);
            return p[n] * p[m] * pdf_transition(x, y, rho, par);
          },
          q, {});
      const double target =
          n == m ? pochhammer(rho * rho, q, n) * q_factorial(n, q) : 0.0;
      CHECK(std::abs(v - target) <= 1e-7 * std::max(1.0, std::abs(target)));
    }
  }
}

TEST_CASE("chapman-kolmogorov pointwise") {
  const double q = 0.5, r1 = 0.7, r2 = 0.5;
  const QParam par(q);
  for (double x : {-0.4, 0.3, 1.0}) {
    for (double z : {-0.9, 0.2}) {
      const double lhs = integrate_support(
          [&](double y) {
            return pdf_transition(x, y, r1, par) *
                   pdf_transition(y, z, r2, par);
          },
          q, {});
      CHECK(lhs == doctest::Approx(pdf_transition(x, z, r1 * r2, par))
                       .epsilon(1e-7));
    }
  }
}

TEST_CASE("cdf and quantile") {
  const QParam par(0.5);
  const double r = support(0.5).hi;
  CHECK(cdf_stationary(-r, par) == 0.0);
  CHECK(cdf_stationary(r, par) == 1.0);
  CHECK(quantile_stationary(0.5, par) == doctest::Approx(0.0).epsilon(1e-10));
  // round trip on the interior
  for (double xf : {-0.9, -0.35, 0.0, 0.6, 0.92}) {
    const double x = xf * r;
    CHECK(quantile_stationary(cdf_stationary(x, par), par) ==
          doctest::Approx(x).epsilon(1e-9));
  }
  // semicircle closed form at q = 0
  const QParam par0(0.0);
  for (double x : {-1.5, -0.3, 0.7, 1.8}) {
    CHECK(cdf_stationary(x, par0) ==
          doctest::Approx(semicircle_cdf(x)).epsilon(1e-10));
  }
  // q = 1 gaussian branch
  CHECK(cdf_stationary(0.0, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(quantile_stationary(0.975, 1.0) ==
        doctest::Approx(1.959963984540054).epsilon(1e-9));
  CHECK_THROWS_AS(quantile_stationary(1.5, par), std::domain_error);
}

TEST_CASE("density symmetry") {
  for (double q : {-0.5, 0.5, 0.9}) {
    const QParam par(q);
    const double r = 2.0 / std::sqrt(1.0 - q);
    for (double xf : {0.2, 0.6, 0.95}) {
      CHECK(pdf_stationary(xf * r, par) ==
            doctest::Approx(pdf_stationary(-xf * r, par)).epsilon(1e-13));
      CHECK(pdf_transition(xf * r, 0.4 * r, 0.7, par) ==
            doctest::Approx(pdf_transition(-xf * r, -0.4 * r, 0.7, par))
                .epsilon(1e-12));
    }
  }
}
