#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "qproc/interp.hpp"
#include "qproc/qseries.hpp"

// Stationary density f_N(x|q), conditional density f_CN(x|y,rho,q), the
// Mehler-type expansion relating them, support geometry, quadrature over
// the support, and the stationary CDF/quantile pair backing exact
// sampling.
//
// For q < 1:
//   f_N(x|q) = sqrt(1-q) (q|q)_inf / (2 pi sqrt(4-(1-q)x^2))
//              * prod_k ((1+q^k)^2 - (1-q) x^2 q^k)     on S(q),
//   f_CN(x|y,rho,q) = sqrt(1-q) (rho^2|q)_inf (q|q)_inf
//              / (2 pi sqrt(4-(1-q)x^2))
//              * prod_k ((1+q^k)^2 - (1-q) x^2 q^k)
//                / ((1-rho^2 q^{2k})^2
//                   - (1-q) rho q^k (1+rho^2 q^{2k}) x y
//                   + (1-q) rho^2 (x^2+y^2) q^{2k}),
// and at q = 1 both collapse to the Gaussian N(0,1) resp. N(rho y, 1-rho^2).
// Products are evaluated in log space: the (q|q)_inf prefactor and the
// long factor products underflow near q = 0.95 otherwise.

namespace qproc {

struct Support {
  double lo;
  double hi;
  bool bounded;
};

// S(q) = [-2/sqrt(1-q), 2/sqrt(1-q)] for q < 1, the whole line at q = 1.
Support support(double q);

// Stationary density. Exactly 0 outside S(q); endpoint values return 0 so
// the 1/sqrt factor never produces a NaN or infinity (the endpoints have
// measure zero and integrals run in theta space anyway).
double pdf_stationary(double x, const QParam& policy);
double pdf_stationary(double x, double q);

// Conditional (transition) density of the next state at x given current
// state y, one-step correlation rho. Requires |rho| < 1 and y in S(q).
// rho = 0 reproduces pdf_stationary exactly (every y-dependent factor is
// identically 1).
double pdf_transition(double x, double y, double rho, const QParam& policy);
double pdf_transition(double x, double y, double rho, double q);

// Mehler-type partial sum
//   f_N(x|q) sum_{n=0}^{n_terms} rho^n H_n(x|q) H_n(y|q) / [n]_q!.
// Only valid on the stated convergence region (1-q) max(x^2,y^2) <= 2;
// degrees 0..n_terms inclusive, so n_terms = 1 gives f_N (1 + rho x y).
double pdf_transition_mehler(double x, double y, double rho, double q,
                             int n_terms);

enum class QuadScheme {
  kFixedCosine,  // fixed-order trapezoid in theta after x = R cos(theta)
  kAdaptive,     // adaptive Simpson in theta to abs_tol
};

struct QuadratureSpec {
  int nodes = 2048;
  QuadScheme scheme = QuadScheme::kFixedCosine;
  double abs_tol = 1e-10;
};

// Integral of f over S(q) via the substitution x = (2/sqrt(1-q)) cos(theta),
// theta in [0, pi], which removes the 1/sqrt(4-(1-q)x^2) endpoint
// singularity of the densities. Error at q = 1; callers use
// integrate_gauss_hermite for the unbounded case.
double integrate_support(const std::function<double(double)>& f, double q,
                         const QuadratureSpec& spec = {});

// q = 1 scheme: integral of f(x) against the standard normal density over
// the whole line, by an n-point Gauss-Hermite rule (default 61).
double integrate_gauss_hermite(const std::function<double(double)>& f,
                               int n = 61);

// Probabilists' Gauss-Hermite rule: sum w_i g(x_i) ~ integral of g against
// the N(0,1) weight. Cached per order.
struct GaussHermiteRule {
  std::vector<double> x, w;
};
const GaussHermiteRule& gauss_hermite_rule(int n);

// Immutable per-q stationary distribution table: cumulative quadrature
// over 4096 theta panels, CDF with in-panel Gauss-Legendre refinement,
// quantile by bisection to 1e-12 in x, plus a tabulated inverse CDF for
// tight sampling loops. Built once, read concurrently.
//
// Two cumulative arrays are kept, one accumulated from each support end,
// and cdf/quantile pick the matching side. Going through the complement
// 1 - p instead would floor tail quantiles at ulp(1)/f(x), which at
// q = 0.9 is microns-level error where f is tiny.
class StationaryDist {
 public:
  explicit StationaryDist(const QParam& policy, int panels = 4096);

  const QParam& policy() const { return policy_; }
  double radius() const { return radius_; }
  double pdf(double x) const;
  double cdf(double x) const;
  double quantile(double p) const;
  // Tabulated quantile(u) (1025-node monotone-cubic inverse table); the
  // cheap path for Monte Carlo draws.
  double sample_x(double u) const;

 private:
  double g_theta(double theta) const;  // unnormalized density in theta
  // mass over [0, theta] resp. [theta, pi]: exact panel sums + partial GL
  double cumulative_lo(double theta) const;
  double cumulative_hi(double theta) const;

  QParam policy_;
  double radius_;
  int n_panels_;
  double h_;
  std::vector<double> cum_lo_, cum_hi_;
  double total_lo_, total_hi_;
  PchipCurve inverse_;
};

// Memoized per-(q, policy) table; thread-safe, built at most once per key.
std::shared_ptr<const StationaryDist> stationary_dist(const QParam& policy);

// CDF / quantile of the stationary law. q = 1 uses the Gaussian closed
// forms; q < 1 goes through the cached table. quantile(cdf(x)) = x to
// 1e-9 on the interior of the support.
double cdf_stationary(double x, const QParam& policy);
double cdf_stationary(double x, double q);
double quantile_stationary(double p, const QParam& policy);
double quantile_stationary(double p, double q);

namespace detail {
// log of the x-dependent part of f_N (the sqrt factor folded with the
// k = 0 product term, plus the k >= 1 factors); -inf outside the open
// support. Shared with the conditional tables in the process module.
double log_shape_stationary(double x, const QParam& policy);
double log_shape_transition(double x, double y, double rho,
                            const QParam& policy);
double normal_quantile(double p);
}  // namespace detail

}  // namespace qproc
