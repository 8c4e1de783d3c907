#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "qproc/density.hpp"
#include "qproc/interp.hpp"
#include "qproc/qseries.hpp"
#include "qproc/rng.hpp"

// Exact Markov simulation of the (q,alpha)-OU process and the q-Wiener
// process, plus the closed-form moment and regression formulas: increment
// moments, one- and two-sided conditional expectations, bridge
// coefficients, spectral densities and the discrete-sequence parameter
// maps.
//
// The OU process is stationary Markov with marginal f_N(.|q) and
// transition density f_CN(.|y, e^{-alpha |s-t|}, q). The q-Wiener process
// is its time change X_tau = sqrt(tau) Y_{log(tau)/(2 alpha)} with X_0 = 0;
// the law of X does not depend on the internal alpha, fixed here at 1/2.

namespace qproc {

struct OUParams {
  QParam par;
  double alpha;  // mean-reversion rate, 1/time

  OUParams(const QParam& par_in, double alpha_in) : par(par_in), alpha(alpha_in) {
    if (!(alpha > 0.0)) throw std::domain_error("OUParams: alpha must be > 0");
  }
};

enum class ProcessKind { kOU, kQWiener };

struct Trajectory {
  std::vector<double> times;
  std::vector<double> values;
  uint64_t seed = 0;
  ProcessKind kind = ProcessKind::kOU;
};

// ---------------------------------------------------------------------------
// Exact sampling

// One draw from the stationary law; q = 1 draws a standard Gaussian,
// q < 1 inverts the tabulated stationary CDF at a uniform variate.
double sample_stationary(const QParam& par, Rng& rng);

// One draw from f_CN(.|y, rho, q). rho within 1e-12 of 1 returns y (the
// kernel degenerates); q = 1 draws N(rho y, 1 - rho^2). Backed by a
// per-(y, rho) inverse-CDF table, LRU-cached on (y, rho) quantized at 1e-6.
double sample_transition(double y, double rho, const QParam& par, Rng& rng);

// Per-(y,rho) conditional distribution table: theta-space CDF over
// adaptively many panels (more as rho -> 1 sharpens the kernel), monotone
// cubic interpolation, quantile by bisection.
class ConditionalDist {
 public:
  ConditionalDist(double y, double rho, const QParam& par);
  double radius() const { return radius_; }
  double cdf(double x) const;
  double quantile(double u) const;

 private:
  QParam par_;
  double y_, rho_, radius_;
  PchipCurve cum_;  // theta -> normalized cumulative mass
};

std::shared_ptr<const ConditionalDist> conditional_dist(double y, double rho,
                                                        const QParam& par);

// Transition sampler for a whole path step: one table bank per (q, rho),
// quantile surfaces tabulated on a Chebyshev y-grid and interpolated in
// (y, u). Path simulation revisits the same rho with fresh y every step,
// so this amortizes table construction where per-(y,rho) builds would
// dominate the cost.
class TransitionFamily {
 public:
  TransitionFamily(double rho, const QParam& par);
  double sample_x(double y, double u) const;

 private:
  QParam par_;
  double rho_, radius_;
  int ny_, nu_;
  std::vector<double> ynodes_;
  std::vector<std::vector<double>> xq_;  // [y-node][u-node]
};

std::shared_ptr<const TransitionFamily> transition_family(double rho,
                                                          const QParam& par);

// ---------------------------------------------------------------------------
// Simulation

// Stationary Markov path: values[0] from the stationary law, then
// sequential transition draws with rho_i = exp(-alpha (t_{i+1} - t_i)).
// Fully reproducible from (seed, times, params).
Trajectory simulate_ou(const OUParams& params, const std::vector<double>& times,
                       uint64_t seed);

// q-Wiener path on times >= 0: internally an OU path at the transformed
// times scaled by sqrt(tau); tau = 0 yields exactly 0. internal_alpha is
// the free time-change parameter (the sampled law does not depend on it).
Trajectory simulate_qwiener(const QParam& par, const std::vector<double>& times,
                            uint64_t seed, double internal_alpha = 0.5);

// Multi-path fan-out; path p uses the derived stream (seed, p), so results
// are independent of the worker count. n_threads = 0 defers to the
// QPROC_THREADS environment variable (0 or unset = hardware concurrency).
std::vector<Trajectory> simulate_ou_paths(const OUParams& params,
                                          const std::vector<double>& times,
                                          uint64_t seed, int n_paths,
                                          int n_threads = 0);
std::vector<Trajectory> simulate_qwiener_paths(const QParam& par,
                                               const std::vector<double>& times,
                                               uint64_t seed, int n_paths,
                                               int n_threads = 0);

// Worker-count resolution shared by simulation and the verification suite.
int resolve_thread_count(int requested);

// ---------------------------------------------------------------------------
// Closed forms

// K(s,t) = exp(-alpha |s-t|) and cov(X_s, X_t) = min(s, t).
double ou_covariance(double s, double t, double alpha);
double wiener_covariance(double s, double t);

// Conditional moments of X_tau - X_sigma given the past, at X_sigma = x:
//   m2 = tau - sigma
//   m3 = -(1-q)(tau - sigma) x
//   m4 = (tau - sigma) (x^2 (1-q)^2 + (2+q)(tau - sigma) + sigma (1-q^2))
struct IncrementMoments {
  double m2, m3, m4;
};
IncrementMoments increment_moments(double sigma, double tau, double x_sigma,
                                   double q);

// Two-sided conditional moments of the q-Wiener process at sigma given
// X_{sigma-delta} = x_left and X_{sigma+gamma} = x_right. The mean is
// q-free:  gamma/(delta+gamma) x_left + delta/(delta+gamma) x_right.
double harness_mean(double x_left, double x_right, double sigma, double delta,
                    double gamma);
double harness_second(double x_left, double x_right, double sigma,
                      double delta, double gamma, double q);
double harness_var(double x_left, double x_right, double sigma, double delta,
                   double gamma, double q);

// Two-sided conditional variance of the OU process,
//   var(Y_s | F_{<= s-delta, >= s+gamma})
// at neighbor values (y_left, y_right). With c = e^{-alpha(delta+gamma)}:
//   (1-e^{-2 a d})(1-e^{-2 a g})/(1-q c^2)
//     * (1 - (1-q) c (y_l - c y_r)(y_r - c y_l)/(1-c^2)^2).
double ou_bridge_var(double y_left, double y_right, double delta, double gamma,
                     double alpha, double q);

// Coefficient table A^{(n)}_{r,m} of the two-sided conditional expectation
//   E(H_n(Y_s) | both sides)
//     = sum_{r=0}^{floor(n/2)} sum_{l=0}^{n-2r}
//         A^{(n)}_{r, -floor(n/2)+r+l} H_{n-2r-l}(y_left) H_l(y_right),
// for n <= 4 (no closed form is available beyond that). The r = 0 row is
//   A_0(l) = qbinom(n,l) rho1^{n-l} (rho2^2|q)_{n-l} rho2^l (rho1^2|q)_l
//            / (rho1^2 rho2^2|q)_n,
// the r = 1 rows are -[n-1]_q rho1 rho2 times the inner r = 0 entries for
// n <= 3, and for n = 4: A_{1,+-1} = -[3]_q r1 r2 A_{0,+-1},
// A_{1,0} = -[2]_q^2 r1 r2 A_{0,0}, A_{2,0} = q(1+q) r1^2 r2^2 A_{0,0}.
// For the OU bridge rho1 = e^{-alpha delta}, rho2 = e^{-alpha gamma}; for
// the q-Wiener bridge rho1 = sqrt((sigma-delta)/sigma),
// rho2 = sqrt(sigma/(sigma+gamma)).
struct BridgeCoeffs {
  int n = 0;
  struct Entry {
    int r;             // row index, 0..floor(n/2)
    int m;             // column index, -floor(n/2)+r .. -floor(n/2)+r+n-2r
    int left_degree;   // degree paired with y_left: n - 2r - l
    int right_degree;  // degree paired with y_right: l
    double value;
  };
  std::vector<Entry> entries;

  double at(int r, int m) const;
};
BridgeCoeffs bridge_coeffs(int n, double rho1, double rho2, double q);

// E(H_n(Y_s)|y_left, y_right) evaluated through bridge_coeffs.
double hermite_bridge_mean(int n, double y_left, double y_right, double rho1,
                           double rho2, double q);

// Spectral density of the stationary process H_n(Y_t|q):
//   S_n(omega|alpha) = [n]_q! 2 n alpha / (omega^2 + n^2 alpha^2),
// the Fourier pair of the covariance [n]_q! e^{-n alpha |h|}.
double spectral_density(int n, double omega, double alpha, double q);

// Second-conditional-moment regression coefficients of the discrete
// stationary sequence with one-step correlation rho:
//   E(X_n^2 | rest) = A (X_{n-1}^2 + X_{n+1}^2) + B X_{n-1} X_{n+1} + C,
// and the lag-(j,k) generalization. Satisfies
// 1 = A1 + A2 + rho^{j+k} B + C.
struct TspParams {
  double a, b, c;
};
TspParams tsp_params(double rho, double q);

struct TspParamsJk {
  double a1, a2, b, c;
};
TspParamsJk tsp_params_jk(int j, int k, double rho, double q);

// Closed-form stationary mixed moments:
//   ex4   = E X^4                 = 2 + q
//   ex2x2 = E X_n^2 X_m^2         = 1 + rho^{2|n-m|} (1 + q)
//   ex2xx = E X_n^2 X_{n-j} X_{n+k} = rho^{j+k} (2 + q)
struct MomentIdentities {
  double ex4, ex2x2, ex2xx;
};
MomentIdentities moment_identities(double rho, double q, int n, int m, int j,
                                   int k);

}  // namespace qproc
