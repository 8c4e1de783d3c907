#pragma once

#include <vector>

#include "qproc/qseries.hpp"

// q-Hermite polynomials H_n(x|q), Al-Salam-Chihara polynomials
// P_n(x|y,q,rho), their generating functions phi and tau, and the uniform
// bound W_n(q)/(1-q)^{n/2} for |H_n| on the support.
//
// Recurrences (the degree -1 polynomial is identically 0 and not stored):
//   H_{n+1}(x|q) = x H_n(x|q) - [n]_q H_{n-1}(x|q),            H_0 = 1
//   P_{n+1}(x|y,q,rho) = (x - rho y q^n) P_n
//                        - (1 - rho^2 q^{n-1}) [n]_q P_{n-1},  P_0 = 1
//
// Note on normalization: these are the "big" polynomials orthogonal on
// S(q) = [-2/sqrt(1-q), 2/sqrt(1-q)]. The continuous q-Hermite h_n on
// [-1,1] are the rescaling h_n(x|q) = H_n(2x/sqrt(1-q)|q) (1-q)^{n/2},
// and similarly p_n(x|y,rho,q) = P_n(2x/sqrt(1-q) | 2y/sqrt(1-q), rho, q);
// neither rescaled family is implemented here.

namespace qproc {

// Values of one polynomial family at a fixed evaluation point, entry k
// holding the degree-k value. values[0] == 1 always.
struct PolySeq {
  std::vector<double> values;

  int degree() const { return static_cast<int>(values.size()) - 1; }
  double operator[](int k) const { return values[static_cast<size_t>(k)]; }
};

// H_0..H_{n_max} at x by forward three-term recurrence.
PolySeq hermite_seq(int n_max, double x, double q);

// P_0..P_{n_max} at x, conditioning point y, correlation rho (|rho| < 1).
// rho = 0 collapses entrywise to hermite_seq.
PolySeq asc_seq(int n_max, double x, double y, double rho, double q);

// Generating function of the H_n:
//   phi(x,t|q) = sum_i t^i H_i(x|q) / [i]_q!
//              = prod_k (1 - (1-q) x t q^k + (1-q) t^2 q^{2k})^{-1}
// for |q| < 1; phi(x,t|1) = exp(x t - t^2/2). Requires (1-q) x^2 <= 4 and
// (1-q) t^2 < 1; strictly positive on that domain.
double phi(double x, double t, const QParam& policy);
double phi(double x, double t, double q);

// Generating function of the P_n:
//   tau(x,t|y,rho,q) = sum_i t^i P_i(x|y,rho,q) / [i]_q!
//     = prod_k (1 - (1-q) rho y t q^k + (1-q) rho^2 t^2 q^{2k})
//            / (1 - (1-q) x t q^k + (1-q) t^2 q^{2k})
// for |q| < 1; tau(...|1) = exp(t (x - rho y) - t^2 (1 - rho^2)/2).
// Requires (1-q) max(x^2, y^2) <= 4, |rho| < 1, (1-q) t^2 < 1.
// rho = 0 reduces to phi(x,t|q).
double tau(double x, double t, double y, double rho, const QParam& policy);
double tau(double x, double t, double y, double rho, double q);

// Upper bound for |H_n| on S(q): W_n(q) / (1-q)^{n/2}. Error at q = 1
// (unbounded support).
double hermite_bound(int n, double q);

}  // namespace qproc
