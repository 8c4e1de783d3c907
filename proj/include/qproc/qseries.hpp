#pragma once

#include <stdexcept>

// q-arithmetic primitives shared by the whole library: q-numbers,
// q-factorials, Gaussian binomials, finite and infinite q-Pochhammer
// symbols and the W_n(q) binomial row sums.
//
// Conventions (q-series standard):
//   [0]_q = 0,  [n]_q = 1 + q + ... + q^{n-1}
//   [n]_q! = prod_{i=1}^{n} [i]_q
//   (a|q)_n = prod_{i=0}^{n-1} (1 - a q^i),  (a|q)_0 = 1
//   W_n(q) = sum_{i=0}^{n} qbinom(n, i)

namespace qproc {

// Validated deformation parameter q in (-1, 1] together with the
// truncation policy used by every infinite-product evaluation.
// q > 1 is rejected outright: the continuous-time process family this
// library implements does not exist there.
struct QParam {
  double q;
  double product_tol;
  int max_terms;

  explicit QParam(double q_in, double product_tol_in = 1e-14,
                  int max_terms_in = 10'000);
};

// Throws std::domain_error unless -1 < q <= 1.
void require_q(double q);

// [n]_q. Equals n at q = 1 and 0 at n = 0.
double q_number(int n, double q);

// [n]_q!. Equals 1 at n = 0.
double q_factorial(int n, double q);

// Gaussian binomial coefficient. Zero for k < 0 or k > n, symmetric
// under k <-> n-k.
double q_binomial(int n, int k, double q);

// Finite q-Pochhammer (a|q)_n.
double pochhammer(double a, double q, int n);

// Infinite q-Pochhammer (a|q)_inf, truncated per policy. The product is
// cut at the smallest K with |a| |q|^K < product_tol (capped at
// max_terms); the discarded log-tail is bounded by
// sum_{k>=K} |a| |q|^k = |a| |q|^K / (1 - |q|) < product_tol / (1 - |q|).
// Requires |q| < 1; q = 1 is a hard error and callers own the Gaussian
// branch.
double pochhammer_inf(double a, const QParam& policy);
double pochhammer_inf(double a, double q);

// log (a|q)_inf for a < 1 (all factors positive). Same truncation rule.
double log_pochhammer_inf(double a, const QParam& policy);

// W_n(q) = sum of the degree-n Gaussian binomial row; 2^n at q = 1.
double w_sum(int n, double q);

}  // namespace qproc
