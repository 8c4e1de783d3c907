#include "qproc/qseries.hpp"

#include <cmath>
#include <string>

namespace qproc {

void require_q(double q) {
  if (q > 1.0) {
    throw std::domain_error(
        "q must lie in (-1, 1]: the q-Wiener / (q,alpha)-OU family does not "
        "exist for q > 1");
  }
  if (!(q > -1.0)) {
    throw std::domain_error("q must lie in (-1, 1]: got q = " +
                            std::to_string(q));
  }
}

QParam::QParam(double q_in, double product_tol_in, int max_terms_in)
    : q(q_in), product_tol(product_tol_in), max_terms(max_terms_in) {
  require_q(q);
  if (!(product_tol > 0.0))
    throw std::domain_error("product_tol must be positive");
  if (max_terms < 1) throw std::domain_error("max_terms must be >= 1");
}

double q_number(int n, double q) {
  if (n < 0) throw std::domain_error("q_number: n must be >= 0");
  require_q(q);
  if (q == 1.0) return static_cast<double>(n);
  double sum = 0.0, p = 1.0;
  for (int i = 0; i < n; ++i) {
    sum += p;
    p *= q;
  }
  return sum;
}

double q_factorial(int n, double q) {
  if (n < 0) throw std::domain_error("q_factorial: n must be >= 0");
  require_q(q);
  double prod = 1.0;
  double qn = 0.0;  // [i]_q, built incrementally via [i] = 1 + q [i-1]
  for (int i = 1; i <= n; ++i) {
    qn = 1.0 + q * qn;
    prod *= qn;
  }
  return prod;
}

double q_binomial(int n, int k, double q) {
  if (n < 0) throw std::domain_error("q_binomial: n must be >= 0");
  require_q(q);
  if (k < 0 || k > n) return 0.0;
  if (k > n - k) k = n - k;
  // prod_{i=1}^{k} [n-k+i]_q / [i]_q, interleaved to keep the running
  // value near unit scale.
  double val = 1.0;
  for (int i = 1; i <= k; ++i) {
    val *= q_number(n - k + i, q) / q_number(i, q);
  }
  return val;
}

double pochhammer(double a, double q, int n) {
  if (n < 0) throw std::domain_error("pochhammer: n must be >= 0");
  require_q(q);
  double prod = 1.0, p = 1.0;
  for (int i = 0; i < n; ++i) {
    prod *= (1.0 - a * p);
    p *= q;
  }
  return prod;
}

namespace {

// Smallest K with |a| |q|^K < tol, clamped to [1, max_terms].
int truncation_index(double a, double q, double tol, int max_terms) {
  const double aq = std::abs(q);
  if (a == 0.0) return 1;
  if (aq == 0.0) return 1;
  const double tiny = 1e-300;
  double k = std::ceil(std::log(tol / std::max(std::abs(a), tiny)) /
                       std::log(aq));
  if (!(k > 1.0)) return 1;
  if (k >= static_cast<double>(max_terms)) return max_terms;
  return static_cast<int>(k);
}

}  // namespace

double pochhammer_inf(double a, const QParam& policy) {
  const double q = policy.q;
  if (std::abs(q) >= 1.0)
    throw std::domain_error("pochhammer_inf requires |q| < 1");
  if (a == 0.0) return 1.0;
  const int K = truncation_index(a, q, policy.product_tol, policy.max_terms);
  // Sum logs when every factor is positive (avoids underflow of long
  // products for q near 1), otherwise multiply directly.
  double logsum = 0.0, prod = 1.0, p = 1.0;
  bool all_positive = true;
  for (int i = 0; i < K; ++i) {
    const double f = 1.0 - a * p;
    prod *= f;
    if (f > 0.0)
      logsum += std::log(f);
    else
      all_positive = false;
    p *= q;
  }
  return all_positive ? std::exp(logsum) : prod;
}

double pochhammer_inf(double a, double q) {
  return pochhammer_inf(a, QParam(q));
}

double log_pochhammer_inf(double a, const QParam& policy) {
  const double q = policy.q;
  if (std::abs(q) >= 1.0)
    throw std::domain_error("log_pochhammer_inf requires |q| < 1");
  if (a >= 1.0)
    throw std::domain_error("log_pochhammer_inf requires a < 1");
  if (a == 0.0) return 0.0;
  const int K = truncation_index(a, q, policy.product_tol, policy.max_terms);
  double logsum = 0.0, p = 1.0;
  for (int i = 0; i < K; ++i) {
    logsum += std::log1p(-a * p);
    p *= q;
  }
  return logsum;
}

double w_sum(int n, double q) {
  if (n < 0) throw std::domain_error("w_sum: n must be >= 0");
  require_q(q);
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) sum += q_binomial(n, i, q);
  return sum;
}

}  // namespace qproc
