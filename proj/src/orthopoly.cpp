#include "qproc/orthopoly.hpp"

#include <cmath>

namespace qproc {

PolySeq hermite_seq(int n_max, double x, double q) {
  if (n_max < 0) throw std::domain_error("hermite_seq: n_max must be >= 0");
  require_q(q);
  PolySeq seq;
  seq.values.resize(static_cast<size_t>(n_max) + 1);
  seq.values[0] = 1.0;
  if (n_max == 0) return seq;
  seq.values[1] = x;
  double qk = 1.0;  // [k]_q
  for (int k = 1; k < n_max; ++k) {
    seq.values[k + 1] = x * seq.values[k] - qk * seq.values[k - 1];
    qk = 1.0 + q * qk;  // -> [k+1]_q, used next iteration
  }
  return seq;
}

PolySeq asc_seq(int n_max, double x, double y, double rho, double q) {
  if (n_max < 0) throw std::domain_error("asc_seq: n_max must be >= 0");
  require_q(q);
  if (!(std::abs(rho) < 1.0))
    throw std::domain_error("asc_seq requires |rho| < 1");
  PolySeq seq;
  seq.values.resize(static_cast<size_t>(n_max) + 1);
  seq.values[0] = 1.0;
  if (n_max == 0) return seq;
  // k = 0 step: the [0]_q factor kills the P_{-1} term, so q^{k-1} is
  // never evaluated at k = 0.
  seq.values[1] = x - rho * y;
  double qk = 1.0;       // [k]_q
  double qpow = 1.0;     // q^k
  double qpow_m1 = 1.0;  // q^{k-1}, valid from k = 1 on
  for (int k = 1; k < n_max; ++k) {
    qpow *= q;
    seq.values[k + 1] = (x - rho * y * qpow) * seq.values[k] -
                        (1.0 - rho * rho * qpow_m1) * qk * seq.values[k - 1];
    qpow_m1 *= q;
    qk = 1.0 + q * qk;
  }
  return seq;
}

namespace {

// Smallest K with |q|^K * scale < tol, clamped to [1, max_terms].
int product_terms(double q, double scale, double tol, int max_terms) {
  const double aq = std::abs(q);
  if (aq == 0.0 || scale <= 0.0) return 1;
  double k = std::ceil(std::log(tol / scale) / std::log(aq));
  if (!(k > 1.0)) return 1;
  if (k >= static_cast<double>(max_terms)) return max_terms;
  return static_cast<int>(k);
}

}  // namespace

double phi(double x, double t, const QParam& policy) {
  const double q = policy.q;
  if (q == 1.0) return std::exp(x * t - 0.5 * t * t);
  const double omq = 1.0 - q;
  if (omq * t * t >= 1.0)
    throw std::domain_error("phi requires (1-q) t^2 < 1");
  if (omq * x * x > 4.0 * (1.0 + 4e-16))
    throw std::domain_error("phi requires (1-q) x^2 <= 4");
  // The k-th factor deviates from 1 by O(q^k), with scale
  // (1-q)(|x||t| + t^2); the completed square
  // (1-q)(t q^k - x/2)^2 + 1 - (1-q) x^2/4 keeps every factor
  // nonnegative on the closed support.
  const double scale = omq * (std::abs(x * t) + t * t);
  const int K = product_terms(q, scale, policy.product_tol, policy.max_terms);
  double prod = 1.0, qk = 1.0;
  for (int k = 0; k < K; ++k) {
    const double f = 1.0 - omq * x * t * qk + omq * t * t * qk * qk;
    prod *= f;
    qk *= q;
  }
  return 1.0 / prod;
}

double phi(double x, double t, double q) { return phi(x, t, QParam(q)); }

double tau(double x, double t, double y, double rho, const QParam& policy) {
  const double q = policy.q;
  if (!(std::abs(rho) < 1.0))
    throw std::domain_error("tau requires |rho| < 1");
  if (q == 1.0)
    return std::exp(t * (x - rho * y) - 0.5 * t * t * (1.0 - rho * rho));
  const double omq = 1.0 - q;
  if (omq * t * t >= 1.0)
    throw std::domain_error("tau requires (1-q) t^2 < 1");
  const double m2 = std::max(x * x, y * y);
  if (omq * m2 > 4.0 * (1.0 + 4e-16))
    throw std::domain_error("tau requires (1-q) max(x^2, y^2) <= 4");
  const double scale =
      omq * (std::abs(x * t) + t * t + std::abs(rho * y * t) +
             rho * rho * t * t);
  const int K = product_terms(q, scale, policy.product_tol, policy.max_terms);
  double prod = 1.0, qk = 1.0;
  for (int k = 0; k < K; ++k) {
    const double num =
        1.0 - omq * rho * y * t * qk + omq * rho * rho * t * t * qk * qk;
    const double den = 1.0 - omq * x * t * qk + omq * t * t * qk * qk;
    prod *= num / den;
    qk *= q;
  }
  return prod;
}

double tau(double x, double t, double y, double rho, double q) {
  return tau(x, t, y, rho, QParam(q));
}

double hermite_bound(int n, double q) {
  if (n < 0) throw std::domain_error("hermite_bound: n must be >= 0");
  require_q(q);
  if (q == 1.0)
    throw std::domain_error("hermite_bound undefined at q = 1 (unbounded support)");
  return w_sum(n, q) / std::pow(1.0 - q, 0.5 * n);
}

}  // namespace qproc
