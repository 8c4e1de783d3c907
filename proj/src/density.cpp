#include "qproc/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>

namespace qproc {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kLog2Pi = 1.8378770664093454836;

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

Support support(double q) {
  require_q(q);
  if (q == 1.0) {
    return Support{-std::numeric_limits<double>::infinity(),
                   std::numeric_limits<double>::infinity(), false};
  }
  const double r = 2.0 / std::sqrt(1.0 - q);
  return Support{-r, r, true};
}

namespace detail {

double log_shape_stationary(double x, const QParam& policy) {
  const double q = policy.q;
  const double omq = 1.0 - q;
  const double s = omq * x * x;
  if (s >= 4.0) return -std::numeric_limits<double>::infinity();
  // k = 0 factor (4 - s) folded against the 1/sqrt(4 - s) prefactor.
  double acc = 0.5 * std::log(4.0 - s);
  // factors (1+q^k)^2 - s q^k, k >= 1; each deviates from 1 by O(q^k)
  const int terms =
      product_terms(q, 3.0, policy.product_tol, policy.max_terms);
  double qk = q;
  for (int k = 1; k < terms; ++k) {
    const double op = 1.0 + qk;
    acc += std::log(op * op - s * qk);
    qk *= q;
  }
  return acc;
}

double log_shape_transition(double x, double y, double rho,
                            const QParam& policy) {
  const double q = policy.q;
  const double omq = 1.0 - q;
  const double sx = omq * x * x;
  if (sx >= 4.0) return -std::numeric_limits<double>::infinity();
  double acc = 0.5 * std::log(4.0 - sx);
  const double xy = x * y;
  const double ss = x * x + y * y;
  const double r2 = rho * rho;
  // The denominator factors stay strictly positive: each equals
  // |1 - rho q^k e^{i(th+ps)}|^2 |1 - rho q^k e^{i(th-ps)}|^2 with
  // x = R cos th, y = R cos ps.
  const double scale = 3.0 + omq * std::abs(rho * xy) * (1.0 + r2) +
                       omq * r2 * ss + 2.0 * r2 + r2 * r2;
  const int terms =
      product_terms(q, scale, policy.product_tol, policy.max_terms);
  double qk = 1.0;
  for (int k = 0; k < terms; ++k) {
    const double q2k = qk * qk;
    const double a = 1.0 - r2 * q2k;
    const double den =
        a * a - omq * rho * qk * (1.0 + r2 * q2k) * xy + omq * r2 * q2k * ss;
    if (k > 0) {
      const double op = 1.0 + qk;
      acc += std::log(op * op - sx * qk);
    }
    acc -= std::log(den);
    qk *= q;
  }
  return acc;
}

}  // namespace detail

double pdf_stationary(double x, const QParam& policy) {
  const double q = policy.q;
  if (q == 1.0) {
    return std::exp(-0.5 * x * x - 0.5 * kLog2Pi);
  }
  const double omq = 1.0 - q;
  const double r = 2.0 / std::sqrt(omq);
  if (std::abs(x) >= r) return 0.0;
  const double log_norm =
      0.5 * std::log(omq) + log_pochhammer_inf(q, policy) - kLog2Pi;
  return std::exp(log_norm + detail::log_shape_stationary(x, policy));
}

double pdf_stationary(double x, double q) {
  return pdf_stationary(x, QParam(q));
}

double pdf_transition(double x, double y, double rho, const QParam& policy) {
  if (!(std::abs(rho) < 1.0))
    throw std::domain_error("pdf_transition requires |rho| < 1");
  const double q = policy.q;
  if (q == 1.0) {
    const double v = 1.0 - rho * rho;
    const double d = x - rho * y;
    return std::exp(-0.5 * d * d / v - 0.5 * (kLog2Pi + std::log(v)));
  }
  const double omq = 1.0 - q;
  const double r = 2.0 / std::sqrt(omq);
  if (std::abs(y) > r)
    throw std::domain_error("pdf_transition: y must lie in S(q)");
  if (std::abs(x) >= r) return 0.0;
  const double log_norm = 0.5 * std::log(omq) +
                          log_pochhammer_inf(rho * rho, policy) +
                          log_pochhammer_inf(q, policy) - kLog2Pi;
  return std::exp(log_norm + detail::log_shape_transition(x, y, rho, policy));
}

double pdf_transition(double x, double y, double rho, double q) {
  return pdf_transition(x, y, rho, QParam(q));
}

double pdf_transition_mehler(double x, double y, double rho, double q,
                             int n_terms) {
  require_q(q);
  if (n_terms < 1)
    throw std::domain_error("pdf_transition_mehler: n_terms must be >= 1");
  if (!(std::abs(rho) < 1.0))
    throw std::domain_error("pdf_transition_mehler requires |rho| < 1");
  const double omq = 1.0 - q;
  if (omq * std::max(x * x, y * y) > 2.0 * (1.0 + 4e-16))
    throw std::domain_error(
        "pdf_transition_mehler: outside the convergence region "
        "(1-q) max(x^2, y^2) <= 2");
  // Forward recurrences for H_n(x), H_n(y) interleaved with the sum.
  double hx_prev = 0.0, hx = 1.0, hy_prev = 0.0, hy = 1.0;
  double rn = 1.0, fact = 1.0, qn = 0.0;
  double sum = 1.0;
  for (int n = 1; n <= n_terms; ++n) {
    const double hx_next = x * hx - qn * hx_prev;
    const double hy_next = y * hy - qn * hy_prev;
    hx_prev = hx;
    hx = hx_next;
    hy_prev = hy;
    hy = hy_next;
    qn = 1.0 + q * qn;  // [n]_q
    fact *= qn;
    rn *= rho;
    sum += rn * hx * hy / fact;
  }
  return pdf_stationary(x, q) * sum;
}

namespace {

double adaptive_simpson(const std::function<double(double)>& g, double a,
                        double fa, double m, double fm, double b, double fb,
                        double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = g(lm), frm = g(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adaptive_simpson(g, a, fa, lm, flm, m, fm, left, 0.5 * tol,
                          depth - 1) +
         adaptive_simpson(g, m, fm, rm, frm, b, fb, right, 0.5 * tol,
                          depth - 1);
}

}  // namespace

double integrate_support(const std::function<double(double)>& f, double q,
                         const QuadratureSpec& spec) {
  require_q(q);
  if (q == 1.0)
    throw std::domain_error(
        "integrate_support requires q < 1; use integrate_gauss_hermite");
  if (spec.nodes < 8) throw std::domain_error("QuadratureSpec: nodes >= 8");
  if (!(spec.abs_tol > 0.0))
    throw std::domain_error("QuadratureSpec: abs_tol must be positive");
  const double r = 2.0 / std::sqrt(1.0 - q);
  const auto g = [&](double theta) {
    return f(r * std::cos(theta)) * r * std::sin(theta);
  };
  if (spec.scheme == QuadScheme::kAdaptive) {
    const double a = 0.0, b = kPi, m = 0.5 * kPi;
    const double fa = g(a), fm = g(m), fb = g(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(g, a, fa, m, fm, b, fb, whole, spec.abs_tol, 24);
  }
  // Composite trapezoid in theta. The transformed integrand extends to a
  // smooth even periodic function, so this is a Clenshaw-Curtis-type rule
  // with geometric convergence for analytic f.
  const int n = spec.nodes;
  const double h = kPi / n;
  double sum = 0.5 * (g(0.0) + g(kPi));
  for (int j = 1; j < n; ++j) sum += g(h * j);
  return sum * h;
}

namespace {

// Physicists' Gauss-Hermite nodes/weights (weight e^{-z^2}) by Newton
// iteration on the orthonormal recurrence, largest root first.
void gauher(int n, std::vector<double>& x, std::vector<double>& w) {
  constexpr double kEps = 3e-14;
  constexpr double kPim4 = 0.7511255444649425;  // pi^{-1/4}
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  const int m = (n + 1) / 2;
  double z = 0.0, pp = 0.0;
  for (int i = 0; i < m; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) -
          1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
    } else if (i == 1) {
      z -= 1.14 * std::pow(n, 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * x[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * x[1];
    } else {
      z = 2.0 * z - x[i - 2];
    }
    for (int it = 0; it < 100; ++it) {
      double p1 = kPim4, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= kEps) break;
    }
    x[i] = z;
    x[n - 1 - i] = -z;
    w[i] = 2.0 / (pp * pp);
    w[n - 1 - i] = w[i];
  }
}

}  // namespace

const GaussHermiteRule& gauss_hermite_rule(int n) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<GaussHermiteRule>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[n];
  if (!slot) {
    if (n < 1) throw std::domain_error("gauss_hermite_rule: n >= 1");
    std::vector<double> xp, wp;
    gauher(n, xp, wp);
    auto rule = std::make_unique<GaussHermiteRule>();
    const double sqrt2 = std::sqrt(2.0);
    const double inv_sqrt_pi = 1.0 / std::sqrt(kPi);
    rule->x.resize(n);
    rule->w.resize(n);
    for (int i = 0; i < n; ++i) {
      rule->x[i] = sqrt2 * xp[i];  // probabilists' nodes
      rule->w[i] = wp[i] * inv_sqrt_pi;
    }
    slot = std::move(rule);
  }
  return *slot;
}

double integrate_gauss_hermite(const std::function<double(double)>& f,
                               int n) {
  const GaussHermiteRule& rule = gauss_hermite_rule(n);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += rule.w[i] * f(rule.x[i]);
  return sum;
}

// ---------------------------------------------------------------------------
// Stationary distribution table

StationaryDist::StationaryDist(const QParam& policy, int panels)
    : policy_(policy), n_panels_(panels) {
  if (policy_.q == 1.0)
    throw std::domain_error("StationaryDist requires q < 1");
  if (panels < 16) throw std::domain_error("StationaryDist: panels >= 16");
  radius_ = 2.0 / std::sqrt(1.0 - policy_.q);
  h_ = kPi / n_panels_;

  // cumulative mass at panel boundaries, 4-point Gauss-Legendre per panel,
  // accumulated once from each end so both tails keep relative precision
  static constexpr double kGlX[4] = {-0.861136311594052575, -0.339981043584856265,
                                     0.339981043584856265, 0.861136311594052575};
  static constexpr double kGlW[4] = {0.347854845137453857, 0.652145154862546143,
                                     0.652145154862546143, 0.347854845137453857};
  std::vector<double> panel_mass(static_cast<size_t>(n_panels_));
  for (int j = 0; j < n_panels_; ++j) {
    const double a = j * h_, c = a + 0.5 * h_;
    double panel = 0.0;
    for (int i = 0; i < 4; ++i)
      panel += kGlW[i] * g_theta(c + 0.5 * h_ * kGlX[i]);
    panel_mass[static_cast<size_t>(j)] = panel * 0.5 * h_;
  }
  cum_lo_.assign(n_panels_ + 1, 0.0);
  cum_hi_.assign(n_panels_ + 1, 0.0);
  for (int j = 0; j < n_panels_; ++j)
    cum_lo_[j + 1] = cum_lo_[j] + panel_mass[static_cast<size_t>(j)];
  for (int j = n_panels_ - 1; j >= 0; --j)
    cum_hi_[j] = cum_hi_[j + 1] + panel_mass[static_cast<size_t>(j)];
  total_lo_ = cum_lo_[static_cast<size_t>(n_panels_)];
  total_hi_ = cum_hi_[0];

  // tabulated inverse CDF on endpoint-clustered u nodes for sampling
  const int nu = 1024;
  std::vector<double> us(nu + 1), xs(nu + 1);
  for (int j = 0; j <= nu; ++j) {
    const double u = 0.5 * (1.0 - std::cos(kPi * j / nu));
    us[j] = u;
    xs[j] = quantile(u);
  }
  // endpoints exact
  xs[0] = -radius_;
  xs[nu] = radius_;
  inverse_ = PchipCurve(std::move(us), std::move(xs));
}

double StationaryDist::g_theta(double theta) const {
  const double st = std::sin(theta);
  if (st <= 0.0) return 0.0;
  const double x = radius_ * std::cos(theta);
  const double ls = detail::log_shape_stationary(x, policy_);
  if (!std::isfinite(ls)) return 0.0;
  return std::exp(ls) * radius_ * st;
}

namespace {

constexpr double kGl8X[8] = {
    -0.960289856497536232, -0.796666477413626740, -0.525532409916328986,
    -0.183434642495649805, 0.183434642495649805,  0.525532409916328986,
    0.796666477413626740,  0.960289856497536232};
constexpr double kGl8W[8] = {
    0.101228536290376259, 0.222381034453374471, 0.313706645877887287,
    0.362683783378361983, 0.362683783378361983, 0.313706645877887287,
    0.222381034453374471, 0.101228536290376259};

}  // namespace

double StationaryDist::cumulative_lo(double theta) const {
  if (theta <= 0.0) return 0.0;
  if (theta >= kPi) return total_lo_;
  int j = static_cast<int>(theta / h_);
  if (j >= n_panels_) j = n_panels_ - 1;
  const double a = j * h_;
  const double half = 0.5 * (theta - a), mid = 0.5 * (theta + a);
  double partial = 0.0;
  for (int i = 0; i < 8; ++i)
    partial += kGl8W[i] * g_theta(mid + half * kGl8X[i]);
  return cum_lo_[static_cast<size_t>(j)] + partial * half;
}

double StationaryDist::cumulative_hi(double theta) const {
  if (theta <= 0.0) return total_hi_;
  if (theta >= kPi) return 0.0;
  int j = static_cast<int>(theta / h_);
  if (j >= n_panels_) j = n_panels_ - 1;
  const double b = (j + 1) * h_;
  const double half = 0.5 * (b - theta), mid = 0.5 * (b + theta);
  double partial = 0.0;
  for (int i = 0; i < 8; ++i)
    partial += kGl8W[i] * g_theta(mid + half * kGl8X[i]);
  return cum_hi_[static_cast<size_t>(j) + 1] + partial * half;
}

double StationaryDist::pdf(double x) const {
  return pdf_stationary(x, policy_);
}

double StationaryDist::cdf(double x) const {
  if (x <= -radius_) return 0.0;
  if (x >= radius_) return 1.0;
  const double theta = std::acos(std::clamp(x / radius_, -1.0, 1.0));
  // x = R cos(theta) decreases in theta: P(X <= x) is the mass on
  // [theta, pi]. Evaluate the smaller tail directly.
  if (x <= 0.0) return cumulative_hi(theta) / total_hi_;
  return 1.0 - cumulative_lo(theta) / total_lo_;
}

double StationaryDist::quantile(double p) const {
  if (p <= 0.0) return -radius_;
  if (p >= 1.0) return radius_;
  double lo = 0.0, hi = kPi;
  if (p <= 0.5) {
    // lower x-tail: solve cumulative_hi(theta) = p * total (decreasing)
    const double target = total_hi_ * p;
    while ((hi - lo) * radius_ > 1e-13) {
      const double mid = 0.5 * (lo + hi);
      (cumulative_hi(mid) > target ? lo : hi) = mid;
    }
  } else {
    const double target = total_lo_ * (1.0 - p);
    while ((hi - lo) * radius_ > 1e-13) {
      const double mid = 0.5 * (lo + hi);
      (cumulative_lo(mid) < target ? lo : hi) = mid;
    }
  }
  return radius_ * std::cos(0.5 * (lo + hi));
}

double StationaryDist::sample_x(double u) const {
  return std::clamp(inverse_.eval(u), -radius_, radius_);
}

std::shared_ptr<const StationaryDist> stationary_dist(const QParam& policy) {
  struct Key {
    double q, tol;
    int max_terms;
    bool operator<(const Key& o) const {
      if (q != o.q) return q < o.q;
      if (tol != o.tol) return tol < o.tol;
      return max_terms < o.max_terms;
    }
  };
  static std::mutex mu;
  static std::map<Key, std::shared_ptr<const StationaryDist>> cache;
  const Key key{policy.q, policy.product_tol, policy.max_terms};
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto dist = std::make_shared<const StationaryDist>(policy);
  cache.emplace(key, dist);
  return dist;
}

namespace detail {

double normal_quantile(double p) {
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  if (p >= 1.0) return std::numeric_limits<double>::infinity();
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo));
       ++i) {
    const double mid = 0.5 * (lo + hi);
    const double c = 0.5 * std::erfc(-mid / std::sqrt(2.0));
    (c < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

double cdf_stationary(double x, const QParam& policy) {
  if (policy.q == 1.0) return 0.5 * std::erfc(-x / std::sqrt(2.0));
  return stationary_dist(policy)->cdf(x);
}

double cdf_stationary(double x, double q) {
  return cdf_stationary(x, QParam(q));
}

double quantile_stationary(double p, const QParam& policy) {
  if (p < 0.0 || p > 1.0)
    throw std::domain_error("quantile_stationary: p must lie in [0, 1]");
  if (policy.q == 1.0) return detail::normal_quantile(p);
  return stationary_dist(policy)->quantile(p);
}

double quantile_stationary(double p, double q) {
  return quantile_stationary(p, QParam(q));
}

}  // namespace qproc
