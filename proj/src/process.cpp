#include "qproc/process.hpp"

#include "qproc/orthopoly.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <list>
#include <map>
#include <mutex>

#include "qproc/parallel.hpp"

namespace qproc {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDegenerateRho = 1e-12;  // 1 - rho below this returns y

constexpr double kGl4X[4] = {-0.861136311594052575, -0.339981043584856265,
                             0.339981043584856265, 0.861136311594052575};
constexpr double kGl4W[4] = {0.347854845137453857, 0.652145154862546143,
                             0.652145154862546143, 0.347854845137453857};

int64_t quantize(double v) {
  return static_cast<int64_t>(std::llround(v * 1e6));
}

// Four-point Lagrange interpolation on a unit-spaced grid: values f at
// integer abscissae k0..k0+3, evaluated at t (absolute coordinate).
double lagrange4(const double* f, int k0, double t) {
  const double t0 = t - k0;
  const double a = t0, b = t0 - 1.0, c = t0 - 2.0, d = t0 - 3.0;
  const double w0 = -b * c * d / 6.0;
  const double w1 = a * c * d / 2.0;
  const double w2 = -a * b * d / 2.0;
  const double w3 = a * b * c / 6.0;
  return w0 * f[0] + w1 * f[1] + w2 * f[2] + w3 * f[3];
}

}  // namespace

// ---------------------------------------------------------------------------
// Conditional distribution table

ConditionalDist::ConditionalDist(double y, double rho, const QParam& par)
    : par_(par), y_(y), rho_(rho) {
  if (par_.q == 1.0)
    throw std::domain_error("ConditionalDist requires q < 1");
  if (!(std::abs(rho) < 1.0))
    throw std::domain_error("ConditionalDist requires |rho| < 1");
  radius_ = 2.0 / std::sqrt(1.0 - par_.q);
  if (std::abs(y) > radius_ * (1.0 + 4e-16))
    throw std::domain_error("ConditionalDist: y must lie in S(q)");
  // The kernel sharpens as rho -> 1 (sd ~ sqrt(1-rho^2)); scale the panel
  // count to keep several panels across the peak.
  const double width = std::sqrt(std::max(1.0 - rho * rho, 1e-12));
  const int panels = std::min(8192, std::max(256, static_cast<int>(64.0 / width)));

  const double h = kPi / panels;
  std::vector<double> theta(panels + 1), cum(panels + 1);
  theta[0] = 0.0;
  cum[0] = 0.0;
  double acc = 0.0;
  const auto g = [&](double th) {
    const double st = std::sin(th);
    if (st <= 0.0) return 0.0;
    const double x = radius_ * std::cos(th);
    const double ls = detail::log_shape_transition(x, y_, rho_, par_);
    if (!std::isfinite(ls)) return 0.0;
    return std::exp(ls) * radius_ * st;
  };
  for (int j = 0; j < panels; ++j) {
    const double a = j * h, c = a + 0.5 * h;
    double panel = 0.0;
    for (int i = 0; i < 4; ++i) panel += kGl4W[i] * g(c + 0.5 * h * kGl4X[i]);
    acc += panel * 0.5 * h;
    theta[j + 1] = (j + 1) * h;
    cum[j + 1] = acc;
  }
  if (!(acc > 0.0))
    throw std::runtime_error("ConditionalDist: degenerate mass");
  for (double& v : cum) v /= acc;
  cum.back() = 1.0;
  cum_ = PchipCurve(std::move(theta), std::move(cum));
}

double ConditionalDist::cdf(double x) const {
  if (x <= -radius_) return 0.0;
  if (x >= radius_) return 1.0;
  const double theta = std::acos(std::clamp(x / radius_, -1.0, 1.0));
  return 1.0 - cum_.eval(theta);
}

double ConditionalDist::quantile(double u) const {
  if (u <= 0.0) return -radius_;
  if (u >= 1.0) return radius_;
  const double target = 1.0 - u;
  double lo = 0.0, hi = kPi;
  while (hi - lo > 1e-13) {
    const double mid = 0.5 * (lo + hi);
    (cum_.eval(mid) < target ? lo : hi) = mid;
  }
  return std::clamp(radius_ * std::cos(0.5 * (lo + hi)), -radius_, radius_);
}

namespace {

struct CondKey {
  double q, tol;
  int64_t y, rho;
  bool operator<(const CondKey& o) const {
    if (q != o.q) return q < o.q;
    if (tol != o.tol) return tol < o.tol;
    if (y != o.y) return y < o.y;
    return rho < o.rho;
  }
};

struct FamilyKey {
  double q, tol;
  int64_t rho;
  bool operator<(const FamilyKey& o) const {
    if (q != o.q) return q < o.q;
    if (tol != o.tol) return tol < o.tol;
    return rho < o.rho;
  }
};

// Blocking LRU: the builder runs under the lock so concurrent first access
// waits for one build instead of duplicating it. Table contents are a pure
// function of the key, so eviction order never changes sampled values.
template <class Key, class Value>
class LruCache {
 public:
  explicit LruCache(size_t capacity) : capacity_(capacity) {}

  template <class Builder>
  std::shared_ptr<const Value> get_or_build(const Key& key, Builder&& build) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = index_.find(key);
    if (it != index_.end()) {
      order_.splice(order_.begin(), order_, it->second);
      return it->second->second;
    }
    std::shared_ptr<const Value> value = build();
    order_.emplace_front(key, value);
    index_[key] = order_.begin();
    if (index_.size() > capacity_) {
      index_.erase(order_.back().first);
      order_.pop_back();
    }
    return value;
  }

 private:
  size_t capacity_;
  std::list<std::pair<Key, std::shared_ptr<const Value>>> order_;
  std::map<Key, typename std::list<
                    std::pair<Key, std::shared_ptr<const Value>>>::iterator>
      index_;
  std::mutex mu_;
};

}  // namespace

std::shared_ptr<const ConditionalDist> conditional_dist(double y, double rho,
                                                        const QParam& par) {
  static LruCache<CondKey, ConditionalDist> cache(64);
  const CondKey key{par.q, par.product_tol, quantize(y), quantize(rho)};
  // build from the quantized key so repeated nearby states share a table
  const double yq = static_cast<double>(key.y) * 1e-6;
  const double rq = static_cast<double>(key.rho) * 1e-6;
  const double r = 2.0 / std::sqrt(1.0 - par.q);
  return cache.get_or_build(key, [&] {
    return std::make_shared<const ConditionalDist>(
        std::clamp(yq, -r, r), std::clamp(rq, -1.0 + 1e-9, 1.0 - 1e-9), par);
  });
}

// ---------------------------------------------------------------------------
// Transition family (per-rho bank of quantile tables)

TransitionFamily::TransitionFamily(double rho, const QParam& par)
    : par_(par), rho_(rho), ny_(129), nu_(257) {
  if (par_.q == 1.0)
    throw std::domain_error("TransitionFamily requires q < 1");
  radius_ = 2.0 / std::sqrt(1.0 - par_.q);
  ynodes_.resize(ny_);
  xq_.assign(ny_, std::vector<double>(nu_));
  for (int i = 0; i < ny_; ++i) {
    // Chebyshev-extrema spacing clusters nodes near the support edges
    // where the conditional law varies fastest in y.
    ynodes_[i] = -radius_ * std::cos(kPi * i / (ny_ - 1));
    const ConditionalDist dist(ynodes_[i], rho_, par_);
    for (int j = 0; j < nu_; ++j) {
      const double u = 0.5 * (1.0 - std::cos(kPi * j / (nu_ - 1)));
      xq_[i][j] = dist.quantile(u);
    }
  }
}

double TransitionFamily::sample_x(double y, double u) const {
  // u lives on a cosine-clustered grid: uniform in s = acos(1 - 2u)
  const double s = std::acos(std::clamp(1.0 - 2.0 * u, -1.0, 1.0));
  const double tu = s * (nu_ - 1) / kPi;
  int ju = std::clamp(static_cast<int>(tu) - 1, 0, nu_ - 4);
  // y nodes are uniform in psi = acos(-y/R)
  const double psi = std::acos(std::clamp(-y / radius_, -1.0, 1.0));
  const double ty = psi * (ny_ - 1) / kPi;
  int jy = std::clamp(static_cast<int>(ty) - 1, 0, ny_ - 4);

  double fy[4];
  for (int i = 0; i < 4; ++i)
    fy[i] = lagrange4(&xq_[jy + i][ju], ju, tu);
  // Lagrange in psi across the four y nodes
  double acc = 0.0;
  for (int i = 0; i < 4; ++i) {
    double w = 1.0;
    for (int k = 0; k < 4; ++k)
      if (k != i) w *= (ty - (jy + k)) / static_cast<double>(i - k);
    acc += w * fy[i];
  }
  return std::clamp(acc, -radius_, radius_);
}

std::shared_ptr<const TransitionFamily> transition_family(double rho,
                                                          const QParam& par) {
  static LruCache<FamilyKey, TransitionFamily> cache(8);
  const FamilyKey key{par.q, par.product_tol, quantize(rho)};
  const double rq = static_cast<double>(key.rho) * 1e-6;
  return cache.get_or_build(key, [&] {
    return std::make_shared<const TransitionFamily>(
        std::clamp(rq, 0.0, 1.0 - 1e-9), par);
  });
}

// ---------------------------------------------------------------------------
// Sampling and simulation

double sample_stationary(const QParam& par, Rng& rng) {
  if (par.q == 1.0) return rng.next_gaussian();
  return stationary_dist(par)->sample_x(rng.next_open());
}

double sample_transition(double y, double rho, const QParam& par, Rng& rng) {
  if (!(rho >= 0.0) || rho > 1.0)
    throw std::domain_error("sample_transition requires 0 <= rho <= 1");
  if (1.0 - rho < kDegenerateRho) return y;
  if (par.q == 1.0)
    return rho * y + std::sqrt(1.0 - rho * rho) * rng.next_gaussian();
  const double r = 2.0 / std::sqrt(1.0 - par.q);
  if (std::abs(y) > r * (1.0 + 4e-16))
    throw std::domain_error("sample_transition: y must lie in S(q)");
  if (rho == 0.0) return sample_stationary(par, rng);
  return conditional_dist(y, rho, par)->quantile(rng.next_open());
}

namespace {

void require_increasing(const std::vector<double>& times) {
  if (times.empty())
    throw std::invalid_argument("times must be nonempty");
  for (size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1]))
      throw std::invalid_argument("times must be strictly increasing");
  }
}

// One Markov step with correlation rho; path simulation goes through the
// per-rho family tables instead of per-(y,rho) builds, which fresh y every
// step would otherwise force.
double markov_step(double y, double rho, const QParam& par, Rng& rng) {
  if (1.0 - rho < kDegenerateRho) return y;
  if (par.q == 1.0)
    return rho * y + std::sqrt(1.0 - rho * rho) * rng.next_gaussian();
  if (rho <= 0.0) return sample_stationary(par, rng);
  return transition_family(rho, par)->sample_x(y, rng.next_open());
}

Trajectory ou_path(const OUParams& params, const std::vector<double>& times,
                   Rng rng, uint64_t seed) {
  Trajectory out;
  out.times = times;
  out.values.resize(times.size());
  out.seed = seed;
  out.kind = ProcessKind::kOU;
  double y = sample_stationary(params.par, rng);
  out.values[0] = y;
  for (size_t i = 1; i < times.size(); ++i) {
    const double rho = std::exp(-params.alpha * (times[i] - times[i - 1]));
    y = markov_step(y, rho, params.par, rng);
    out.values[i] = y;
  }
  return out;
}

Trajectory qwiener_path(const QParam& par, const std::vector<double>& times,
                        Rng rng, uint64_t seed, double internal_alpha) {
  Trajectory out;
  out.times = times;
  out.values.resize(times.size());
  out.seed = seed;
  out.kind = ProcessKind::kQWiener;
  double y = 0.0;
  double prev_s = 0.0;
  bool started = false;
  for (size_t i = 0; i < times.size(); ++i) {
    const double tau = times[i];
    if (tau == 0.0) {
      out.values[i] = 0.0;
      continue;
    }
    const double s = std::log(tau) / (2.0 * internal_alpha);
    if (!started) {
      y = sample_stationary(par, rng);
      started = true;
    } else {
      const double rho = std::exp(-internal_alpha * (s - prev_s));
      y = markov_step(y, rho, par, rng);
    }
    prev_s = s;
    out.values[i] = std::sqrt(tau) * y;
  }
  return out;
}

}  // namespace

Trajectory simulate_ou(const OUParams& params, const std::vector<double>& times,
                       uint64_t seed) {
  require_increasing(times);
  return ou_path(params, times, Rng::for_stream(seed, 0), seed);
}

Trajectory simulate_qwiener(const QParam& par, const std::vector<double>& times,
                            uint64_t seed, double internal_alpha) {
  require_increasing(times);
  if (times.front() < 0.0)
    throw std::invalid_argument("q-Wiener times must be >= 0");
  if (!(internal_alpha > 0.0))
    throw std::domain_error("internal_alpha must be > 0");
  return qwiener_path(par, times, Rng::for_stream(seed, 0), seed,
                      internal_alpha);
}

int resolve_thread_count(int requested) {
  if (requested > 0) return std::min(requested, 256);
  if (const char* env = std::getenv("QPROC_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<int>(std::min(v, 256L));
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

std::vector<Trajectory> simulate_ou_paths(const OUParams& params,
                                          const std::vector<double>& times,
                                          uint64_t seed, int n_paths,
                                          int n_threads) {
  require_increasing(times);
  if (n_paths < 1) throw std::invalid_argument("n_paths must be >= 1");
  std::vector<Trajectory> out(static_cast<size_t>(n_paths));
  parallel_for(n_paths, resolve_thread_count(n_threads), [&](int p) {
    out[static_cast<size_t>(p)] = ou_path(
        params, times, Rng::for_stream(seed, static_cast<uint64_t>(p)), seed);
  });
  return out;
}

std::vector<Trajectory> simulate_qwiener_paths(const QParam& par,
                                               const std::vector<double>& times,
                                               uint64_t seed, int n_paths,
                                               int n_threads) {
  require_increasing(times);
  if (times.front() < 0.0)
    throw std::invalid_argument("q-Wiener times must be >= 0");
  if (n_paths < 1) throw std::invalid_argument("n_paths must be >= 1");
  std::vector<Trajectory> out(static_cast<size_t>(n_paths));
  parallel_for(n_paths, resolve_thread_count(n_threads), [&](int p) {
    out[static_cast<size_t>(p)] = qwiener_path(
        par, times, Rng::for_stream(seed, static_cast<uint64_t>(p)), seed, 0.5);
  });
  return out;
}

// ---------------------------------------------------------------------------
// Closed forms

double ou_covariance(double s, double t, double alpha) {
  if (!(alpha > 0.0)) throw std::domain_error("ou_covariance: alpha > 0");
  return std::exp(-alpha * std::abs(s - t));
}

double wiener_covariance(double s, double t) {
  if (s < 0.0 || t < 0.0)
    throw std::domain_error("wiener_covariance: times must be >= 0");
  return std::min(s, t);
}

IncrementMoments increment_moments(double sigma, double tau, double x_sigma,
                                   double q) {
  require_q(q);
  if (!(0.0 < sigma && sigma < tau))
    throw std::domain_error("increment_moments requires 0 < sigma < tau");
  const double d = tau - sigma;
  const double omq = 1.0 - q;
  IncrementMoments m;
  m.m2 = d;
  m.m3 = -omq * d * x_sigma;
  m.m4 = d * (x_sigma * x_sigma * omq * omq + (2.0 + q) * d +
              sigma * (1.0 - q * q));
  return m;
}

namespace {

void require_harness_args(double sigma, double delta, double gamma) {
  if (!(delta > 0.0) || !(gamma > 0.0))
    throw std::domain_error("delta and gamma must be > 0");
  if (!(sigma > delta))
    throw std::domain_error("requires sigma > delta");
}

}  // namespace

double harness_mean(double x_left, double x_right, double sigma, double delta,
                    double gamma) {
  require_harness_args(sigma, delta, gamma);
  return (gamma * x_left + delta * x_right) / (delta + gamma);
}

double harness_second(double x_left, double x_right, double sigma,
                      double delta, double gamma, double q) {
  require_q(q);
  require_harness_args(sigma, delta, gamma);
  const double omq = 1.0 - q;
  const double lead =
      delta * gamma / ((delta + gamma) * (sigma * omq + gamma + q * delta));
  return lead * ((omq * sigma + gamma) * x_left * x_left / delta +
                 (omq * sigma + q * delta) * x_right * x_right / gamma +
                 (q + 1.0) * x_left * x_right + (delta + gamma));
}

double harness_var(double x_left, double x_right, double sigma, double delta,
                   double gamma, double q) {
  require_q(q);
  require_harness_args(sigma, delta, gamma);
  const double omq = 1.0 - q;
  const double lead = delta * gamma / (sigma * omq + gamma + q * delta);
  const double dg = delta + gamma;
  return lead * (1.0 - omq * (x_right - x_left) *
                           ((sigma + gamma) * x_left -
                            (sigma - delta) * x_right) /
                           (dg * dg));
}

double ou_bridge_var(double y_left, double y_right, double delta, double gamma,
                     double alpha, double q) {
  require_q(q);
  if (!(delta > 0.0) || !(gamma > 0.0) || !(alpha > 0.0))
    throw std::domain_error("ou_bridge_var: delta, gamma, alpha must be > 0");
  const double r1 = std::exp(-alpha * delta);
  const double r2 = std::exp(-alpha * gamma);
  const double c = r1 * r2;
  const double lead =
      (1.0 - r1 * r1) * (1.0 - r2 * r2) / (1.0 - q * c * c);
  const double d = 1.0 - c * c;
  return lead * (1.0 - (1.0 - q) * c * (y_left - c * y_right) *
                           (y_right - c * y_left) / (d * d));
}

double BridgeCoeffs::at(int r, int m) const {
  for (const Entry& e : entries)
    if (e.r == r && e.m == m) return e.value;
  throw std::out_of_range("BridgeCoeffs: no entry at (r, m)");
}

BridgeCoeffs bridge_coeffs(int n, double rho1, double rho2, double q) {
  require_q(q);
  if (n < 1 || n > 4)
    throw std::domain_error(
        "bridge_coeffs: n must lie in 1..4 (no closed form beyond n = 4)");
  if (!(rho1 > 0.0 && rho1 < 1.0 && rho2 > 0.0 && rho2 < 1.0))
    throw std::domain_error("bridge_coeffs requires rho1, rho2 in (0, 1)");
  const int half = n / 2;
  const double r1sq = rho1 * rho1, r2sq = rho2 * rho2;
  const double denom = pochhammer(r1sq * r2sq, q, n);
  std::vector<double> a0(static_cast<size_t>(n) + 1);
  for (int l = 0; l <= n; ++l) {
    a0[static_cast<size_t>(l)] = q_binomial(n, l, q) *
                                 std::pow(rho1, n - l) *
                                 pochhammer(r2sq, q, n - l) *
                                 std::pow(rho2, l) * pochhammer(r1sq, q, l) /
                                 denom;
  }
  BridgeCoeffs out;
  out.n = n;
  for (int l = 0; l <= n; ++l)
    out.entries.push_back({0, -half + l, n - l, l, a0[static_cast<size_t>(l)]});
  if (n == 2 || n == 3) {
    const double f = -q_number(n - 1, q) * rho1 * rho2;
    for (int lp = 0; lp <= n - 2; ++lp)
      out.entries.push_back(
          {1, -half + 1 + lp, n - 2 - lp, lp, f * a0[static_cast<size_t>(lp) + 1]});
  } else if (n == 4) {
    const double f3 = -q_number(3, q) * rho1 * rho2;
    const double two = q_number(2, q);
    const double f2 = -two * two * rho1 * rho2;
    out.entries.push_back({1, -1, 2, 0, f3 * a0[1]});
    out.entries.push_back({1, 0, 1, 1, f2 * a0[2]});
    out.entries.push_back({1, 1, 0, 2, f3 * a0[3]});
    out.entries.push_back(
        {2, 0, 0, 0, q * (1.0 + q) * r1sq * r2sq * a0[2]});
  }
  return out;
}

double hermite_bridge_mean(int n, double y_left, double y_right, double rho1,
                           double rho2, double q) {
  const BridgeCoeffs coeffs = bridge_coeffs(n, rho1, rho2, q);
  if (q < 1.0) {
    const double r = 2.0 / std::sqrt(1.0 - q);
    if (std::abs(y_left) > r * (1.0 + 4e-16) ||
        std::abs(y_right) > r * (1.0 + 4e-16))
      throw std::domain_error("hermite_bridge_mean: endpoints must lie in S(q)");
  }
  const PolySeq hl = hermite_seq(n, y_left, q);
  const PolySeq hr = hermite_seq(n, y_right, q);
  double sum = 0.0;
  for (const auto& e : coeffs.entries)
    sum += e.value * hl[e.left_degree] * hr[e.right_degree];
  return sum;
}

double spectral_density(int n, double omega, double alpha, double q) {
  if (n < 1) throw std::domain_error("spectral_density: n >= 1");
  if (!(alpha > 0.0)) throw std::domain_error("spectral_density: alpha > 0");
  // E H_n^2(Y_t|q) = [n]_q! by orthogonality
  return q_factorial(n, q) * 2.0 * n * alpha /
         (omega * omega + static_cast<double>(n) * n * alpha * alpha);
}

TspParams tsp_params(double rho, double q) {
  require_q(q);
  if (!(std::abs(rho) > 0.0 && std::abs(rho) < 1.0))
    throw std::domain_error("tsp_params requires 0 < |rho| < 1");
  const double r2 = rho * rho, r4 = r2 * r2;
  TspParams p;
  p.a = r2 * (1.0 - q * r2) / ((r2 + 1.0) * (1.0 - q * r4));
  p.b = r2 * (1.0 - r2) * (1.0 + q) / ((r2 + 1.0) * (1.0 - q * r4));
  p.c = (1.0 - r2) * (1.0 - r2) / (1.0 - q * r4);
  return p;
}

TspParamsJk tsp_params_jk(int j, int k, double rho, double q) {
  require_q(q);
  if (j < 1 || k < 1) throw std::domain_error("tsp_params_jk: j, k >= 1");
  if (!(std::abs(rho) > 0.0 && std::abs(rho) < 1.0))
    throw std::domain_error("tsp_params_jk requires 0 < |rho| < 1");
  const double r2j = std::pow(rho, 2 * j);
  const double r2k = std::pow(rho, 2 * k);
  const double rjk = std::pow(rho, j + k);
  const double dq = 1.0 - q * r2j * r2k;
  const double dr = 1.0 - r2j * r2k;
  TspParamsJk p;
  p.a1 = r2j * (1.0 - r2k) * (1.0 - q * r2k) / (dq * dr);
  p.a2 = r2k * (1.0 - r2j) * (1.0 - q * r2j) / (dq * dr);
  p.b = (q + 1.0) * rjk * (1.0 - r2j) * (1.0 - r2k) / (dq * dr);
  p.c = (1.0 - r2j) * (1.0 - r2k) / dq;
  return p;
}

MomentIdentities moment_identities(double rho, double q, int n, int m, int j,
                                   int k) {
  require_q(q);
  if (!(std::abs(rho) < 1.0))
    throw std::domain_error("moment_identities requires |rho| < 1");
  if (j < 1 || k < 1) throw std::domain_error("moment_identities: j, k >= 1");
  MomentIdentities out;
  out.ex4 = 2.0 + q;
  out.ex2x2 = 1.0 + std::pow(rho, 2 * std::abs(n - m)) * (1.0 + q);
  out.ex2xx = std::pow(rho, j + k) * (2.0 + q);
  return out;
}

}  // namespace qproc
