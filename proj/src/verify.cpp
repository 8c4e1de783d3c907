#include "qproc/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <limits>
#include <sstream>

#include "qproc/orthopoly.hpp"
#include "qproc/parallel.hpp"
#include "qproc/process.hpp"
#include "qproc/rng.hpp"

namespace qproc {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

// Running mean accumulator. The standard error comes from 64 interleaved
// batch means once enough samples exist: for heavy-tailed summands (high
// Hermite degrees) the raw sample variance underestimates badly at small
// n, while batch means are close to normal and their spread is a stable
// estimate.
struct Acc {
  static constexpr int kBatches = 64;
  double s1 = 0.0, s2 = 0.0;
  double bsum[kBatches] = {0.0};
  long n = 0;
  void add(double v) {
    s1 += v;
    s2 += v * v;
    bsum[n % kBatches] += v;
    ++n;
  }
  MeanSe done() const {
    MeanSe r;
    r.n = n;
    r.mean = n > 0 ? s1 / n : 0.0;
    if (n >= 10 * kBatches) {
      double bm = 0.0;
      double bmean[kBatches];
      for (int b = 0; b < kBatches; ++b) {
        const long nb = n / kBatches + (b < n % kBatches ? 1 : 0);
        bmean[b] = bsum[b] / static_cast<double>(nb);
        bm += bmean[b];
      }
      bm /= kBatches;
      double var_bm = 0.0;
      for (int b = 0; b < kBatches; ++b)
        var_bm += (bmean[b] - bm) * (bmean[b] - bm);
      var_bm /= (kBatches - 1);
      r.se = std::sqrt(var_bm / kBatches);
    } else if (n > 1) {
      const double var = std::max(0.0, (s2 - n * r.mean * r.mean) / (n - 1));
      r.se = std::sqrt(var / n);
    }
    return r;
  }
};

Report mc_report(const std::string& id, const MeanSe& ms, double target,
                 uint64_t seed, double multiple) {
  return make_report(id, ms.mean, target, multiple * ms.se,
                     TolKind::kStdErrMultiple, ms.n, seed);
}

uint64_t derive_seed(uint64_t base, const std::string& id) {
  return mix64(base ^ fnv1a64(id));
}

// ---------------------------------------------------------------------------
// Weighted grids for quadrature checks

// Cosine-substitution trapezoid grid over S(q) with the weight already
// containing the density value: integral of g against the density is
// sum_i w[i] g(x[i]).
struct WeightedGrid {
  std::vector<double> x, w;
};

WeightedGrid density_grid(const QParam& par, int nodes,
                          const std::function<double(double)>& density) {
  WeightedGrid grid;
  const double r = 2.0 / std::sqrt(1.0 - par.q);
  const double h = kPi / nodes;
  grid.x.reserve(nodes + 1);
  grid.w.reserve(nodes + 1);
  for (int j = 0; j <= nodes; ++j) {
    const double theta = h * j;
    const double x = r * std::cos(theta);
    const double scale = (j == 0 || j == nodes) ? 0.5 : 1.0;
    grid.x.push_back(x);
    grid.w.push_back(scale * h * r * std::sin(theta) * density(x));
  }
  return grid;
}

// values[i][k] = degree-k polynomial at grid point i
std::vector<std::vector<double>> poly_table(
    const std::vector<double>& xs,
    const std::function<PolySeq(double)>& seq) {
  std::vector<std::vector<double>> table;
  table.reserve(xs.size());
  for (double x : xs) table.push_back(seq(x).values);
  return table;
}

double pair_integral(const WeightedGrid& grid,
                     const std::vector<std::vector<double>>& table, int n,
                     int m) {
  double sum = 0.0;
  for (size_t i = 0; i < grid.x.size(); ++i)
    sum += grid.w[i] * table[i][static_cast<size_t>(n)] *
           table[i][static_cast<size_t>(m)];
  return sum;
}

// E(y_mid^k H_n | endpoints) for the Markov-factorized bridge density
// f_CN(mid|left,r1) f_CN(right|mid,r2) / f_CN(right|left,r1 r2).
double bridge_oracle(int n, int power, double y_left, double y_right,
                     double rho1, double rho2, const QParam& par, int nodes) {
  const double denom = pdf_transition(y_right, y_left, rho1 * rho2, par);
  QuadratureSpec spec;
  spec.nodes = nodes;
  const double num = integrate_support(
      [&](double y) {
        double g = pdf_transition(y, y_left, rho1, par) *
                   pdf_transition(y_right, y, rho2, par);
        if (n > 0) g *= hermite_seq(n, y, par.q).values[static_cast<size_t>(n)];
        for (int p = 0; p < power; ++p) g *= y;
        return g;
      },
      par.q, spec);
  return num / denom;
}

// Fresh-y transition draw for moment checks: per-rho family tables at
// q < 1, the Gaussian step at q = 1.
double sample_transition_for_check(double y, double rho, const QParam& par,
                                   Rng& rng) {
  if (par.q == 1.0)
    return rho * y + std::sqrt(1.0 - rho * rho) * rng.next_gaussian();
  return transition_family(rho, par)->sample_x(y, rng.next_open());
}

// Kolmogorov-Smirnov distance of a sample against a CDF.
double ks_statistic(std::vector<double>& sample,
                    const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max(d, std::abs((i + 1) / n - f));
    d = std::max(d, std::abs(i / n - f));
  }
  return d;
}

}  // namespace

// ---------------------------------------------------------------------------
// Basics

uint64_t fnv1a64(const std::string& s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

MeanSe mean_se(const std::vector<double>& values) {
  Acc acc;
  for (double v : values) acc.add(v);
  return acc.done();
}

Report make_report(std::string check_id, double statistic, double target,
                   double tolerance, TolKind kind, long samples_or_nodes,
                   std::optional<uint64_t> seed) {
  Report r;
  r.check_id = std::move(check_id);
  r.statistic = statistic;
  r.target = target;
  r.tolerance = tolerance;
  r.tolerance_kind = kind;
  r.samples_or_nodes = samples_or_nodes;
  r.seed = seed;
  const double diff = std::abs(statistic - target);
  if (!std::isfinite(statistic)) {
    r.passed = false;
  } else if (kind == TolKind::kRelative) {
    r.passed = diff <= tolerance * std::abs(target);
  } else {
    r.passed = diff <= tolerance;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Orthogonality (stationary and conditional families) + propagation

std::vector<Report> check_orthogonality(double q, int n_max,
                                        const QuadratureSpec& spec) {
  require_q(q);
  std::vector<Report> out;
  const double diag_tol = (q < 1.0 && std::abs(q) >= 0.9) ? 1e-7 : 1e-8;
  const std::string qs = "q=" + fmt(q);

  std::vector<double> fact(static_cast<size_t>(n_max) + 1);
  for (int n = 0; n <= n_max; ++n)
    fact[static_cast<size_t>(n)] = q_factorial(n, q);

  WeightedGrid grid;
  long nodes = 0;
  if (q == 1.0) {
    const GaussHermiteRule& rule = gauss_hermite_rule(61);
    grid.x = rule.x;
    grid.w = rule.w;
    nodes = 61;
  } else {
    QParam par(q, 1e-15);  // tightened truncation keeps q = 0.9 at 1e-7
    grid = density_grid(par, spec.nodes,
                        [&](double x) { return pdf_stationary(x, par); });
    nodes = spec.nodes;
  }
  const auto h_table = poly_table(grid.x, [&](double x) { return hermite_seq(n_max, x, q); });

  for (int n = 0; n <= n_max; ++n) {
    for (int m = n; m <= n_max; ++m) {
      const double value = pair_integral(grid, h_table, n, m);
      const std::string id = "hermite_orthogonality/" + qs + "/n=" +
                             std::to_string(n) + "/m=" + std::to_string(m);
      if (n == m) {
        out.push_back(make_report(id, value, fact[static_cast<size_t>(n)],
                                  diag_tol, TolKind::kRelative, nodes));
      } else {
        const double scale = std::sqrt(fact[static_cast<size_t>(n)] *
                                       fact[static_cast<size_t>(m)]);
        out.push_back(make_report(id, value, 0.0, diag_tol * scale,
                                  TolKind::kAbsolute, nodes));
      }
    }
  }

  // Al-Salam-Chihara family against the conditional density.
  const int n_asc = std::min(n_max, 6);
  const double r = q < 1.0 ? 2.0 / std::sqrt(1.0 - q) : 0.0;
  const double asc_tol = 1e-7;
  for (double rho : {0.3, 0.7}) {
    for (double yf : {0.0, 0.45}) {
      const double y = q < 1.0 ? yf * r : yf * 2.0;
      WeightedGrid cgrid;
      if (q == 1.0) {
        // substitute x = rho y + sqrt(1-rho^2) u against the N(0,1) rule
        const GaussHermiteRule& rule = gauss_hermite_rule(61);
        const double sd = std::sqrt(1.0 - rho * rho);
        cgrid.w = rule.w;
        cgrid.x.resize(rule.x.size());
        for (size_t i = 0; i < rule.x.size(); ++i)
          cgrid.x[i] = rho * y + sd * rule.x[i];
      } else {
        QParam par(q, 1e-15);
        cgrid = density_grid(par, spec.nodes, [&](double x) {
          return pdf_transition(x, y, rho, par);
        });
      }
      const auto p_table = poly_table(cgrid.x, [&](double x) {
        return asc_seq(n_asc, x, y, rho, q);
      });
      std::vector<double> targets(static_cast<size_t>(n_asc) + 1);
      for (int n = 0; n <= n_asc; ++n)
        targets[static_cast<size_t>(n)] =
            pochhammer(rho * rho, q, n) * fact[static_cast<size_t>(n)];
      for (int n = 0; n <= n_asc; ++n) {
        for (int m = n; m <= n_asc; ++m) {
          const double value = pair_integral(cgrid, p_table, n, m);
          const std::string id = "asc_orthogonality/" + qs +
                                 "/rho=" + fmt(rho) + "/y=" + fmt(y) +
                                 "/n=" + std::to_string(n) +
                                 "/m=" + std::to_string(m);
          if (n == m) {
            out.push_back(make_report(id, value,
                                      targets[static_cast<size_t>(n)], asc_tol,
                                      TolKind::kRelative, nodes));
          } else {
            const double scale = std::sqrt(targets[static_cast<size_t>(n)] *
                                           targets[static_cast<size_t>(m)]);
            out.push_back(make_report(id, value, 0.0, asc_tol * scale,
                                      TolKind::kAbsolute, nodes));
          }
        }
      }
    }
  }

  // Propagation: integral of H_n against f_CN equals rho^n H_n(y).
  {
    const double rho = 0.6;
    const double y = q < 1.0 ? 0.3 * r : 0.6;
    WeightedGrid cgrid;
    if (q == 1.0) {
      const GaussHermiteRule& rule = gauss_hermite_rule(61);
      const double sd = std::sqrt(1.0 - rho * rho);
      cgrid.w = rule.w;
      cgrid.x.resize(rule.x.size());
      for (size_t i = 0; i < rule.x.size(); ++i)
        cgrid.x[i] = rho * y + sd * rule.x[i];
    } else {
      QParam par(q, 1e-15);
      cgrid = density_grid(par, spec.nodes, [&](double x) {
        return pdf_transition(x, y, rho, par);
      });
    }
    const int n_prop = std::min(n_max, 6);
    const auto h_cond = poly_table(cgrid.x, [&](double x) { return hermite_seq(n_prop, x, q); });
    const PolySeq hy = hermite_seq(n_prop, y, q);
    for (int n = 1; n <= n_prop; ++n) {
      double value = 0.0;
      for (size_t i = 0; i < cgrid.x.size(); ++i)
        value += cgrid.w[i] * h_cond[i][static_cast<size_t>(n)];
      const double target = std::pow(rho, n) * hy[n];
      out.push_back(make_report("hermite_propagation/" + qs + "/rho=" +
                                    fmt(rho) + "/y=" + fmt(y) +
                                    "/n=" + std::to_string(n),
                                value, target,
                                1e-8 * std::max(1.0, std::abs(target)),
                                TolKind::kAbsolute, nodes));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Chapman-Kolmogorov

std::vector<Report> check_chapman_kolmogorov(
    double q, double rho1, double rho2,
    const std::vector<std::pair<double, double>>& points,
    const QuadratureSpec& spec) {
  require_q(q);
  std::vector<Report> out;
  const std::string base = "chapman_kolmogorov/q=" + fmt(q) +
                           "/rho1=" + fmt(rho1) + "/rho2=" + fmt(rho2);
  for (const auto& [x, z] : points) {
    double lhs;
    long nodes;
    if (q == 1.0) {
      const double sd = std::sqrt(1.0 - rho2 * rho2);
      lhs = integrate_gauss_hermite(
          [&](double u) {
            return pdf_transition(x, rho2 * z + sd * u, rho1, 1.0);
          },
          61);
      nodes = 61;
    } else {
      QParam par(q, 1e-15);
      QuadratureSpec s = spec;
      lhs = integrate_support(
          [&](double y) {
            return pdf_transition(x, y, rho1, par) *
                   pdf_transition(y, z, rho2, par);
          },
          q, s);
      nodes = spec.nodes;
    }
    const double rhs = pdf_transition(x, z, rho1 * rho2, q);
    out.push_back(make_report(base + "/x=" + fmt(x) + "/z=" + fmt(z), lhs,
                              rhs, 1e-7, TolKind::kAbsolute, nodes));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Martingales

std::vector<Report> check_martingales(double q, double alpha,
                                      const McConfig& config) {
  require_q(q);
  if (!(alpha > 0.0)) throw std::domain_error("alpha must be > 0");
  std::vector<Report> out;
  const QParam par(q);
  const std::string qa = "q=" + fmt(q) + "/alpha=" + fmt(alpha);
  const double r = q < 1.0 ? 2.0 / std::sqrt(1.0 - q)
                           : std::numeric_limits<double>::infinity();
  const double y0 = q < 1.0 ? 0.45 * r : 0.6;
  const long n_draws = config.n_paths;
  const int n_deg = std::min(config.max_degree, 4);

  // Hermite martingale from a fixed state: mean H_n(Y_{t+dt}) given
  // Y_t = y0 equals e^{-n alpha dt} H_n(y0).
  {
    const std::string id0 = "hermite_martingale/" + qa;
    const uint64_t seed = derive_seed(config.seed, id0);
    Rng rng(seed);
    const double rho = std::exp(-alpha * config.dt);
    std::vector<Acc> acc(static_cast<size_t>(n_deg) + 1);
    Acc acc_phi;
    const double gamma = q < 1.0 ? 0.6 / std::sqrt(1.0 - q) : 0.8;
    for (long i = 0; i < n_draws; ++i) {
      const double y = sample_transition(y0, rho, par, rng);
      const PolySeq h = hermite_seq(n_deg, y, q);
      for (int n = 1; n <= n_deg; ++n) acc[static_cast<size_t>(n)].add(h[n]);
      acc_phi.add(phi(y, gamma, par));
    }
    const PolySeq hy0 = hermite_seq(n_deg, y0, q);
    for (int n = 1; n <= n_deg; ++n) {
      const double target = std::exp(-n * alpha * config.dt) * hy0[n];
      out.push_back(mc_report(id0 + "/n=" + std::to_string(n),
                              acc[static_cast<size_t>(n)].done(), target, seed,
                              config.se_multiple));
    }
    // Exponential martingale with the same transition draws:
    // mean phi(Y_{t+dt}, gamma) = phi(y0, gamma e^{-alpha dt}).
    const double target = phi(y0, gamma * rho, par);
    out.push_back(mc_report("exponential_martingale/" + qa + "/gamma=" +
                                fmt(gamma),
                            acc_phi.done(), target, seed, config.se_multiple));
  }

  // Stationary-start form: mean H_n(Y_0) H_n(Y_dt) = e^{-n alpha dt} [n]_q!.
  {
    const std::string id0 = "hermite_covariance/" + qa;
    const uint64_t seed = derive_seed(config.seed, id0);
    Rng rng(seed);
    const double rho = std::exp(-alpha * config.dt);
    std::vector<Acc> acc(static_cast<size_t>(n_deg) + 1);
    for (long i = 0; i < n_draws; ++i) {
      const double a = sample_stationary(par, rng);
      const double b =
          q < 1.0 ? transition_family(rho, par)->sample_x(a, rng.next_open())
                  : rho * a + std::sqrt(1.0 - rho * rho) * rng.next_gaussian();
      const PolySeq ha = hermite_seq(n_deg, a, q);
      const PolySeq hb = hermite_seq(n_deg, b, q);
      for (int n = 1; n <= n_deg; ++n)
        acc[static_cast<size_t>(n)].add(ha[n] * hb[n]);
    }
    for (int n = 1; n <= n_deg; ++n) {
      const double target =
          std::exp(-n * alpha * config.dt) * q_factorial(n, q);
      out.push_back(mc_report(id0 + "/n=" + std::to_string(n),
                              acc[static_cast<size_t>(n)].done(), target, seed,
                              config.se_multiple));
    }
  }

  // q-Wiener martingale: from X_sigma = x0, mean tau^{n/2} H_n(X_tau/sqrt(tau))
  // equals sigma^{n/2} H_n(x0/sqrt(sigma)).
  const double sigma = config.sigma, tau = config.tau;
  const double x0 = 0.5;
  {
    const std::string id0 = "qwiener_martingale/" + qa;
    const uint64_t seed = derive_seed(config.seed, id0);
    Rng rng(seed);
    const double rho = std::sqrt(sigma / tau);
    const double ycond = x0 / std::sqrt(sigma);
    std::vector<Acc> acc(static_cast<size_t>(n_deg) + 1);
    for (long i = 0; i < n_draws; ++i) {
      const double ynew = sample_transition(ycond, rho, par, rng);
      const PolySeq h = hermite_seq(n_deg, ynew, q);  // X_tau/sqrt(tau) = ynew
      for (int n = 1; n <= n_deg; ++n)
        acc[static_cast<size_t>(n)].add(std::pow(tau, 0.5 * n) * h[n]);
    }
    const PolySeq hc = hermite_seq(n_deg, ycond, q);
    for (int n = 1; n <= n_deg; ++n) {
      const double target = std::pow(sigma, 0.5 * n) * hc[n];
      out.push_back(mc_report(id0 + "/n=" + std::to_string(n),
                              acc[static_cast<size_t>(n)].done(), target, seed,
                              config.se_multiple));
    }
  }

  // Reverse martingale: from X_tau = x0 backwards to sigma < tau (the
  // reverse kernel equals the forward one by time symmetry),
  // mean sigma^{-n/2} H_n(X_sigma/sqrt(sigma)) = tau^{-n/2} H_n(x0/sqrt(tau)).
  {
    const std::string id0 = "qwiener_reverse_martingale/" + qa;
    const uint64_t seed = derive_seed(config.seed, id0);
    Rng rng(seed);
    const double rho = std::sqrt(sigma / tau);
    const double ycond = x0 / std::sqrt(tau);
    std::vector<Acc> acc(static_cast<size_t>(n_deg) + 1);
    for (long i = 0; i < n_draws; ++i) {
      const double yold = sample_transition(ycond, rho, par, rng);
      const PolySeq h = hermite_seq(n_deg, yold, q);
      for (int n = 1; n <= n_deg; ++n)
        acc[static_cast<size_t>(n)].add(std::pow(sigma, -0.5 * n) * h[n]);
    }
    const PolySeq hc = hermite_seq(n_deg, ycond, q);
    for (int n = 1; n <= n_deg; ++n) {
      const double target = std::pow(tau, -0.5 * n) * hc[n];
      out.push_back(mc_report(id0 + "/n=" + std::to_string(n),
                              acc[static_cast<size_t>(n)].done(), target, seed,
                              config.se_multiple));
    }
  }

  // Free resolvent identity at q = 0: from X_tau = x0, for sigma > tau,
  // mean 1/(1 - s X_sigma + sigma s^2) = 1/(1 - s x0 + tau s^2).
  if (q == 0.0) {
    const double s = 0.5, tau_f = 1.0, sigma_f = 2.0;
    const std::string id =
        "free_resolvent_martingale/" + qa + "/s=" + fmt(s);
    const uint64_t seed = derive_seed(config.seed, id);
    Rng rng(seed);
    const double rho = std::sqrt(tau_f / sigma_f);
    const double ycond = x0 / std::sqrt(tau_f);
    Acc acc;
    for (long i = 0; i < n_draws; ++i) {
      const double ynew = sample_transition(ycond, rho, par, rng);
      const double xs = std::sqrt(sigma_f) * ynew;
      acc.add(1.0 / (1.0 - s * xs + sigma_f * s * s));
    }
    const double target = 1.0 / (1.0 - s * x0 + tau_f * s * s);
    out.push_back(mc_report(id, acc.done(), target, seed, config.se_multiple));
  }

  return out;
}

// ---------------------------------------------------------------------------
// Bridges

std::vector<Report> check_bridges(double q, double alpha,
                                  const BridgeConfig& config) {
  require_q(q);
  std::vector<Report> out;
  const QParam par(q);
  const std::string qa = "q=" + fmt(q) + "/alpha=" + fmt(alpha);
  const int nodes = 4096;

  if (q < 1.0) {
    const double r = 2.0 / std::sqrt(1.0 - q);
    // (a) coefficient tables n = 1..4 on the fixed (rho1, rho2) grid
    const double endpoint_fracs[3][2] = {
        {0.21, -0.14}, {0.42, 0.35}, {-0.32, 0.57}};
    for (int n = 1; n <= 4; ++n) {
      for (double rho1 : {0.3, 0.7}) {
        for (double rho2 : {0.3, 0.7}) {
          double worst = 0.0;
          for (const auto& ep : endpoint_fracs) {
            const double yl = ep[0] * r, yr = ep[1] * r;
            const double closed =
                hermite_bridge_mean(n, yl, yr, rho1, rho2, q);
            const double oracle =
                bridge_oracle(n, 0, yl, yr, rho1, rho2, par, nodes);
            worst = std::max(worst, std::abs(closed - oracle));
          }
          out.push_back(make_report(
              "bridge_coeff_table/" + qa + "/n=" + std::to_string(n) +
                  "/rho1=" + fmt(rho1) + "/rho2=" + fmt(rho2),
              worst, 0.0, config.quad_tol, TolKind::kAbsolute, nodes));
        }
      }
    }

    // (b) randomized admissible parameter points per formula
    const std::string rid = "bridge_random/" + qa;
    const uint64_t rseed = derive_seed(config.seed, rid);
    Rng rng(rseed);
    double worst_mean = 0.0, worst_second = 0.0, worst_var = 0.0,
           worst_ouvar = 0.0, worst_table = 0.0;
    for (int i = 0; i < config.random_points; ++i) {
      // q-Wiener harness geometry
      const double sig = 1.0 + 2.0 * rng.next_double();
      const double dl = (0.1 + 0.8 * rng.next_double()) * sig;
      const double gm = 0.2 + 1.5 * rng.next_double();
      const double rho1 = std::sqrt((sig - dl) / sig);
      const double rho2 = std::sqrt(sig / (sig + gm));
      const double yl = 0.75 * r * (2.0 * rng.next_double() - 1.0);
      const double yr = 0.75 * r * (2.0 * rng.next_double() - 1.0);
      const double xl = yl * std::sqrt(sig - dl);
      const double xr = yr * std::sqrt(sig + gm);
      const double m1 = bridge_oracle(0, 1, yl, yr, rho1, rho2, par, nodes);
      const double m2 = bridge_oracle(0, 2, yl, yr, rho1, rho2, par, nodes);
      worst_mean = std::max(
          worst_mean, std::abs(std::sqrt(sig) * m1 -
                               harness_mean(xl, xr, sig, dl, gm)));
      worst_second = std::max(
          worst_second,
          std::abs(sig * m2 - harness_second(xl, xr, sig, dl, gm, q)));
      worst_var = std::max(
          worst_var, std::abs(sig * (m2 - m1 * m1) -
                              harness_var(xl, xr, sig, dl, gm, q)));

      // OU bridge geometry
      const double od = 0.2 + 1.3 * rng.next_double();
      const double og = 0.2 + 1.3 * rng.next_double();
      const double or1 = std::exp(-alpha * od);
      const double or2 = std::exp(-alpha * og);
      const double om1 = bridge_oracle(0, 1, yl, yr, or1, or2, par, nodes);
      const double om2 = bridge_oracle(0, 2, yl, yr, or1, or2, par, nodes);
      worst_ouvar = std::max(
          worst_ouvar, std::abs((om2 - om1 * om1) -
                                ou_bridge_var(yl, yr, od, og, alpha, q)));

      // one random coefficient-table point per draw, cycling n
      const int n = 1 + (i % 4);
      const double tr1 = 0.15 + 0.65 * rng.next_double();
      const double tr2 = 0.15 + 0.65 * rng.next_double();
      worst_table = std::max(
          worst_table,
          std::abs(hermite_bridge_mean(n, yl, yr, tr1, tr2, q) -
                   bridge_oracle(n, 0, yl, yr, tr1, tr2, par, nodes)));
    }
    const long pts = config.random_points;
    out.push_back(make_report("bridge_linear_oracle/" + qa, worst_mean, 0.0,
                              config.quad_tol, TolKind::kAbsolute, pts,
                              rseed));
    out.push_back(make_report("bridge_second_oracle/" + qa, worst_second, 0.0,
                              config.quad_tol, TolKind::kAbsolute, pts,
                              rseed));
    out.push_back(make_report("bridge_var_oracle/" + qa, worst_var, 0.0,
                              config.quad_tol, TolKind::kAbsolute, pts,
                              rseed));
    out.push_back(make_report("ou_bridge_var_oracle/" + qa, worst_ouvar, 0.0,
                              config.quad_tol, TolKind::kAbsolute, pts,
                              rseed));
    out.push_back(make_report("bridge_coeff_random/" + qa, worst_table, 0.0,
                              config.quad_tol, TolKind::kAbsolute, pts,
                              rseed));
  } else {
    // q = 1: the bridge variance is endpoint-independent
    const double v1 = ou_bridge_var(0.3, -0.2, 0.4, 0.7, alpha, 1.0);
    const double v2 = ou_bridge_var(0.0, 0.0, 0.4, 0.7, alpha, 1.0);
    out.push_back(make_report("bridge_var_endpoint_free/" + qa, v1, v2, 1e-15,
                              TolKind::kAbsolute, 2));
  }

  // (c) Monte Carlo with binned conditioning, three-point OU paths
  {
    const std::string id0 = "bridge_mc_binned/" + qa;
    const uint64_t seed = derive_seed(config.seed, id0);
    const double dt = 0.5;
    const double rho = std::exp(-alpha * dt);
    struct Bin {
      Acc n1, n2;
      long count = 0;
    };
    std::map<std::pair<long, long>, Bin> bins;
    Rng rng(seed);
    for (long i = 0; i < config.mc_paths; ++i) {
      double yl = sample_stationary(par, rng);
      double ym, yr;
      if (q < 1.0) {
        auto fam = transition_family(rho, par);
        ym = fam->sample_x(yl, rng.next_open());
        yr = fam->sample_x(ym, rng.next_open());
      } else {
        const double sd = std::sqrt(1.0 - rho * rho);
        ym = rho * yl + sd * rng.next_gaussian();
        yr = rho * ym + sd * rng.next_gaussian();
      }
      const auto key = std::make_pair(
          static_cast<long>(std::floor(yl / config.bin_width)),
          static_cast<long>(std::floor(yr / config.bin_width)));
      Bin& bin = bins[key];
      bin.count++;
      // compare against the closed form at the exact endpoints, so the
      // bin only plays the role of a conditioning event
      bin.n1.add(hermite_seq(1, ym, q)[1] -
                 hermite_bridge_mean(1, yl, yr, rho, rho, q));
      bin.n2.add(hermite_seq(2, ym, q)[2] -
                 hermite_bridge_mean(2, yl, yr, rho, rho, q));
    }
    std::vector<std::pair<long, std::pair<long, long>>> ranked;
    for (const auto& [key, bin] : bins) ranked.push_back({bin.count, key});
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    // standard-error estimates below ~150 samples are too shaky to gate on;
    // keep the most populated bin regardless so the check always reports
    size_t top = 0;
    while (top < ranked.size() && top < 3 &&
           (top == 0 || ranked[top].first >= 150))
      ++top;
    for (size_t i = 0; i < top; ++i) {
      const Bin& bin = bins[ranked[i].second];
      const std::string tag = id0 + "/bin" + std::to_string(i);
      out.push_back(mc_report(tag + "/n=1", bin.n1.done(), 0.0, seed,
                              config.se_multiple));
      out.push_back(mc_report(tag + "/n=2", bin.n2.done(), 0.0, seed,
                              config.se_multiple));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Moments and covariances

std::vector<Report> check_moments_and_covariances(double q, double alpha,
                                                  const McConfig& config) {
  require_q(q);
  std::vector<Report> out;
  const QParam par(q);
  const std::string qa = "q=" + fmt(q) + "/alpha=" + fmt(alpha);
  const long n_draws = config.n_paths;
  const double se_mult = config.se_multiple;

  // E Y^4 = 2 + q and E H_n(Y) = 0 on stationary draws.
  {
    const std::string id = "stationary_fourth_moment/" + qa;
    const uint64_t seed = derive_seed(config.seed, id);
    Rng rng(seed);
    Acc m4;
    std::vector<Acc> hz(5);
    for (long i = 0; i < n_draws; ++i) {
      const double y = sample_stationary(par, rng);
      m4.add(y * y * y * y);
      const PolySeq h = hermite_seq(4, y, q);
      for (int n = 1; n <= 4; ++n) hz[static_cast<size_t>(n)].add(h[n]);
    }
    out.push_back(mc_report(id, m4.done(), 2.0 + q, seed, se_mult));
    for (int n = 1; n <= 4; ++n)
      out.push_back(mc_report("hermite_mean_zero/" + qa + "/n=" +
                                  std::to_string(n),
                              hz[static_cast<size_t>(n)].done(), 0.0, seed,
                              se_mult));
  }

  const double rho_step = std::exp(-alpha * config.dt);

  // E X_n^2 X_m^2 = 1 + rho^{2|n-m|} (1+q) at |n-m| = 2 steps.
  {
    const std::string id = "square_pair_moment/" + qa + "/lag=2";
    const uint64_t seed = derive_seed(config.seed, id);
    Rng rng(seed);
    const double rho_l = std::pow(rho_step, 2);
    Acc acc;
    for (long i = 0; i < n_draws; ++i) {
      const double a = sample_stationary(par, rng);
      const double b = sample_transition_for_check(a, rho_l, par, rng);
      acc.add(a * a * b * b);
    }
    const double target = 1.0 + rho_l * rho_l * (1.0 + q);
    out.push_back(mc_report(id, acc.done(), target, seed, se_mult));
  }

  // E X_n^2 X_{n-j} X_{n+k} = rho^{j+k} (2+q) at j = k = 1.
  {
    const std::string id = "square_cross_moment/" + qa + "/j=1/k=1";
    const uint64_t seed = derive_seed(config.seed, id);
    Rng rng(seed);
    Acc acc;
    for (long i = 0; i < n_draws; ++i) {
      const double a = sample_stationary(par, rng);
      const double b = sample_transition_for_check(a, rho_step, par, rng);
      const double c = sample_transition_for_check(b, rho_step, par, rng);
      acc.add(b * b * a * c);
    }
    const double target = rho_step * rho_step * (2.0 + q);
    out.push_back(mc_report(id, acc.done(), target, seed, se_mult));
  }

  // var(Y_{t+s} | Y_t = y0) = 1 - e^{-2 alpha s}.
  {
    const std::string id = "conditional_variance/" + qa + "/s=" + fmt(config.dt);
    const uint64_t seed = derive_seed(config.seed, id);
    Rng rng(seed);
    const double y0 = q < 1.0 ? 0.35 * 2.0 / std::sqrt(1.0 - q) : 0.5;
    std::vector<double> draws(static_cast<size_t>(n_draws));
    for (long i = 0; i < n_draws; ++i)
      draws[static_cast<size_t>(i)] =
          sample_transition(y0, rho_step, par, rng);
    const MeanSe ms = mean_se(draws);
    Acc dev2;
    for (double v : draws) dev2.add((v - ms.mean) * (v - ms.mean));
    out.push_back(mc_report(id, dev2.done(),
                            1.0 - rho_step * rho_step, seed, se_mult));
  }

  // Increment moments of the q-Wiener process from a fixed state.
  {
    const double sigma = config.sigma, tau = config.tau, x0 = 0.5;
    const IncrementMoments im = increment_moments(sigma, tau, x0, q);
    out.push_back(make_report("increment_m2_formula/" + qa, im.m2,
                              tau - sigma, 0.0, TolKind::kAbsolute, 0));
    const std::string id = "increment_moments/" + qa;
    const uint64_t seed = derive_seed(config.seed, id);
    Rng rng(seed);
    const double rho = std::sqrt(sigma / tau);
    const double ycond = x0 / std::sqrt(sigma);
    Acc a2, a3, a4;
    for (long i = 0; i < n_draws; ++i) {
      const double ynew = sample_transition(ycond, rho, par, rng);
      const double d = std::sqrt(tau) * ynew - x0;
      a2.add(d * d);
      a3.add(d * d * d);
      a4.add(d * d * d * d);
    }
    out.push_back(mc_report(id + "/m2", a2.done(), im.m2, seed, se_mult));
    out.push_back(mc_report(id + "/m3", a3.done(), im.m3, seed, se_mult));
    out.push_back(mc_report(id + "/m4", a4.done(), im.m4, seed, se_mult));
  }

  // Increment covariances over non-overlapping windows
  // (sigma, tau, upsilon, omega) = (1, 2, 2.5, 3.5).
  {
    const std::string id = "increment_covariance/" + qa;
    const uint64_t seed = derive_seed(config.seed, id);
    const double sg = 1.0, tu = 2.0, up = 2.5, om = 3.5;
    const std::vector<double> times = {sg, tu, up, om};
    std::vector<double> a1v, a2v, a3v, b1v, b2v, b3v;
    a1v.reserve(static_cast<size_t>(n_draws));
    Rng rng(seed);
    for (long i = 0; i < n_draws; ++i) {
      const Trajectory t = simulate_qwiener(par, times, rng.next_u64());
      const double d1 = t.values[1] - t.values[0];
      const double d2 = t.values[3] - t.values[2];
      a1v.push_back(d1);
      b1v.push_back(d2);
      a2v.push_back(d1 * d1);
      b2v.push_back(d2 * d2);
      a3v.push_back(d1 * d1 * d1);
      b3v.push_back(d2 * d2 * d2);
    }
    const auto cov_report = [&](const std::string& tag,
                                const std::vector<double>& av,
                                const std::vector<double>& bv,
                                double target) {
      const MeanSe ma = mean_se(av), mb = mean_se(bv);
      Acc prod;
      for (size_t i = 0; i < av.size(); ++i)
        prod.add((av[i] - ma.mean) * (bv[i] - mb.mean));
      out.push_back(mc_report(id + "/" + tag, prod.done(), target, seed,
                              se_mult));
    };
    cov_report("levels", a1v, b1v, 0.0);
    cov_report("squares", a2v, b2v, 0.0);
    const double cubic_target = -(1.0 - q) * (tu - sg) * (om - up) *
                                (tu * (2.0 + q) - sg * (1.0 + 2.0 * q));
    cov_report("cubes", a3v, b3v, cubic_target);
  }

  // Covariance structure: OU lag correlation and q-Wiener min covariance.
  {
    const long n_cov = std::max<long>(n_draws / 10, 10'000);
    {
      const std::string id = "ou_lag_correlation/" + qa;
      const uint64_t seed = derive_seed(config.seed, id);
      Rng rng(seed);
      Acc acc;
      for (long i = 0; i < n_cov; ++i) {
        const double a = sample_stationary(par, rng);
        const double b = sample_transition_for_check(a, rho_step, par, rng);
        acc.add(a * b);
      }
      out.push_back(
          mc_report(id, acc.done(), rho_step, seed, se_mult));
    }
    {
      const std::string id = "qwiener_min_covariance/" + qa;
      const uint64_t seed = derive_seed(config.seed, id);
      Rng rng(seed);
      const double sigma = config.sigma, tau = config.tau;
      const std::vector<double> times = {sigma, tau};
      Acc acc, m4;
      for (long i = 0; i < n_cov; ++i) {
        const Trajectory t = simulate_qwiener(par, times, rng.next_u64());
        acc.add(t.values[0] * t.values[1]);
        const double z = t.values[1] / std::sqrt(tau);
        m4.add(z * z * z * z);
      }
      out.push_back(mc_report(id, acc.done(), std::min(sigma, tau), seed,
                              se_mult));
      out.push_back(mc_report("qwiener_marginal_fourth/" + qa, m4.done(),
                              2.0 + q, seed, se_mult));
    }
  }

  // Self-similarity: c^{-1} X_{c^2 tau} has the X_tau law (c = 2).
  {
    const std::string id = "self_similarity/" + qa;
    const uint64_t seed = derive_seed(config.seed, id);
    const double c = 2.0;
    const std::vector<double> base_times = {0.75, 1.5};
    std::vector<double> scaled_times = base_times;
    for (double& t : scaled_times) t *= c * c;
    const long n_cov = std::max<long>(n_draws / 10, 10'000);
    Rng rng_a(derive_seed(seed, "a")), rng_b(derive_seed(seed, "b"));
    std::vector<Acc> ma(5), mb(5);
    for (long i = 0; i < n_cov; ++i) {
      const Trajectory ta = simulate_qwiener(par, base_times, rng_a.next_u64());
      const Trajectory tb =
          simulate_qwiener(par, scaled_times, rng_b.next_u64());
      double pa = 1.0, pb = 1.0;
      for (int k = 1; k <= 4; ++k) {
        pa *= ta.values[1];
        pb *= tb.values[1] / c;
        ma[static_cast<size_t>(k)].add(pa);
        mb[static_cast<size_t>(k)].add(pb);
      }
    }
    for (int k = 1; k <= 4; ++k) {
      const MeanSe sa = ma[static_cast<size_t>(k)].done();
      const MeanSe sb = mb[static_cast<size_t>(k)].done();
      const double se = std::sqrt(sa.se * sa.se + sb.se * sb.se);
      out.push_back(make_report(id + "/order=" + std::to_string(k),
                                sa.mean - sb.mean, 0.0, se_mult * se,
                                TolKind::kStdErrMultiple, sa.n, seed));
    }
    // coupled run: same stream, scaled times; the scaling is exact
    const Trajectory ta = simulate_qwiener(par, base_times, 977);
    const Trajectory tb = simulate_qwiener(par, scaled_times, 977);
    double worst = 0.0;
    for (size_t i = 0; i < ta.values.size(); ++i)
      worst = std::max(worst, std::abs(tb.values[i] / c - ta.values[i]));
    out.push_back(make_report("self_similarity_coupled/" + qa, worst, 0.0,
                              1e-12, TolKind::kAbsolute,
                              static_cast<long>(ta.values.size())));
  }

  // Time-change invariance: the q-Wiener law does not depend on the
  // internal OU rate.
  {
    const std::vector<double> times = {0.5, 1.0, 2.0};
    const Trajectory ta = simulate_qwiener(par, times, 1303, 0.5);
    const Trajectory tb = simulate_qwiener(par, times, 1303, 0.25);
    double worst = 0.0;
    for (size_t i = 0; i < ta.values.size(); ++i)
      worst = std::max(worst, std::abs(ta.values[i] - tb.values[i]));
    out.push_back(make_report("time_change_invariance/" + qa, worst, 0.0,
                              1e-12, TolKind::kAbsolute,
                              static_cast<long>(ta.values.size())));
  }

  // Marginal stationarity along a simulated grid (KS at the 1% level).
  if (q < 1.0) {
    const std::string id = "stationarity_ks/" + qa;
    const uint64_t seed = derive_seed(config.seed, id);
    const long n_paths = std::max<long>(n_draws / 10, 10'000);
    const std::vector<double> times = {0.0, 0.5, 1.0, 1.5};
    std::vector<std::vector<double>> values(times.size());
    for (auto& v : values) v.reserve(static_cast<size_t>(n_paths));
    Rng rng(seed);
    const OUParams params(par, alpha);
    for (long i = 0; i < n_paths; ++i) {
      const Trajectory t = simulate_ou(params, times, rng.next_u64());
      for (size_t k = 0; k < times.size(); ++k) values[k].push_back(t.values[k]);
    }
    const double crit = 1.6276 / std::sqrt(static_cast<double>(n_paths));
    for (size_t k = 0; k < times.size(); ++k) {
      const double d = ks_statistic(
          values[k], [&](double x) { return cdf_stationary(x, par); });
      out.push_back(make_report(id + "/index=" + std::to_string(k), d, 0.0,
                                crit, TolKind::kAbsolute, n_paths, seed));
    }
  }

  // Spectral density: value at omega = 0 and the Fourier-pair
  // normalization integral S_n(omega) d omega / (2 pi) = [n]_q!.
  for (int n = 1; n <= 4; ++n) {
    const std::string id =
        "spectral_density/" + qa + "/n=" + std::to_string(n);
    const double at0 = spectral_density(n, 0.0, alpha, q);
    out.push_back(make_report(id + "/omega0", at0,
                              q_factorial(n, q) * 2.0 / (n * alpha), 1e-14,
                              TolKind::kRelative, 0));
    const double w_max = 400.0 * n * alpha;
    const int steps = 40'000;
    const double h = 2.0 * w_max / steps;
    double integral = 0.0;  // Simpson
    for (int i = 0; i <= steps; ++i) {
      const double w = -w_max + h * i;
      const double f = spectral_density(n, w, alpha, q);
      const double coeff = (i == 0 || i == steps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      integral += coeff * f;
    }
    integral *= h / 3.0 / (2.0 * kPi);
    const double tail =
        q_factorial(n, q) *
        (1.0 - 2.0 / kPi * std::atan(w_max / (n * alpha)));
    out.push_back(make_report(id + "/normalization", integral + tail,
                              q_factorial(n, q), 1e-6, TolKind::kRelative,
                              steps));
  }

  return out;
}

// ---------------------------------------------------------------------------
// Pure identities, guards, classical limits (no sampling, cheap)

namespace {

Report bool_report(const std::string& id, bool ok) {
  return make_report(id, ok ? 1.0 : 0.0, 1.0, 0.0, TolKind::kAbsolute, 0);
}

void qseries_reports(std::vector<Report>& out) {
  for (double q : {-0.9, -0.3, 0.0, 0.4, 0.8, 1.0}) {
    const std::string qs = "q=" + fmt(q);
    double worst = 0.0;
    for (int n = 0; n <= 8; ++n) {
      const double lhs = pochhammer(q, q, n);
      const double rhs = std::pow(1.0 - q, n) * q_factorial(n, q);
      worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
    }
    out.push_back(make_report("qseries_pochhammer_factorial/" + qs, worst,
                              0.0, 1e-13, TolKind::kAbsolute, 9));
    if (q < 1.0 && q != 0.0) {
      double worst_b = 0.0;
      for (int n = 1; n <= 8; ++n) {
        for (int k = 0; k <= n; ++k) {
          const double lhs = q_binomial(n, k, q);
          const double rhs = pochhammer(q, q, n) /
                             (pochhammer(q, q, k) * pochhammer(q, q, n - k));
          worst_b = std::max(worst_b, std::abs(lhs - rhs));
        }
      }
      out.push_back(make_report("qseries_binomial_pochhammer/" + qs, worst_b,
                                0.0, 1e-12, TolKind::kAbsolute, 44));
    }
    out.push_back(make_report("qseries_w_sum_row/" + qs, w_sum(5, q),
                              q == 1.0 ? 32.0
                                       : [&] {
                                           double s = 0.0;
                                           for (int i = 0; i <= 5; ++i)
                                             s += q_binomial(5, i, q);
                                           return s;
                                         }(),
                              1e-14, TolKind::kRelative, 6));
  }
  // truncated infinite product against a long direct product
  for (double q : {-0.8, 0.5, 0.9}) {
    const QParam policy(q, 1e-14);
    const double a = 0.7;
    double brute = 1.0, p = 1.0;
    for (int i = 0; i < 3000; ++i) {
      brute *= (1.0 - a * p);
      p *= q;
    }
    out.push_back(make_report("qseries_pochhammer_inf/q=" + fmt(q) +
                                  "/a=" + fmt(a),
                              pochhammer_inf(a, policy), brute, 1e-12,
                              TolKind::kRelative, 3000));
  }
}

void orthopoly_reports(std::vector<Report>& out) {
  for (double q : {-0.9, -0.5, 0.0, 0.5, 0.9, 1.0}) {
    const std::string qs = "q=" + fmt(q);
    // explicit low degrees at a few x
    double worst3 = 0.0, worst4 = 0.0, worst_res = 0.0;
    for (double x : {-1.3, -0.2, 0.0, 0.7, 1.6}) {
      const PolySeq h = hermite_seq(12, x, q);
      worst3 = std::max(worst3,
                        std::abs(h[3] - (x * x * x - (2.0 + q) * x)));
      const double h4 = x * x * x * x - (3.0 + 2.0 * q + q * q) * x * x +
                        (1.0 + q + q * q);
      worst4 = std::max(worst4, std::abs(h[4] - h4));
      for (int k = 1; k < 12; ++k) {
        const double res =
            x * h[k] - h[k + 1] - q_number(k, q) * h[k - 1];
        worst_res = std::max(
            worst_res, std::abs(res) / std::max(1.0, std::abs(h[k + 1])));
      }
    }
    out.push_back(make_report("hermite_explicit_low_degree/" + qs,
                              std::max(worst3, worst4), 0.0, 1e-12,
                              TolKind::kAbsolute, 5));
    out.push_back(make_report("hermite_recurrence_residual/" + qs, worst_res,
                              0.0, 1e-12, TolKind::kAbsolute, 5));
    // asc collapse at rho = 0
    double worst_c = 0.0;
    for (double x : {-0.8, 0.3, 1.1}) {
      const PolySeq p = asc_seq(8, x, 0.4, 0.0, q);
      const PolySeq h = hermite_seq(8, x, q);
      for (int k = 0; k <= 8; ++k)
        worst_c = std::max(worst_c, std::abs(p[k] - h[k]));
    }
    out.push_back(make_report("asc_collapse_rho0/" + qs, worst_c, 0.0, 1e-15,
                              TolKind::kAbsolute, 3));
    if (q < 1.0) {
      // uniform bound on a 10001-point support grid, n <= 12
      const double r = 2.0 / std::sqrt(1.0 - q);
      double worst_excess = 0.0;
      std::vector<double> bounds(13);
      for (int n = 0; n <= 12; ++n) bounds[static_cast<size_t>(n)] = hermite_bound(n, q);
      for (int i = 0; i <= 10'000; ++i) {
        const double x = -r + 2.0 * r * i / 10'000;
        const PolySeq h = hermite_seq(12, x, q);
        for (int n = 0; n <= 12; ++n)
          worst_excess = std::max(
              worst_excess, (std::abs(h[n]) - bounds[static_cast<size_t>(n)]) /
                                bounds[static_cast<size_t>(n)]);
      }
      out.push_back(make_report("hermite_bound_grid/" + qs,
                                std::max(0.0, worst_excess), 0.0, 1e-12,
                                TolKind::kAbsolute, 10'001));
      // generating functions against 60-term series
      const QParam par(q);
      const double x = 0.8 / std::sqrt(std::max(1.0 - q, 0.1));
      const double t = 0.4 / std::sqrt(1.0 - q);
      const PolySeq h = hermite_seq(60, x, q);
      double series = 0.0, tn = 1.0;
      for (int i = 0; i <= 60; ++i) {
        series += tn * h[i] / q_factorial(i, q);
        tn *= t;
      }
      out.push_back(make_report("phi_series/" + qs + "/x=" + fmt(x) +
                                    "/t=" + fmt(t),
                                phi(x, t, par), series, 1e-10,
                                TolKind::kAbsolute, 61));
      const double y = -0.5 * x, rho = 0.4;
      const PolySeq pseq = asc_seq(60, x, y, rho, q);
      double pseries = 0.0;
      tn = 1.0;
      for (int i = 0; i <= 60; ++i) {
        pseries += tn * pseq[i] / q_factorial(i, q);
        tn *= t;
      }
      out.push_back(make_report("tau_series/" + qs, tau(x, t, y, rho, par),
                                pseries, 1e-10, TolKind::kAbsolute, 61));
      // positivity over an (x, t) grid
      double min_phi = std::numeric_limits<double>::infinity();
      for (double xf : {-0.99, -0.5, 0.0, 0.5, 0.99}) {
        for (double tf : {-0.9, -0.3, 0.3, 0.9}) {
          min_phi = std::min(min_phi, phi(xf * 2.0 / std::sqrt(1.0 - q),
                                          tf / std::sqrt(1.0 - q), par));
        }
      }
      out.push_back(bool_report("phi_positive/" + qs, min_phi > 0.0));
    }
  }
}

void density_reports(std::vector<Report>& out, double q) {
  const std::string qs = "q=" + fmt(q);
  if (q == 1.0) {
    // classical limits at q = 1 (criterion: exact Gaussian branches)
    out.push_back(make_report(
        "gaussian_limit/pdf0", pdf_stationary(0.0, 1.0),
        0.3989422804014327, 1e-12, TolKind::kRelative, 0));
    out.push_back(make_report(
        "gaussian_limit/transition", pdf_transition(0.0, 0.0, 0.5, 1.0),
        1.0 / std::sqrt(2.0 * kPi * 0.75), 1e-12, TolKind::kRelative, 0));
    // transition mean rho y and variance 1 - rho^2 by quadrature
    const double rho = 0.6, y = 0.8;
    const double mean = integrate_gauss_hermite(
        [&](double u) { return rho * y + std::sqrt(1.0 - rho * rho) * u; },
        61);
    const double second = integrate_gauss_hermite(
        [&](double u) {
          const double x = rho * y + std::sqrt(1.0 - rho * rho) * u;
          return x * x;
        },
        61);
    out.push_back(make_report("gaussian_limit/transition_mean", mean,
                              rho * y, 1e-12, TolKind::kAbsolute, 61));
    out.push_back(make_report("gaussian_limit/transition_var",
                              second - mean * mean,
                              1.0 - rho * rho, 1e-12, TolKind::kAbsolute,
                              61));
    out.push_back(make_report("gaussian_limit/bridge_var",
                              harness_var(0.7, -0.4, 2.0, 0.5, 1.0, 1.0),
                              0.5 * 1.0 / 1.5, 1e-12, TolKind::kRelative, 0));
    const IncrementMoments im = increment_moments(1.0, 2.5, 0.9, 1.0);
    out.push_back(make_report("gaussian_limit/increment_m4", im.m4,
                              3.0 * 1.5 * 1.5, 1e-12, TolKind::kRelative, 0));
    out.push_back(make_report("gaussian_limit/increment_m3", im.m3, 0.0, 0.0,
                              TolKind::kAbsolute, 0));
    return;
  }
  const QParam par(q);
  const double r = 2.0 / std::sqrt(1.0 - q);
  QuadratureSpec spec;

  out.push_back(make_report(
      "support_geometry/" + qs, support(q).hi, r, 1e-15, TolKind::kRelative, 0));

  // normalization of f_N and of f_CN over (rho, y) grids
  const double normN = integrate_support(
      [&](double x) { return pdf_stationary(x, par); }, q, spec);
  out.push_back(make_report("density_normalization/" + qs, normN, 1.0, 1e-9,
                            TolKind::kAbsolute, spec.nodes));
  for (double rho : {0.0, 0.3, 0.8}) {
    double worst = 0.0;
    for (double yf : {-0.8, -0.35, 0.0, 0.4, 0.75}) {
      const double y = yf * r;
      const double v = integrate_support(
          [&](double x) { return pdf_transition(x, y, rho, par); }, q, spec);
      worst = std::max(worst, std::abs(v - 1.0));
    }
    out.push_back(make_report("transition_normalization/" + qs +
                                  "/rho=" + fmt(rho),
                              worst, 0.0, 1e-9, TolKind::kAbsolute,
                              spec.nodes));
  }

  // symmetry f_N(x) = f_N(-x), f_CN(x|y) = f_CN(-x|-y)
  double worst_sym = 0.0;
  for (double xf : {0.15, 0.55, 0.93}) {
    worst_sym = std::max(worst_sym,
                         std::abs(pdf_stationary(xf * r, par) -
                                  pdf_stationary(-xf * r, par)));
    worst_sym = std::max(
        worst_sym, std::abs(pdf_transition(xf * r, 0.3 * r, 0.6, par) -
                            pdf_transition(-xf * r, -0.3 * r, 0.6, par)));
  }
  out.push_back(make_report("density_symmetry/" + qs, worst_sym, 0.0, 1e-12,
                            TolKind::kAbsolute, 6));

  // Mehler partial sums against the product form on the stated region.
  // One row per rho: the 80-term truncation floor sits above 1e-8 at
  // |rho| = 0.8 (tail ~ rho^81/(1-rho)), so those rows report honest
  // failures while |rho| <= 0.6 passes with margin.
  const double b = std::sqrt(2.0 / (1.0 - q));
  for (double rho : {-0.8, 0.3, 0.6, 0.8}) {
    double worst_mehler = 0.0;
    for (double xf : {0.0, 0.5, 0.95}) {
      for (double yf : {-0.95, 0.25, 0.6}) {
        const double x = xf * b, y = yf * b;
        const double lhs = pdf_transition_mehler(x, y, rho, q, 80);
        const double rhs = pdf_transition(x, y, rho, par);
        worst_mehler = std::max(worst_mehler, std::abs(lhs - rhs));
      }
    }
    out.push_back(make_report("mehler_consistency/" + qs + "/rho=" + fmt(rho),
                              worst_mehler, 0.0, 1e-8, TolKind::kAbsolute,
                              80));
  }

  // phi / tau integrate to 1 against their weights
  const double tphi = 0.45 / std::sqrt(1.0 - q);
  const double nphi = integrate_support(
      [&](double x) { return phi(x, tphi, par) * pdf_stationary(x, par); },
      q, spec);
  out.push_back(make_report("phi_normalization/" + qs, nphi, 1.0, 1e-9,
                            TolKind::kAbsolute, spec.nodes));
  const double ytau = 0.3 * r, rtau = 0.5;
  const double ntau = integrate_support(
      [&](double x) {
        return tau(x, tphi, ytau, rtau, par) *
               pdf_transition(x, ytau, rtau, par);
      },
      q, spec);
  out.push_back(make_report("tau_normalization/" + qs, ntau, 1.0, 1e-8,
                            TolKind::kAbsolute, spec.nodes));

  // CDF machinery: round trip on probability-interior points. Where
  // min(p, 1-p) drops below ~1e-7 the double representation of p cannot
  // carry the tail (dx >= ulp(1)/f), so such grid points are skipped.
  double worst_rt = 0.0;
  long rt_points = 0;
  for (double xf : {-0.9, -0.4, 0.0, 0.3, 0.85}) {
    const double x = xf * r;
    const double p = cdf_stationary(x, par);
    if (std::min(p, 1.0 - p) < 1e-7) continue;
    ++rt_points;
    worst_rt =
        std::max(worst_rt, std::abs(quantile_stationary(p, par) - x));
  }
  out.push_back(make_report("cdf_quantile_roundtrip/" + qs, worst_rt, 0.0,
                            1e-9, TolKind::kAbsolute, rt_points));
  out.push_back(make_report("cdf_median/" + qs,
                            quantile_stationary(0.5, par), 0.0, 1e-10,
                            TolKind::kAbsolute, 0));

  if (q == 0.0) {
    // semicircle closed forms (free case)
    double worst_pdf = 0.0, worst_cdf = 0.0;
    for (double x : {-1.8, -0.9, 0.0, 0.7, 1.5}) {
      worst_pdf = std::max(worst_pdf,
                           std::abs(pdf_stationary(x, par) -
                                    std::sqrt(4.0 - x * x) / (2.0 * kPi)));
      const double closed =
          0.5 + (x * std::sqrt(4.0 - x * x) + 4.0 * std::asin(0.5 * x)) /
                    (4.0 * kPi);
      worst_cdf = std::max(worst_cdf, std::abs(cdf_stationary(x, par) - closed));
    }
    out.push_back(make_report("semicircle_pdf/" + qs, worst_pdf, 0.0, 1e-12,
                              TolKind::kAbsolute, 5));
    out.push_back(make_report("semicircle_cdf/" + qs, worst_cdf, 0.0, 1e-10,
                              TolKind::kAbsolute, 5));
  }
}

void formula_reports(std::vector<Report>& out, double q, double alpha,
                     uint64_t seed) {
  const std::string qa = "q=" + fmt(q) + "/alpha=" + fmt(alpha);
  Rng rng(derive_seed(seed, "formula_reports/" + qa));

  // harness variance is definitionally second moment minus squared mean
  double worst_def = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double sig = 1.0 + 2.0 * rng.next_double();
    const double dl = (0.1 + 0.8 * rng.next_double()) * sig;
    const double gm = 0.2 + 1.5 * rng.next_double();
    const double xl = 2.0 * rng.next_double() - 1.0;
    const double xr = 2.0 * rng.next_double() - 1.0;
    const double m = harness_mean(xl, xr, sig, dl, gm);
    const double s = harness_second(xl, xr, sig, dl, gm, q);
    const double v = harness_var(xl, xr, sig, dl, gm, q);
    worst_def = std::max(worst_def, std::abs(v - (s - m * m)));
  }
  out.push_back(make_report("harness_var_definitional/" + qa, worst_def, 0.0,
                            1e-12, TolKind::kAbsolute, 20));

  // n = 1 bridge coefficients against the closed linear blend
  {
    const double r1 = 0.55, r2 = 0.35;
    const BridgeCoeffs c = bridge_coeffs(1, r1, r2, q);
    const double d = 1.0 - r1 * r1 * r2 * r2;
    const double worst = std::max(
        std::abs(c.at(0, 0) - r1 * (1.0 - r2 * r2) / d),
        std::abs(c.at(0, 1) - r2 * (1.0 - r1 * r1) / d));
    out.push_back(make_report("bridge_linear_closed_form/" + qa, worst, 0.0,
                              1e-14, TolKind::kAbsolute, 2));
  }

  // OU bridge variance equals the n <= 2 coefficient extraction
  double worst_var = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double dl = 0.2 + 1.3 * rng.next_double();
    const double gm = 0.2 + 1.3 * rng.next_double();
    const double yl = 1.2 * (2.0 * rng.next_double() - 1.0);
    const double yr = 1.2 * (2.0 * rng.next_double() - 1.0);
    const double r1 = std::exp(-alpha * dl), r2 = std::exp(-alpha * gm);
    const double m1 = hermite_bridge_mean(1, yl, yr, r1, r2, q);
    const double m2 = hermite_bridge_mean(2, yl, yr, r1, r2, q) + 1.0;
    worst_var = std::max(worst_var,
                         std::abs((m2 - m1 * m1) -
                                  ou_bridge_var(yl, yr, dl, gm, alpha, q)));
  }
  out.push_back(make_report("bridge_var_coefficient_identity/" + qa,
                            worst_var, 0.0, 1e-12, TolKind::kAbsolute, 20));

  // one-sided limit: rho2 -> 0 reduces to the one-sided prediction
  {
    double worst = 0.0;
    for (int n = 1; n <= 4; ++n) {
      const BridgeCoeffs c = bridge_coeffs(n, 0.6, 1e-8, q);
      for (const auto& e : c.entries) {
        const double expect =
            (e.r == 0 && e.right_degree == 0) ? std::pow(0.6, n) : 0.0;
        worst = std::max(worst, std::abs(e.value - expect));
      }
    }
    out.push_back(make_report("bridge_one_sided_limit/" + qa, worst, 0.0,
                              1e-6, TolKind::kAbsolute, 4));
  }

  // discrete-sequence parameter maps
  {
    const double rho = 0.55;
    const TspParams p = tsp_params(rho, q);
    const TspParamsJk pjk = tsp_params_jk(1, 1, rho, q);
    const double worst_cons = std::max(
        {std::abs(pjk.a1 - p.a), std::abs(pjk.a2 - p.a),
         std::abs(pjk.b - p.b), std::abs(pjk.c - p.c)});
    out.push_back(make_report("tsp_consistency_jk11/" + qa, worst_cons, 0.0,
                              1e-14, TolKind::kAbsolute, 4));
    double worst_sum = 0.0;
    for (int i = 0; i < 20; ++i) {
      const int j = 1 + static_cast<int>(rng.next_u64() % 3);
      const int k = 1 + static_cast<int>(rng.next_u64() % 3);
      const double rr = 0.05 + 0.9 * rng.next_double();
      const TspParamsJk t = tsp_params_jk(j, k, rr, q);
      worst_sum = std::max(worst_sum,
                           std::abs(t.a1 + t.a2 + std::pow(rr, j + k) * t.b +
                                    t.c - 1.0));
    }
    out.push_back(make_report("tsp_sum_identity/" + qa, worst_sum, 0.0, 1e-12,
                              TolKind::kAbsolute, 20));
    const TspParams p0 = tsp_params(1e-9, q);
    out.push_back(make_report("tsp_decorrelated_limit/" + qa,
                              std::abs(p0.a) + std::abs(p0.b) +
                                  std::abs(p0.c - 1.0),
                              0.0, 1e-8, TolKind::kAbsolute, 1));
  }
}

void guard_reports(std::vector<Report>& out) {
  {
    bool ok = false;
    try {
      QParam bad(1.5);
    } catch (const std::domain_error& e) {
      ok = std::string(e.what()).find("does not exist") != std::string::npos;
    }
    out.push_back(bool_report("guard_q_above_one", ok));
  }
  {
    bool ok = false;
    try {
      QParam bad(-1.0);
    } catch (const std::domain_error&) {
      ok = true;
    }
    out.push_back(bool_report("guard_q_at_minus_one", ok));
  }
  {
    bool ok = false;
    try {
      phi(0.5, 2.0, 0.5);  // (1-q) t^2 = 2 >= 1
    } catch (const std::domain_error&) {
      ok = true;
    }
    out.push_back(bool_report("guard_phi_domain", ok));
  }
  {
    bool ok = false;
    try {
      pochhammer_inf(0.5, QParam(1.0));
    } catch (const std::domain_error&) {
      ok = true;
    }
    out.push_back(bool_report("guard_pochhammer_inf_q1", ok));
  }
  {
    bool ok = false;
    try {
      pdf_transition(0.0, 5.0, 0.5, 0.5);  // y outside S(0.5)
    } catch (const std::domain_error&) {
      ok = true;
    }
    out.push_back(bool_report("guard_transition_y_range", ok));
  }
  {
    bool ok = false;
    try {
      bridge_coeffs(5, 0.5, 0.5, 0.3);
    } catch (const std::domain_error&) {
      ok = true;
    }
    out.push_back(bool_report("guard_bridge_degree", ok));
  }
  {
    bool ok = false;
    try {
      simulate_ou(OUParams(QParam(0.5), 1.0), {1.0, 0.5}, 7);
    } catch (const std::invalid_argument&) {
      ok = true;
    }
    out.push_back(bool_report("guard_times_monotone", ok));
  }
}

void determinism_reports(std::vector<Report>& out, uint64_t seed) {
  // identical (config, seed) must yield bit-identical statistics
  McConfig cfg;
  cfg.n_paths = 20'000;
  cfg.seed = seed;
  const auto run = [&] { return check_martingales(0.5, 1.0, cfg); };
  const auto a = run();
  const auto b = run();
  bool same = a.size() == b.size();
  if (same) {
    for (size_t i = 0; i < a.size(); ++i) {
      if (std::memcmp(&a[i].statistic, &b[i].statistic, sizeof(double)) != 0 ||
          a[i].check_id != b[i].check_id) {
        same = false;
        break;
      }
    }
  }
  out.push_back(bool_report("determinism_reports_bitwise", same));

  // simulation is reproducible from (seed, times, params)
  const OUParams params(QParam(0.3), 1.0);
  const std::vector<double> times = {0.0, 0.5, 1.0, 1.5};
  const auto t1 = simulate_ou_paths(params, times, 11, 8, 1);
  const auto t2 = simulate_ou_paths(params, times, 11, 8, 4);
  bool same_paths = true;
  for (int p = 0; p < 8 && same_paths; ++p)
    for (size_t i = 0; i < times.size(); ++i)
      if (t1[static_cast<size_t>(p)].values[i] !=
          t2[static_cast<size_t>(p)].values[i]) {
        same_paths = false;
        break;
      }
  out.push_back(bool_report("determinism_simulate_threads", same_paths));
}

}  // namespace

// ---------------------------------------------------------------------------
// Suite

std::vector<Report> run_default_suite(const SuiteConfig& config) {
  const std::vector<double> q_grid = {-0.9, -0.5, 0.0, 0.5, 0.9, 1.0};
  McConfig mc;
  mc.seed = config.seed;
  mc.n_paths = config.quick ? 50'000 : 1'000'000;
  BridgeConfig bc;
  bc.seed = config.seed;
  bc.mc_paths = 300'000;  // binned conditioning needs populated bins
  bc.random_points = config.quick ? 6 : 20;
  McConfig mc_cov = mc;

  using Thunk = std::function<std::vector<Report>()>;
  std::vector<Thunk> thunks;
  thunks.push_back([&] {
    std::vector<Report> r;
    qseries_reports(r);
    orthopoly_reports(r);
    guard_reports(r);
    determinism_reports(r, config.seed);
    return r;
  });
  for (double q : q_grid) {
    thunks.push_back([&, q] {
      std::vector<Report> r;
      density_reports(r, q);
      formula_reports(r, q, 1.0, config.seed);
      formula_reports(r, q, 0.5, config.seed);
      return r;
    });
    thunks.push_back([&, q] {
      return check_orthogonality(q, config.quick ? 5 : 8);
    });
    thunks.push_back([&, q] {
      std::vector<Report> r;
      const double rr = q < 1.0 ? 2.0 / std::sqrt(1.0 - q) : 2.0;
      std::vector<std::pair<double, double>> pts;
      for (double xf : {-0.6, 0.0, 0.6})
        for (double zf : {-0.6, 0.0, 0.6})
          pts.emplace_back(xf * rr * 0.9, zf * rr * 0.9);
      auto a = check_chapman_kolmogorov(q, 0.7, 0.5, pts);
      auto b = check_chapman_kolmogorov(q, 0.3, 0.8, pts);
      r.insert(r.end(), a.begin(), a.end());
      r.insert(r.end(), b.begin(), b.end());
      return r;
    });
    thunks.push_back([&, q] { return check_martingales(q, 1.0, mc); });
    thunks.push_back([&, q] { return check_bridges(q, 1.0, bc); });
    thunks.push_back([&, q] { return check_bridges(q, 0.5, bc); });
    thunks.push_back(
        [&, q] { return check_moments_and_covariances(q, 1.0, mc_cov); });
  }

  std::vector<std::vector<Report>> results(thunks.size());
  parallel_for(static_cast<int>(thunks.size()),
               resolve_thread_count(config.threads),
               [&](int i) { results[static_cast<size_t>(i)] = thunks[static_cast<size_t>(i)](); });

  std::vector<Report> all;
  for (auto& group : results)
    all.insert(all.end(), group.begin(), group.end());
  std::sort(all.begin(), all.end(), [](const Report& a, const Report& b) {
    return a.check_id < b.check_id;
  });
  return all;
}

// ---------------------------------------------------------------------------
// Output

namespace {

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == '"' || c == '\\') {
      out.push_back('\\');
      out.push_back(c);
    } else if (static_cast<unsigned char>(c) < 0x20) {
      char buf[8];
      std::snprintf(buf, sizeof buf, "\\u%04x", c);
      out += buf;
    } else {
      out.push_back(c);
    }
  }
  return out;
}

std::string json_num(double v) {
  if (!std::isfinite(v)) return "null";  // JSON has no inf/nan
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* kind_name(TolKind k) {
  switch (k) {
    case TolKind::kAbsolute:
      return "absolute";
    case TolKind::kRelative:
      return "relative";
    case TolKind::kStdErrMultiple:
      return "standard-error-multiple";
  }
  return "absolute";
}

}  // namespace

std::string reports_to_json(const std::vector<Report>& reports) {
  std::string out = "[\n";
  for (size_t i = 0; i < reports.size(); ++i) {
    const Report& r = reports[i];
    out += "  {\"check_id\":\"" + json_escape(r.check_id) + "\"";
    out += ",\"statistic\":" + json_num(r.statistic);
    out += ",\"target\":" + json_num(r.target);
    out += ",\"tolerance\":" + json_num(r.tolerance);
    out += std::string(",\"tolerance_kind\":\"") + kind_name(r.tolerance_kind) +
           "\"";
    out += ",\"samples_or_nodes\":" + std::to_string(r.samples_or_nodes);
    out += std::string(",\"passed\":") + (r.passed ? "true" : "false");
    if (r.seed) out += ",\"seed\":" + std::to_string(*r.seed);
    out += i + 1 < reports.size() ? "},\n" : "}\n";
  }
  out += "]\n";
  return out;
}

std::map<std::string, int> coverage_map(const std::vector<Report>& reports) {
  std::map<std::string, int> cov;
  for (const Report& r : reports) {
    const size_t slash = r.check_id.find('/');
    cov[r.check_id.substr(0, slash)]++;
  }
  return cov;
}

std::string summary_table(const std::vector<Report>& reports) {
  long passed = 0;
  long stochastic = 0;
  std::vector<const Report*> failures;
  for (const Report& r : reports) {
    if (r.passed)
      ++passed;
    else
      failures.push_back(&r);
    if (r.seed) ++stochastic;
  }
  std::ostringstream os;
  os << "verification suite: " << reports.size() << " checks, " << passed
     << " passed, " << failures.size() << " failed\n";
  if (!failures.empty()) {
    os << "\nfailures:\n";
    for (const Report* r : failures) {
      os << "  FAIL " << r->check_id << "  statistic=" << json_num(r->statistic)
         << " target=" << json_num(r->target)
         << " tolerance=" << json_num(r->tolerance) << " ("
         << kind_name(r->tolerance_kind) << ")\n";
    }
  }
  os << "\ncoverage (check family -> count):\n";
  for (const auto& [family, count] : coverage_map(reports)) {
    long fam_pass = 0, fam_total = 0;
    for (const Report& r : reports) {
      if (r.check_id.compare(0, family.size(), family) == 0 &&
          (r.check_id.size() == family.size() ||
           r.check_id[family.size()] == '/')) {
        ++fam_total;
        if (r.passed) ++fam_pass;
      }
    }
    os << "  " << family << "  " << fam_pass << "/" << fam_total << "\n";
    (void)count;
  }
  os << "\nnote: stochastic gates are 4 standard errors (two-sided "
        "false-failure\nrate ~6.3e-5 per check; Bonferroni across "
     << stochastic << " stochastic checks\ngives a suite-level false-failure "
        "bound of about "
     << json_num(6.3e-5 * static_cast<double>(stochastic)) << ").\n";
  return os.str();
}

}  // namespace qproc
