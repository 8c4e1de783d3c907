#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qproc/density.hpp"
#include "qproc/qseries.hpp"

// Executable verification harness: every identity the library implements
// becomes a pass/fail Report, checked either by quadrature (deterministic
// tolerances) or by seeded Monte Carlo with standard-error gates.
//
// Check ids are hierarchical, "family/param=value/...", and the family
// prefix doubles as the coverage key: the default suite covers every
// implemented formula family at least once (see coverage_map).

namespace qproc {

enum class TolKind { kAbsolute, kRelative, kStdErrMultiple };

struct Report {
  std::string check_id;
  double statistic = 0.0;
  double target = 0.0;
  // For kAbsolute: pass iff |statistic - target| <= tolerance.
  // For kRelative: pass iff |statistic - target| <= tolerance * |target|.
  // For kStdErrMultiple the gate multiple (4) times the estimated standard
  // error is resolved into tolerance at check time, so the absolute
  // comparison applies and the Report stays self-contained.
  double tolerance = 0.0;
  TolKind tolerance_kind = TolKind::kAbsolute;
  long samples_or_nodes = 0;
  bool passed = false;
  std::optional<uint64_t> seed;  // present iff the check is stochastic
};

Report make_report(std::string check_id, double statistic, double target,
                   double tolerance, TolKind kind, long samples_or_nodes,
                   std::optional<uint64_t> seed = std::nullopt);

// Sample mean / standard error accumulator used by every MC gate.
struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
  long n = 0;
};
MeanSe mean_se(const std::vector<double>& values);

// ---------------------------------------------------------------------------
// Check groups (spec'd operations)

// Orthogonality of H_n against f_N and of P_n against f_CN, n,m <= n_max,
// over a small rho grid for the conditional family. Relative 1e-8 on the
// diagonal (1e-7 at |q| = 0.9 and for the conditional family); off-diagonal
// entries are gated absolutely at the same tolerance scaled by
// sqrt([n]_q! [m]_q!).
std::vector<Report> check_orthogonality(double q, int n_max,
                                        const QuadratureSpec& spec = {});

// Pointwise Chapman-Kolmogorov: integral over y of
// f_CN(x|y,rho1) f_CN(y|z,rho2) against f_CN(x|z,rho1 rho2), abs 1e-7.
std::vector<Report> check_chapman_kolmogorov(
    double q, double rho1, double rho2,
    const std::vector<std::pair<double, double>>& points,
    const QuadratureSpec& spec = {});

struct McConfig {
  long n_paths = 1'000'000;
  uint64_t seed = 1;
  int max_degree = 4;
  double sigma = 1.0;  // q-Wiener conditioning time
  double tau = 2.0;    // q-Wiener target time
  double dt = 0.5;     // OU lag
  double se_multiple = 4.0;
};

// Hermite martingale, q-Wiener martingale and reverse martingale,
// exponential (phi) martingale, and the free (q = 0) resolvent identity.
// Conditioning is by construction: paths start exactly at the
// conditioning state.
std::vector<Report> check_martingales(double q, double alpha,
                                      const McConfig& config);

struct BridgeConfig {
  uint64_t seed = 1;
  int random_points = 20;
  long mc_paths = 300'000;
  double bin_width = 0.05;
  double quad_tol = 1e-6;
  double se_multiple = 4.0;
};

// Two-sided formulas: the q-free linear blend, the conditional second
// moment / variance pair, the OU bridge variance, and the full n <= 4
// coefficient tables, each against the quadrature oracle over the
// Markov-factorized bridge density
//   f_CN(mid|left) f_CN(right|mid) / f_CN(right|left),
// plus a binned Monte Carlo cross-check.
std::vector<Report> check_bridges(double q, double alpha,
                                  const BridgeConfig& config);

// Moment identities (fourth moment, squared pairs, square-cross), the
// har4 increment moments, the increment covariances (levels, squares,
// cubes), the one-sided conditional variance, covariance structure of
// both processes, self-similarity, and the spectral-density normalization.
std::vector<Report> check_moments_and_covariances(double q, double alpha,
                                                  const McConfig& config);

// ---------------------------------------------------------------------------
// Suite

struct SuiteConfig {
  uint64_t seed = 1;
  int threads = 0;     // 0 = QPROC_THREADS env, else hardware
  bool quick = false;  // reduced sample counts for smoke runs
};

// The full default suite over q in {-0.9,-0.5,0,0.5,0.9,1} and
// alpha in {0.5, 1}; deterministic for a fixed (seed, config) regardless
// of thread count. Reports come back sorted by check_id.
std::vector<Report> run_default_suite(const SuiteConfig& config);

// JSON array of Reports, field names lower_snake_case, floats printed
// with 17 significant digits; byte-stable for byte-identical inputs.
std::string reports_to_json(const std::vector<Report>& reports);

// Plain-text summary: failures first, one line per check family, the
// coverage map, and the Bonferroni note for the 4-standard-error gates.
std::string summary_table(const std::vector<Report>& reports);

// family prefix (up to the first '/') -> number of Reports
std::map<std::string, int> coverage_map(const std::vector<Report>& reports);

// FNV-1a, used to derive per-check seeds from (suite seed, check id).
uint64_t fnv1a64(const std::string& s);

}  // namespace qproc
