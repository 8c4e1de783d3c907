// qproc: simulation, density evaluation, polynomial tables, bridge
// formulas, spectra and the verification suite for the q-Wiener and
// (q,alpha)-Ornstein-Uhlenbeck processes.
//
// Data goes to stdout (or --output), diagnostics to stderr. Exit codes:
// 0 success, 1 usage or parameter error, 2 verification failures.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qproc/density.hpp"
#include "qproc/orthopoly.hpp"
#include "qproc/process.hpp"
#include "qproc/verify.hpp"

namespace {

std::string csv_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string json_num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int write_output(const std::string& path, const std::string& data) {
  if (path.empty() || path == "-") {
    std::cout << data;
    return 0;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot open output file: " << path << "\n";
    return 1;
  }
  out << data;
  return 0;
}

std::string trajectories_csv(const std::vector<qproc::Trajectory>& paths) {
  std::string out = "path,time,value\n";
  for (size_t p = 0; p < paths.size(); ++p) {
    for (size_t i = 0; i < paths[p].times.size(); ++i) {
      out += std::to_string(p);
      out += ',';
      out += csv_num(paths[p].times[i]);
      out += ',';
      out += csv_num(paths[p].values[i]);
      out += '\n';
    }
  }
  return out;
}

std::string trajectories_json(const std::vector<qproc::Trajectory>& paths) {
  std::string out = "[\n";
  for (size_t p = 0; p < paths.size(); ++p) {
    const qproc::Trajectory& t = paths[p];
    out += "  {\"kind\":\"";
    out += t.kind == qproc::ProcessKind::kOU ? "ou" : "qwiener";
    out += "\",\"seed\":" + std::to_string(t.seed);
    out += ",\"path\":" + std::to_string(p);
    out += ",\"times\":[";
    for (size_t i = 0; i < t.times.size(); ++i) {
      if (i) out += ',';
      out += json_num(t.times[i]);
    }
    out += "],\"values\":[";
    for (size_t i = 0; i < t.values.size(); ++i) {
      if (i) out += ',';
      out += json_num(t.values[i]);
    }
    out += p + 1 < paths.size() ? "]},\n" : "]}\n";
  }
  out += "]\n";
  return out;
}

std::vector<double> time_grid(double t0, double t1, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("--dt must be > 0");
  if (!(t1 > t0)) throw std::invalid_argument("--t1 must exceed --t0");
  std::vector<double> times;
  const long steps = std::lround((t1 - t0) / dt);
  times.reserve(static_cast<size_t>(steps) + 1);
  for (long i = 0; i <= steps; ++i) times.push_back(t0 + dt * i);
  return times;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"q-Wiener / (q,alpha)-Ornstein-Uhlenbeck toolkit"};
  app.require_subcommand(1);

  // --- simulate
  auto* sim = app.add_subcommand("simulate", "simulate OU or q-Wiener paths");
  std::string kind = "ou";
  double q = 0.5, alpha = 1.0, t0 = 0.0, t1 = 10.0, dt = 0.01;
  int paths = 1;
  uint64_t seed = 1;
  std::string format = "csv", output;
  sim->add_option("--kind", kind, "process kind: ou | qwiener")
      ->check(CLI::IsMember({"ou", "qwiener"}));
  sim->add_option("--q", q, "deformation parameter in (-1, 1]")->required();
  sim->add_option("--alpha", alpha, "mean-reversion rate (required for ou)");
  sim->add_option("--t0", t0, "first time");
  sim->add_option("--t1", t1, "last time");
  sim->add_option("--dt", dt, "time step");
  sim->add_option("--paths", paths, "number of independent paths")
      ->check(CLI::PositiveNumber);
  sim->add_option("--seed", seed, "RNG seed");
  sim->add_option("--format", format, "csv | json")
      ->check(CLI::IsMember({"csv", "json"}));
  sim->add_option("--output,-o", output, "output file (default stdout)");

  // --- density
  auto* den = app.add_subcommand("density", "evaluate f_N or f_CN");
  double dq = 0.0, dx = 0.0, dy = 0.0, drho = 0.0, dfrom = 0.0, dto = 0.0;
  int dn = 0;
  bool with_cdf = false;
  std::string doutput;
  den->add_option("--q", dq)->required();
  auto* optx = den->add_option("--x", dx, "evaluation point");
  den->add_option("--y", dy, "conditioning state (with --rho)");
  auto* optrho = den->add_option("--rho", drho, "one-step correlation");
  den->add_option("--from", dfrom, "grid start (with --to, --n)");
  den->add_option("--to", dto, "grid end");
  auto* optn = den->add_option("--n", dn, "grid point count");
  den->add_flag("--cdf", with_cdf, "include stationary CDF column");
  den->add_option("--output,-o", doutput);

  // --- poly
  auto* pol = app.add_subcommand("poly", "q-Hermite / Al-Salam-Chihara table");
  double pq = 0.5, px = 0.0, py = 0.0, prho = 0.0;
  int pn = 4;
  std::string pformat = "csv", poutput;
  pol->add_option("--q", pq)->required();
  pol->add_option("--n", pn, "highest degree")->check(CLI::NonNegativeNumber);
  pol->add_option("--x", px, "evaluation point")->required();
  pol->add_option("--y", py, "conditioning point (Al-Salam-Chihara)");
  auto* poptrho = pol->add_option("--rho", prho, "correlation parameter");
  pol->add_option("--format", pformat)->check(CLI::IsMember({"csv", "json"}));
  pol->add_option("--output,-o", poutput);

  // --- bridge
  auto* bri = app.add_subcommand(
      "bridge", "two-sided conditional-expectation coefficients");
  double bq = 0.5, brho1 = 0.0, brho2 = 0.0, balpha = 0.0, bdelta = 0.0,
         bgamma = 0.0, byl = 0.0, byr = 0.0;
  int bn = 2;
  std::string bformat = "csv", boutput;
  bool has_endpoints = false;
  bri->add_option("--q", bq)->required();
  bri->add_option("--n", bn, "Hermite degree, 1..4")->required();
  auto* o_r1 = bri->add_option("--rho1", brho1, "left correlation");
  auto* o_r2 = bri->add_option("--rho2", brho2, "right correlation");
  auto* o_al = bri->add_option("--alpha", balpha, "OU rate (with --delta/--gamma)");
  bri->add_option("--delta", bdelta, "left gap");
  bri->add_option("--gamma", bgamma, "right gap");
  bri->add_option("--y-left", byl)->each([&](const std::string&) {
    has_endpoints = true;
  });
  bri->add_option("--y-right", byr)->each([&](const std::string&) {
    has_endpoints = true;
  });
  bri->add_option("--format", bformat)->check(CLI::IsMember({"csv", "json"}));
  bri->add_option("--output,-o", boutput);

  // --- spectrum
  auto* spe = app.add_subcommand("spectrum", "spectral density of H_n(Y_t)");
  double sq = 0.5, salpha = 1.0, somega = 0.0, sfrom = 0.0, sto = 0.0;
  int sn = 1, scount = 0;
  std::string soutput;
  spe->add_option("--q", sq)->required();
  spe->add_option("--alpha", salpha)->required();
  spe->add_option("--n", sn, "Hermite degree")->check(CLI::PositiveNumber);
  auto* o_om = spe->add_option("--omega", somega, "single frequency");
  spe->add_option("--from", sfrom);
  spe->add_option("--to", sto);
  auto* o_cnt = spe->add_option("--count", scount, "grid point count");
  spe->add_option("--output,-o", soutput);

  // --- verify
  auto* ver = app.add_subcommand("verify", "run the verification suite");
  std::string suite = "default", voutput;
  uint64_t vseed = 1;
  ver->add_option("--suite", suite, "default | quick")
      ->check(CLI::IsMember({"default", "quick"}));
  ver->add_option("--seed", vseed, "suite seed");
  ver->add_option("--output,-o", voutput, "JSON output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // usage errors are exit 1, --help is 0
  }

  try {
    if (*sim) {
      if (kind == "ou" && sim->count("--alpha") == 0)
        throw std::invalid_argument("simulate --kind ou requires --alpha");
      const std::vector<double> times = time_grid(t0, t1, dt);
      std::vector<qproc::Trajectory> result;
      if (kind == "ou") {
        const qproc::OUParams params(qproc::QParam(q), alpha);
        result = qproc::simulate_ou_paths(params, times, seed, paths);
      } else {
        result = qproc::simulate_qwiener_paths(qproc::QParam(q), times, seed,
                                               paths);
      }
      return write_output(output, format == "csv" ? trajectories_csv(result)
                                                  : trajectories_json(result));
    }

    if (*den) {
      const qproc::QParam par(dq);
      const bool transition = optrho->count() > 0;
      const auto eval = [&](double x) {
        return transition ? qproc::pdf_transition(x, dy, drho, par)
                          : qproc::pdf_stationary(x, par);
      };
      if (optn->count() > 0) {
        std::string out = with_cdf && !transition ? "x,pdf,cdf\n" : "x,pdf\n";
        if (dn < 2) throw std::invalid_argument("--n must be >= 2");
        for (int i = 0; i < dn; ++i) {
          const double x = dfrom + (dto - dfrom) * i / (dn - 1);
          out += csv_num(x) + "," + csv_num(eval(x));
          if (with_cdf && !transition)
            out += "," + csv_num(qproc::cdf_stationary(x, par));
          out += '\n';
        }
        return write_output(doutput, out);
      }
      if (optx->count() == 0)
        throw std::invalid_argument("density: give --x or a --from/--to/--n grid");
      return write_output(doutput, csv_num(eval(dx)) + "\n");
    }

    if (*pol) {
      const qproc::PolySeq seq =
          poptrho->count() > 0 ? qproc::asc_seq(pn, px, py, prho, pq)
                               : qproc::hermite_seq(pn, px, pq);
      if (pformat == "json") {
        std::string out = "[";
        for (int k = 0; k <= seq.degree(); ++k) {
          if (k) out += ',';
          out += json_num(seq[k]);
        }
        out += "]\n";
        return write_output(poutput, out);
      }
      std::string out = "degree,value\n";
      for (int k = 0; k <= seq.degree(); ++k)
        out += std::to_string(k) + "," + csv_num(seq[k]) + "\n";
      return write_output(poutput, out);
    }

    if (*bri) {
      double r1 = brho1, r2 = brho2;
      if (o_al->count() > 0) {
        if (!(bdelta > 0.0) || !(bgamma > 0.0))
          throw std::invalid_argument("--alpha needs --delta and --gamma");
        r1 = std::exp(-balpha * bdelta);
        r2 = std::exp(-balpha * bgamma);
      } else if (o_r1->count() == 0 || o_r2->count() == 0) {
        throw std::invalid_argument(
            "bridge: give --rho1/--rho2 or --alpha/--delta/--gamma");
      }
      const qproc::BridgeCoeffs coeffs = qproc::bridge_coeffs(bn, r1, r2, bq);
      if (bformat == "json") {
        std::string out = "{\"n\":" + std::to_string(coeffs.n) +
                          ",\"rho1\":" + json_num(r1) +
                          ",\"rho2\":" + json_num(r2) + ",\"entries\":[";
        for (size_t i = 0; i < coeffs.entries.size(); ++i) {
          const auto& e = coeffs.entries[i];
          if (i) out += ',';
          out += "{\"r\":" + std::to_string(e.r) +
                 ",\"m\":" + std::to_string(e.m) +
                 ",\"left_degree\":" + std::to_string(e.left_degree) +
                 ",\"right_degree\":" + std::to_string(e.right_degree) +
                 ",\"value\":" + json_num(e.value) + "}";
        }
        out += "]";
        if (has_endpoints)
          out += ",\"mean\":" +
                 json_num(qproc::hermite_bridge_mean(bn, byl, byr, r1, r2, bq));
        out += "}\n";
        return write_output(boutput, out);
      }
      std::string out = "r,m,left_degree,right_degree,value\n";
      for (const auto& e : coeffs.entries)
        out += std::to_string(e.r) + "," + std::to_string(e.m) + "," +
               std::to_string(e.left_degree) + "," +
               std::to_string(e.right_degree) + "," + csv_num(e.value) + "\n";
      if (has_endpoints)
        out += "mean," +
               csv_num(qproc::hermite_bridge_mean(bn, byl, byr, r1, r2, bq)) +
               ",,,\n";
      return write_output(boutput, out);
    }

    if (*spe) {
      if (o_cnt->count() > 0) {
        if (scount < 2) throw std::invalid_argument("--count must be >= 2");
        std::string out = "omega,density\n";
        for (int i = 0; i < scount; ++i) {
          const double w = sfrom + (sto - sfrom) * i / (scount - 1);
          out += csv_num(w) + "," +
                 csv_num(qproc::spectral_density(sn, w, salpha, sq)) + "\n";
        }
        return write_output(soutput, out);
      }
      if (o_om->count() == 0)
        throw std::invalid_argument("spectrum: give --omega or --from/--to/--count");
      return write_output(
          soutput, csv_num(qproc::spectral_density(sn, somega, salpha, sq)) + "\n");
    }

    if (*ver) {
      qproc::SuiteConfig config;
      config.seed = vseed;
      config.quick = suite == "quick";
      const std::vector<qproc::Report> reports =
          qproc::run_default_suite(config);
      const int rc = write_output(voutput, qproc::reports_to_json(reports));
      if (rc != 0) return rc;
      std::cerr << qproc::summary_table(reports);
      for (const qproc::Report& r : reports)
        if (!r.passed) return 2;
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
