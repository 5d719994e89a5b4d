// fbmrep: command-line front end.
//
// Exit codes: 0 success / check passed, 1 check failed, 2 bad arguments or
// domain error, 3 convergence or numerical failure, 4 I/O failure.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fbmrep/convergence.hpp"
#include "fbmrep/kernels.hpp"
#include "fbmrep/simulate.hpp"
#include "fbmrep/special_functions.hpp"

using namespace fbmrep;

namespace {

constexpr int kPass = 0, kFail = 1, kDomain = 2, kConvergence = 3, kIo = 4;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  // shared
  double K = 0.5, H = 0.5, t = 1.0;
  std::vector<double> shifts;
  std::size_t paths = 1000;
  std::uint64_t seed = 1;
  std::string out;
  double trunc_l = 64.0;
  double quad_tol = 1e-8;
  double d = 1.0;
  unsigned threads = default_threads();
  // hyp
  double a = 0, b = 0, c = 1, z = 0;
  // kernel
  std::string kind = "mg";
  std::vector<double> at;
  std::optional<double> shift;
  // simulate
  std::string method = "exact";
  std::string driver = "brownian";
  std::string driver_out;
  int steps = 256;
  // covcheck
  std::string in;
  std::vector<double> times;
};

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  return os;
}

void finish(std::ofstream& os, const std::string& path) {
  os.flush();
  if (!os) throw IoError("write to " + path + " failed");
}

int cmd_hyp(const Options& o) {
  std::cout << std::setprecision(17) << hyp2f1(o.a, o.b, o.c, o.z) << '\n';
  return kPass;
}

int cmd_kernel(const Options& o) {
  KernelSpec spec{o.K, o.H, o.t, o.shift};
  spec.validate();
  detail::require(!o.at.empty(), "kernel: give at least one point with --at");
  std::cout << std::setprecision(17) << "u,value\n";
  for (double u : o.at) {
    double v = 0.0;
    if (o.kind == "mg") v = mg_kernel(spec, u);
    else if (o.kind == "mvn") v = mvn_kernel(spec, u);
    else if (o.kind == "shifted") v = shifted_mg_integrand(spec, u);
    else {
      static const std::map<std::string, DeltaKind> kinds{
          {"delta-f", DeltaKind::f}, {"delta-g", DeltaKind::g}, {"delta-h", DeltaKind::h}, {"delta-k", DeltaKind::k}};
      v = delta_kernels(spec, kinds.at(o.kind), u);
    }
    std::cout << u << ',' << v << '\n';
  }
  return kPass;
}

// Grid from -L (rounded out to a whole number of steps) to t.
Grid left_extended(double t, int steps, double L) {
  const double h = t / steps;
  const int left = static_cast<int>(std::ceil(L / h - 1e-9));
  return Grid{-left * h, t, left + steps};
}

int cmd_simulate(const Options& o) {
  detail::require(o.t > 0.0, "simulate: --t must be positive");
  detail::require(o.trunc_l > 0.0, "simulate: --trunc-l must be positive");
  const KernelSpec spec{o.K, o.H, o.t, {}};
  spec.validate();
  const Grid fwd{0.0, o.t, o.steps};
  fwd.validate();
  const bool fbm_driver = o.driver == "fbm";

  PathEnsemble driver, out;
  if (o.method == "exact") {
    out = sample_fbm_exact(o.H, fwd, o.paths, o.seed, o.threads);
  } else if (o.method == "mg") {
    if (fbm_driver) driver = sample_fbm_exact(o.K, fwd, o.paths, o.seed, o.threads);
    else driver = sample_brownian(o.K == 0.5 ? fwd : left_extended(o.t, o.steps, o.trunc_l), o.paths, o.seed, o.threads);
    out = mg_transform_path(spec, driver, o.threads);
  } else {
    const Grid g = left_extended(o.t, o.steps, o.trunc_l);
    driver = fbm_driver ? sample_fbm_exact(o.K, g, o.paths, o.seed, o.threads)
                        : sample_brownian(g, o.paths, o.seed, o.threads);
    const MvnPaths r = mvn_transform_path(spec, driver, -g.t_start, o.threads);
    std::cout << std::setprecision(17) << "truncation_variance " << r.tail_variance << '\n';
    out = r.paths;
  }
  auto os = open_out(o.out);
  write_csv(os, out);
  finish(os, o.out);
  if (!o.driver_out.empty() && o.method != "exact") {
    auto ds = open_out(o.driver_out);
    write_csv(ds, driver);
    finish(ds, o.driver_out);
  }
  std::cout << "wrote " << out.n_paths() << " paths x " << out.grid.size() << " times to " << o.out << '\n';
  return kPass;
}

int cmd_covcheck(const Options& o) {
  std::ifstream is(o.in, std::ios::binary);
  if (!is) throw IoError("cannot open " + o.in);
  const PathEnsemble ens = read_csv(is, o.H);
  std::vector<double> times = o.times;
  if (times.empty())
    for (int i = 1; i <= ens.grid.n_steps; i += std::max(1, ens.grid.n_steps / 4)) times.push_back(ens.grid.time(i));
  const CovarianceEstimate est = empirical_covariance(ens, times);
  double worst = 0.0;
  for (std::size_t a = 0; a < times.size(); ++a)
    for (std::size_t b = a; b < times.size(); ++b) {
      const double diff = std::abs(est.matrix(a, b) - fbm_covariance(o.H, times[a], times[b]));
      const double se = est.std_error(a, b);
      const double score = se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : INFINITY);
      worst = std::max(worst, score);
    }
  const bool pass = worst <= 5.0;
  std::cout << std::setprecision(17) << "paths " << ens.n_paths() << "\nmax_stderr_ratio " << worst << "\npass "
            << (pass ? "true" : "false") << '\n';
  return pass ? kPass : kFail;
}

int cmd_converge(const Options& o) {
  const KernelSpec spec{o.K, o.H, o.t, {}};
  spec.validate();
  std::cout << std::setprecision(17);
  if (o.K == o.H) {
    std::cout << "degenerate: K = H, the two representations coincide and the distance is 0\n";
    return kPass;
  }
  detail::require(o.shifts.size() >= 4, "converge: need at least four --shifts");
  const BoundConstants bc = bound_constants(spec, o.d);
  for (double s : o.shifts)
    detail::require(s > bc.valid_from_s, "converge: every shift must exceed 2t + 4d + 1");
  const DistanceCurve curve = distance_curve(spec, o.shifts, o.trunc_l, o.quad_tol, o.threads);
  const RateEstimate rate = fit_rate(curve);
  const BoundReport rep = check_bound(curve, bc);

  const double target = 2.0 * o.H - 2.0;
  const bool slope_ok = o.K < 0.5 ? rate.slope <= target + 0.15 : std::abs(rate.slope - target) <= 0.15;
  double min_margin = INFINITY;
  for (const auto& r : rep.rows) min_margin = std::min(min_margin, r.margin);
  const bool pass = slope_ok && min_margin >= 1.0;

  const std::filesystem::path dir = o.out.empty() ? "." : o.out;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const std::string curve_path = (dir / "distance_curve.csv").string();
  auto cs = open_out(curve_path);
  write_curve_csv(cs, curve, rep);
  finish(cs, curve_path);

  std::ostringstream summary;
  summary << std::setprecision(17) << "slope " << rate.slope << "\nintercept " << rate.intercept
          << "\ntarget_exponent " << target << '\n';
  if (o.K < 0.5) summary << "second_exponent " << 2.0 * o.K - 2.0 << '\n';
  summary << "min_margin " << min_margin << "\nconstants_truncated " << (bc.truncated ? "true" : "false")
          << "\npass " << (pass ? "true" : "false") << '\n';
  const std::string rate_path = (dir / "rate.txt").string();
  auto rs = open_out(rate_path);
  rs << summary.str();
  finish(rs, rate_path);
  std::cout << summary.str();
  return pass ? kPass : kFail;
}

int cmd_bounds(const Options& o) {
  const KernelSpec spec{o.K, o.H, o.t, {}};
  const BoundConstants bc = bound_constants(spec, o.d);
  std::cout << std::setprecision(17) << "c1 " << bc.c1 << '\n';
  if (bc.c2) std::cout << "c2 " << *bc.c2 << '\n';
  if (bc.c3) std::cout << "c3 " << *bc.c3 << '\n';
  if (bc.c4) std::cout << "c4 " << *bc.c4 << '\n';
  std::cout << "d " << bc.d << "\nvalid_from_s " << bc.valid_from_s << "\ntruncated "
            << (bc.truncated ? "true" : "false") << '\n';
  for (double s : o.shifts) std::cout << "bound " << s << ' ' << bound_value(spec, bc, s) << '\n';
  return kPass;
}

void add_pair(CLI::App* app, Options& o) {
  app->add_option("--hurst-k", o.K, "Hurst index K of the driver")->capture_default_str();
  app->add_option("--hurst-h", o.H, "Hurst index H of the target")->capture_default_str();
  app->add_option("--t", o.t, "time horizon")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fractional Brownian motion representations: kernels, simulation, convergence"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--threads", o.threads, "worker threads (default FBMREP_THREADS or all cores)")
      ->check(CLI::PositiveNumber);

  auto* hyp = app.add_subcommand("hyp", "evaluate 2F1(a, b; c; z)");
  hyp->add_option("a", o.a)->required();
  hyp->add_option("b", o.b)->required();
  hyp->add_option("c", o.c)->required();
  hyp->add_option("z", o.z)->required();

  auto* kernel = app.add_subcommand("kernel", "evaluate a representation kernel at points");
  add_pair(kernel, o);
  kernel->add_option("--shifts", o.shift, "shift s (shifted and delta kernels)");
  kernel->add_option("--kind", o.kind)
      ->check(CLI::IsMember({"mg", "mvn", "shifted", "delta-f", "delta-g", "delta-h", "delta-k"}))
      ->capture_default_str();
  kernel->add_option("--at", o.at, "evaluation points")->required();

  auto* sim = app.add_subcommand("simulate", "simulate an ensemble and write it as CSV");
  add_pair(sim, o);
  sim->add_option("--method", o.method)->check(CLI::IsMember({"exact", "mg", "mvn"}))->capture_default_str();
  sim->add_option("--driver", o.driver, "driver for mg/mvn: brownian (default) or fbm (exact K-fBm)")
      ->check(CLI::IsMember({"brownian", "fbm"}));
  sim->add_option("--steps", o.steps, "grid steps on [0, t]")->capture_default_str();
  sim->add_option("--paths", o.paths)->capture_default_str();
  sim->add_option("--seed", o.seed)->capture_default_str();
  sim->add_option("--trunc-l", o.trunc_l, "left end -L of the driver (mvn, and mg with K != 1/2)")
      ->capture_default_str();
  sim->add_option("--out", o.out, "output CSV")->required();
  sim->add_option("--driver-out", o.driver_out, "also write the driver ensemble");

  auto* cov = app.add_subcommand("covcheck", "compare an ensemble's covariance with fBm");
  cov->add_option("--in", o.in, "ensemble CSV")->required();
  cov->add_option("--hurst-h", o.H)->required();
  cov->add_option("--times", o.times, "grid times to probe (default: four spread times)");

  auto* conv = app.add_subcommand("converge", "distance curve, fitted rate and bound check");
  add_pair(conv, o);
  conv->add_option("--shifts", o.shifts)->required();
  conv->add_option("--d", o.d)->capture_default_str();
  o.trunc_l = 4.0;
  conv->add_option("--trunc-l", o.trunc_l, "split point L as a multiple of s (at least 4)")->capture_default_str();
  conv->add_option("--quad-tol", o.quad_tol)->capture_default_str();
  conv->add_option("--out", o.out, "output directory for distance_curve.csv and rate.txt");

  auto* bounds = app.add_subcommand("bounds", "print the bound constants");
  add_pair(bounds, o);
  bounds->add_option("--d", o.d)->capture_default_str();
  bounds->add_option("--shifts", o.shifts, "also print the bound at these shifts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kDomain;
  }
  // --trunc-l defaults differ: 4 (multiplier) for converge, 64 (absolute) for simulate
  if (sim->parsed() && sim->count("--trunc-l") == 0) o.trunc_l = 64.0;

  try {
    if (hyp->parsed()) return cmd_hyp(o);
    if (kernel->parsed()) return cmd_kernel(o);
    if (sim->parsed()) return cmd_simulate(o);
    if (cov->parsed()) return cmd_covcheck(o);
    if (conv->parsed()) return cmd_converge(o);
    if (bounds->parsed()) return cmd_bounds(o);
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return kDomain;
  } catch (const ConvergenceError& e) {
    std::cerr << "convergence error: " << e.what() << '\n';
    return kConvergence;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kConvergence;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  }
  return kDomain;
}
