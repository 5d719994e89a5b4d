#pragma once

// Path simulation: exact Gaussian sampling on a grid, Brownian drivers, the
// fractional Wiener integral, discretized MG/MVN transforms, coupled
// shifted-MG/MVN pairs and empirical covariances.
//
// Every path draws from its own generator seeded from (master seed, path,
// stream), so ensembles do not depend on the thread schedule.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <boost/math/quadrature/gauss.hpp>

#include "fbmrep/convergence.hpp"
#include "fbmrep/errors.hpp"
#include "fbmrep/frac_calc.hpp"
#include "fbmrep/kernels.hpp"
#include "fbmrep/parallel.hpp"
#include "fbmrep/quadrature.hpp"
#include "fbmrep/special_functions.hpp"

namespace fbmrep {

struct Grid {
  double t_start = 0.0;
  double t_end = 1.0;
  int n_steps = 2;

  void validate() const {
    detail::require(std::isfinite(t_start) && std::isfinite(t_end) && t_start < t_end,
                    "Grid: need t_start < t_end");
    detail::require(n_steps >= 2, "Grid: need at least two steps");
  }
  double step() const { return (t_end - t_start) / n_steps; }
  double time(int i) const { return i == n_steps ? t_end : t_start + i * step(); }
  std::size_t size() const { return static_cast<std::size_t>(n_steps) + 1; }

  std::optional<int> find(double t) const {
    const double x = (t - t_start) / step();
    const double i = std::round(x);
    if (i < 0 || i > n_steps || std::abs(x - i) > 1e-9) return std::nullopt;
    return static_cast<int>(i);
  }
  int index_of(double t) const {
    const auto i = find(t);
    detail::require(i.has_value(), "Grid: time is not a grid point");
    return *i;
  }
};

struct PathEnsemble {
  Grid grid;
  Eigen::MatrixXd paths;  // n_paths x (n_steps + 1)
  std::uint64_t master_seed = 0;
  double hurst = 0.5;

  std::size_t n_paths() const { return static_cast<std::size_t>(paths.rows()); }
};

struct CovarianceEstimate {
  std::vector<double> times;
  Eigen::MatrixXd matrix;
  Eigen::MatrixXd std_error;  // jackknife
  std::size_t n_paths = 0;
};

inline double fbm_covariance(double H, double s, double t) {
  detail::require(H > 0.0 && H < 1.0, "fbm_covariance: H must lie in (0, 1)");
  const double e = 2.0 * H;
  return 0.5 * (std::pow(std::abs(s), e) + std::pow(std::abs(t), e) - std::pow(std::abs(t - s), e));
}

namespace detail {

enum Stream : std::uint32_t { kExact = 1, kBrownian = 2, kCoupled = 3 };

inline std::mt19937_64 path_rng(std::uint64_t master, std::size_t path, Stream stream) {
  const auto p = static_cast<std::uint64_t>(path);
  std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(p), static_cast<std::uint32_t>(p >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

inline void require_paths(std::size_t n) { require(n >= 1, "need at least one path"); }

// int_a^b [(tau - v)_+^g - (-v)_+^g] dv for g > -1, via the antiderivative
// of the power difference.
inline double mvn_cell_integral(double g, double tau, double a, double b) {
  const double q = g + 1.0;
  return (power_difference(q, tau, a) - power_difference(q, tau, b)) / q;
}

// Cell average of the MG kernel row z(tau, .) over [a, b] inside [0, tau].
inline double mg_cell_average(const KernelSpec& row, double a, double b) {
  if (row.K == row.H) return 1.0;
  // abscissae can round onto 0 or t; the kernel is integrable there
  auto k = [&](double u) { return u > 0.0 && u < row.t ? mg_kernel(row, u) : 0.0; };
  return quad::finite(k, a, b, 1e-10).value / (b - a);
}

// The fractional Wiener integral route: increments of C(K) int I^beta 1_{cell j} dW
// over driver cell m have coefficient C(K) * avg_{cell m} I^beta 1_{cell j},
// which on a uniform grid depends only on j - m.
inline std::vector<double> fractional_increment_weights(double K, double h, std::size_t n) {
  // c_r for r = j - m >= -1 (the transform vanishes right of the cell)
  const double g = K - 0.5, q = K + 0.5;
  const double scale = norm_C(K) / std::tgamma(K + 0.5) * std::pow(h, g) / q;
  auto P = [&](double x) { return x > 0.0 ? std::pow(x, q) : 0.0; };
  std::vector<double> c(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    // driver cell [m, m+1], target cell [j, j+1], offset r = j - m = k
    const double r = static_cast<double>(k);
    c[k] = scale * (P(r + 1.0) - 2.0 * P(r) + P(r - 1.0));
  }
  return c;
}

}  // namespace detail

/// Brownian paths on the grid with W = 0 at time 0 (or at t_start when 0
/// is not a grid time).
inline PathEnsemble sample_brownian(const Grid& grid, std::size_t n_paths, std::uint64_t seed,
                                    unsigned threads = default_threads()) {
  grid.validate();
  detail::require_paths(n_paths);
  const int n = grid.n_steps;
  const int anchor = grid.find(0.0).value_or(0);
  PathEnsemble ens{grid, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_paths), n + 1), seed, 0.5};
  const double sd = std::sqrt(grid.step());
  parallel_for(
      n_paths,
      [&](std::size_t p) {
        auto rng = detail::path_rng(seed, p, detail::kBrownian);
        std::normal_distribution<double> normal;
        std::vector<double> w(n + 1, 0.0);
        for (int i = 0; i < n; ++i) w[i + 1] = w[i] + sd * normal(rng);
        const double base = w[anchor];
        for (int i = 0; i <= n; ++i) ens.paths(static_cast<Eigen::Index>(p), i) = w[i] - base;
      },
      threads);
  return ens;
}

/// Exact fBm on the grid times by Cholesky factorization of the covariance.
inline PathEnsemble sample_fbm_exact(double H, const Grid& grid, std::size_t n_paths, std::uint64_t seed,
                                     unsigned threads = default_threads()) {
  detail::require(H > 0.0 && H < 1.0, "sample_fbm_exact: H must lie in (0, 1)");
  grid.validate();
  detail::require_paths(n_paths);
  std::vector<int> idx;
  for (int i = 0; i <= grid.n_steps; ++i)
    if (grid.time(i) != 0.0) idx.push_back(i);
  const auto m = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd cov(m, m);
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = 0; b < m; ++b) cov(a, b) = fbm_covariance(H, grid.time(idx[a]), grid.time(idx[b]));
  const Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw NumericalError("sample_fbm_exact: covariance not positive definite; retry with diagonal jitter 1e-12");
  const Eigen::MatrixXd L = llt.matrixL();

  PathEnsemble ens{grid, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_paths), grid.n_steps + 1), seed, H};
  parallel_for(
      n_paths,
      [&](std::size_t p) {
        auto rng = detail::path_rng(seed, p, detail::kExact);
        std::normal_distribution<double> normal;
        Eigen::VectorXd z(m);
        for (Eigen::Index a = 0; a < m; ++a) z(a) = normal(rng);
        const Eigen::VectorXd x = L.triangularView<Eigen::Lower>() * z;
        for (Eigen::Index a = 0; a < m; ++a) ens.paths(static_cast<Eigen::Index>(p), idx[a]) = x(a);
      },
      threads);
  return ens;
}

/// Per path, sum_j C(K) (I^{K-1/2}_- f)(t_j) (W_{j+1} - W_j) over the driver
/// grid. f is read as its piecewise-linear interpolant (zero outside its
/// grid), which mollifies jumps over one cell; the transform is truncated
/// at the start of the driver grid.
inline std::vector<double> fractional_wiener_integral(const SampledFunction& f, double K,
                                                      const PathEnsemble& driver) {
  f.validate();
  detail::require(K > 0.0 && K < 1.0, "fractional_wiener_integral: K must lie in (0, 1)");
  detail::require(driver.hurst == 0.5, "fractional_wiener_integral: driver must be Brownian");
  const Grid& g = driver.grid;
  const double h = g.step();
  detail::require(std::abs(f.grid_step - h) <= 1e-12 * h, "fractional_wiener_integral: step mismatch");
  const auto first = g.find(f.grid_start);
  const auto last = g.find(f.grid_end());
  detail::require(first.has_value() && last.has_value(),
                  "fractional_wiener_integral: support of the integrand exceeds the driver grid");

  SampledFunction ext{g.t_start, h, std::vector<double>(g.size(), 0.0), f.support_end};
  for (std::size_t j = 0; j < f.size(); ++j) ext.values[*first + j] = f.values[j];
  const double beta = K - 0.5;
  SampledFunction tf = ext;
  if (beta > 0.0) tf = rl_integral(ext, FracOrder{beta});
  if (beta < 0.0) tf = marchaud_limit(ext, FracOrder{-beta}, h / 2.0);
  const double c = norm_C(K);

  std::vector<double> out(driver.n_paths(), 0.0);
  for (std::size_t p = 0; p < out.size(); ++p) {
    double acc = 0.0;
    const auto row = driver.paths.row(static_cast<Eigen::Index>(p));
    for (int j = 0; j < g.n_steps; ++j) acc += tf.values[j] * (row(j + 1) - row(j));
    out[p] = c * acc;
  }
  return out;
}

namespace detail {

// Output times: the grid points in [0, t_end].
inline Grid forward_grid(const Grid& g) {
  const int i0 = g.index_of(0.0);
  require(g.n_steps - i0 >= 2, "need at least two grid steps after time 0");
  return Grid{0.0, g.t_end, g.n_steps - i0};
}

// rows: output time index i -> driver increments; out(p, i) = sum_m A(i, m) dX_m.
inline PathEnsemble apply_rows(const Eigen::MatrixXd& A, const PathEnsemble& driver, const Grid& out_grid,
                               double hurst, unsigned threads) {
  const Eigen::Index np = static_cast<Eigen::Index>(driver.n_paths());
  PathEnsemble ens{out_grid, Eigen::MatrixXd::Zero(np, A.rows()), driver.master_seed, hurst};
  parallel_for(
      driver.n_paths(),
      [&](std::size_t p) {
        const auto row = driver.paths.row(static_cast<Eigen::Index>(p));
        const Eigen::VectorXd dx = (row.tail(row.size() - 1) - row.head(row.size() - 1)).transpose();
        const Eigen::VectorXd z = A * dx;
        ens.paths.row(static_cast<Eigen::Index>(p)) = z.transpose();
      },
      threads);
  return ens;
}

}  // namespace detail

/// The MG representation discretized on the driver grid: Z(t_i) = sum_j k_ij dB^K_j with
/// k_ij the cell average of the MG kernel row. A driver with hurst K is
/// integrated against directly; a Brownian driver with K != 1/2 is turned
/// into K-fBm increments through the fractional Wiener integral of cell
/// indicators. Output times are the grid points in [0, t_end].
inline PathEnsemble mg_transform_path(const KernelSpec& spec, const PathEnsemble& driver,
                                      unsigned threads = default_threads()) {
  KernelSpec base = spec;
  base.shift_s.reset();
  base.validate();
  const Grid& g = driver.grid;
  g.validate();
  const Grid out = detail::forward_grid(g);
  const int i0 = g.index_of(0.0);
  const bool direct = driver.hurst == base.K;
  detail::require(direct || driver.hurst == 0.5, "mg_transform_path: driver must be K-fBm or Brownian");

  if (base.K == base.H && direct) {
    PathEnsemble ens{out, driver.paths.rightCols(out.n_steps + 1), driver.master_seed, base.H};
    return ens;
  }

  const int nf = out.n_steps;
  const double h = g.step();
  // MG rows against K-increments on the forward cells
  Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(nf + 1, nf);
  parallel_for(
      static_cast<std::size_t>(nf),
      [&](std::size_t k) {
        const int i = static_cast<int>(k) + 1;
        KernelSpec row = base;
        row.t = out.time(i);
        for (int j = 0; j < i; ++j) rows(i, j) = detail::mg_cell_average(row, j * h, j == i - 1 ? row.t : (j + 1) * h);
      },
      threads);

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(nf + 1, g.n_steps);
  if (direct) {
    A.rightCols(nf) = rows;
  } else {
    // dB^K_j = sum_m c_{j - m} dW_m over all driver cells m <= j + 1
    const auto c = detail::fractional_increment_weights(base.K, h, static_cast<std::size_t>(g.n_steps) + 1);
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(nf, g.n_steps);
    for (int j = 0; j < nf; ++j)
      for (int m = 0; m <= i0 + j; ++m) B(j, m) = c[static_cast<std::size_t>(i0 + j - m)];
    A = rows * B;
  }
  return detail::apply_rows(A, driver, out, base.H, threads);
}

struct MvnPaths {
  PathEnsemble paths;
  // variance of the representation beyond -L at the last output time
  // (Brownian form, where it is exact)
  double tail_variance = 0.0;
};

/// The MVN representation truncated at -L. With a K-fBm driver the MVN kernel is cell
/// averaged against its increments; with a Brownian driver the composed
/// kernel C(H)/Gamma(H+1/2) [(t-v)^{H-1/2}_+ - (-v)^{H-1/2}_+] is cell
/// averaged against dW, which is what the fractional Wiener integral of the
/// MVN kernel reduces to for every K.
inline MvnPaths mvn_transform_path(const KernelSpec& spec, const PathEnsemble& driver, double L,
                                   unsigned threads = default_threads()) {
  KernelSpec base = spec;
  base.shift_s.reset();
  base.validate();
  const Grid& g = driver.grid;
  g.validate();
  detail::require(L > 0.0 && std::isfinite(L), "mvn_transform_path: L must be positive");
  detail::require(g.t_start <= -L + 1e-9 * L, "mvn_transform_path: driver grid does not reach -L");
  const bool direct = driver.hurst == base.K;
  detail::require(direct || driver.hurst == 0.5, "mvn_transform_path: driver must be K-fBm or Brownian");
  const Grid out = detail::forward_grid(g);
  // first driver cell starting at or after -L
  const int first = std::max(0, static_cast<int>(std::ceil((-L - g.t_start) / g.step() - 1e-9)));
  const double H = base.H, K = base.K;
  const double gexp = direct ? H - K : H - 0.5;
  const double pref = direct ? norm_CKH(K, H) : norm_C(H) / std::tgamma(H + 0.5);
  const int i0 = g.index_of(0.0);
  const double h = g.step();

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(out.n_steps + 1, g.n_steps);
  for (int i = 1; i <= out.n_steps; ++i) {
    const double tau = out.time(i);
    for (int m = first; m < i0 + i; ++m) {
      const double a = g.time(m), b = g.time(m + 1);
      if (gexp == 0.0) {
        A(i, m) = (a >= 0.0 && a < tau) ? pref : 0.0;
      } else {
        A(i, m) = pref * detail::mvn_cell_integral(gexp, tau, a, b) / h;
      }
    }
  }
  const double t_last = out.t_end;
  const double gam = H - 0.5;
  const double tail = std::pow(norm_C(H) / std::tgamma(H + 0.5), 2) * gam * gam * t_last * t_last *
                      std::pow(L, 2.0 * H - 2.0) / (2.0 - 2.0 * H);
  return {detail::apply_rows(A, driver, out, H, threads), tail};
}

struct CoupledPaths {
  PathEnsemble shifted_mg;  // Z^{H,s}
  PathEnsemble mvn;         // Z^H
  double truncation_variance = 0.0;  // E[(Z^{H,s}_t - Z^H_t)^2] lost beyond -L
};

/// Z^{H,s} and Z^H at the grid times in [0, t] from the same Brownian noise.
/// The driver is the grid from t_start on, continued to -L by geometric
/// cells; both integrands are cell averaged (the MVN one in closed form, the
/// difference kernel by 4-point Gauss-Legendre), so Z^{H,s} - Z^H is the
/// discretized Wiener integral of the exact difference kernel.
inline CoupledPaths zhs_and_zh_paths(const KernelSpec& spec, const Grid& grid, double L, std::size_t n_paths,
                                     std::uint64_t seed, unsigned threads = default_threads()) {
  spec.validate();
  grid.validate();
  detail::require_paths(n_paths);
  const double s = spec.shift(), t = spec.t, H = spec.H, K = spec.K;
  detail::require(t > 0.0, "zhs_and_zh_paths: requires t > 0");
  detail::require(L > 0.0 && std::isfinite(L), "zhs_and_zh_paths: L must be positive");
  detail::require(L > s, "zhs_and_zh_paths: need L > s");
  detail::require(grid.find(-s).has_value(), "zhs_and_zh_paths: -s must be a grid time");
  const int i0 = grid.index_of(0.0);
  const int it = grid.index_of(t);
  detail::require(it - i0 >= 2, "zhs_and_zh_paths: need at least two steps in [0, t]");
  const Grid out{0.0, t, it - i0};
  const double h = grid.step();

  // cell edges: geometric to the left of the grid, then the grid up to t
  std::vector<double> edges;
  for (double w = 2.0 * h, e = grid.t_start - h; e > -L; w *= 1.25, e -= w) edges.push_back(e);
  if (grid.t_start > -L) edges.push_back(-L);
  std::reverse(edges.begin(), edges.end());
  for (int i = 0; i <= it; ++i) edges.push_back(grid.time(i));
  const std::size_t M = edges.size() - 1;

  const double cm = norm_C(H) / std::tgamma(H + 0.5);
  const double cd = norm_C(H) / std::tgamma(H - K + 1.0);
  Eigen::MatrixXd Am = Eigen::MatrixXd::Zero(out.n_steps + 1, static_cast<Eigen::Index>(M));
  Eigen::MatrixXd Ad = Am;
  std::vector<double> tails(out.n_steps + 1, 0.0);
  parallel_for(
      static_cast<std::size_t>(out.n_steps),
      [&](std::size_t k) {
        const int i = static_cast<int>(k) + 1;
        const double tau = out.time(i);
        for (std::size_t m = 0; m < M; ++m) {
          const double a = edges[m], b = edges[m + 1];
          if (a >= tau) break;
          Am(i, m) = cm * detail::mvn_cell_integral(H - 0.5, tau, a, b) / (b - a);
        }
        // the two representations coincide when K = H
        if (K == H) return;
        KernelSpec row = spec;
        row.t = tau;
        const DifferenceTransform diff(row, 1e-10);
        using gl = boost::math::quadrature::gauss<double, 4>;
        for (std::size_t m = 0; m < M; ++m) {
          const double a = edges[m], b = edges[m + 1];
          if (a >= tau) break;
          Ad(i, m) = cd * gl::integrate([&](double v) { return diff(v); }, a, b) / (b - a);
        }
        tails[i] = cd * cd * quad::to_infinity([&](double x) { const double y = diff(-x); return y * y; }, L, 1e-8).value;
      },
      threads);

  CoupledPaths outp;
  outp.truncation_variance = tails.back();
  const Eigen::Index np = static_cast<Eigen::Index>(n_paths);
  outp.shifted_mg = PathEnsemble{out, Eigen::MatrixXd::Zero(np, out.n_steps + 1), seed, H};
  outp.mvn = outp.shifted_mg;
  parallel_for(
      n_paths,
      [&](std::size_t p) {
        auto rng = detail::path_rng(seed, p, detail::kCoupled);
        std::normal_distribution<double> normal;
        Eigen::VectorXd dw(static_cast<Eigen::Index>(M));
        for (std::size_t m = 0; m < M; ++m) dw(m) = std::sqrt(edges[m + 1] - edges[m]) * normal(rng);
        const Eigen::VectorXd zm = Am * dw;
        const Eigen::VectorXd zd = Ad * dw;
        outp.mvn.paths.row(static_cast<Eigen::Index>(p)) = zm.transpose();
        outp.shifted_mg.paths.row(static_cast<Eigen::Index>(p)) = (zm + zd).transpose();
      },
      threads);
  return outp;
}

/// Sample covariance at the given grid times with jackknife standard errors.
inline CovarianceEstimate empirical_covariance(const PathEnsemble& ens, const std::vector<double>& times) {
  const std::size_t n = ens.n_paths();
  detail::require(n >= 2, "empirical_covariance: need at least two paths");
  const auto k = static_cast<Eigen::Index>(times.size());
  std::vector<int> idx;
  for (double t : times) idx.push_back(ens.grid.index_of(t));
  Eigen::MatrixXd X(static_cast<Eigen::Index>(n), k);
  for (Eigen::Index a = 0; a < k; ++a) X.col(a) = ens.paths.col(idx[a]);

  const double nd = static_cast<double>(n);
  const Eigen::RowVectorXd sum = X.colwise().sum();
  const Eigen::MatrixXd sxy = X.transpose() * X;
  CovarianceEstimate est{times, Eigen::MatrixXd::Zero(k, k), Eigen::MatrixXd::Zero(k, k), n};
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = 0; b < k; ++b) est.matrix(a, b) = (sxy(a, b) - sum(a) * sum(b) / nd) / (nd - 1.0);

  // leave-one-out covariances from the running sums
  Eigen::MatrixXd mean_loo = Eigen::MatrixXd::Zero(k, k), sq_loo = Eigen::MatrixXd::Zero(k, k);
  for (std::size_t p = 0; p < n; ++p) {
    const auto x = X.row(static_cast<Eigen::Index>(p));
    for (Eigen::Index a = 0; a < k; ++a)
      for (Eigen::Index b = a; b < k; ++b) {
        const double sa = sum(a) - x(a), sb = sum(b) - x(b);
        const double c = (sxy(a, b) - x(a) * x(b) - sa * sb / (nd - 1.0)) / (nd - 2.0);
        mean_loo(a, b) += c;
        sq_loo(a, b) += c * c;
      }
  }
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = a; b < k; ++b) {
      const double m = mean_loo(a, b) / nd;
      const double var = std::max(0.0, (nd - 1.0) / nd * (sq_loo(a, b) - nd * m * m));
      est.std_error(a, b) = est.std_error(b, a) = std::sqrt(var);
    }
  return est;
}

// ---------------------------------------------------------------------------
// CSV: header time,path_0,...; one row per grid time; shortest round-trip
// decimal formatting.

namespace detail {

inline void put_double(std::ostream& os, double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  os.write(buf, r.ptr - buf);
}

}  // namespace detail

inline void write_csv(std::ostream& os, const PathEnsemble& ens) {
  os << "time";
  for (std::size_t p = 0; p < ens.n_paths(); ++p) os << ",path_" << p;
  os << '\n';
  for (int i = 0; i <= ens.grid.n_steps; ++i) {
    detail::put_double(os, ens.grid.time(i));
    for (std::size_t p = 0; p < ens.n_paths(); ++p) {
      os << ',';
      detail::put_double(os, ens.paths(static_cast<Eigen::Index>(p), i));
    }
    os << '\n';
  }
}

/// Reads an ensemble written by write_csv. The grid is rebuilt from the
/// first and last times; the seed and Hurst index are not stored.
inline PathEnsemble read_csv(std::istream& is, double hurst) {
  std::string line;
  detail::require(static_cast<bool>(std::getline(is, line)) && line.rfind("time", 0) == 0,
                  "read_csv: missing header");
  std::vector<double> times;
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> vals;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (p < end) {
      double x = 0.0;
      const auto r = std::from_chars(p, end, x);
      detail::require(r.ec == std::errc(), "read_csv: malformed number");
      vals.push_back(x);
      p = r.ptr;
      if (p < end) {
        detail::require(*p == ',', "read_csv: expected a comma");
        ++p;
      }
    }
    times.push_back(vals.front());
    rows.emplace_back(vals.begin() + 1, vals.end());
  }
  detail::require(times.size() >= 3 && !rows.front().empty(), "read_csv: need at least three rows and one path");
  const Grid g{times.front(), times.back(), static_cast<int>(times.size()) - 1};
  for (std::size_t i = 0; i < times.size(); ++i)
    detail::require(std::abs(g.time(static_cast<int>(i)) - times[i]) <= 1e-9 * std::max(1.0, std::abs(times[i])),
                    "read_csv: times are not uniformly spaced");
  const auto np = static_cast<Eigen::Index>(rows.front().size());
  PathEnsemble ens{g, Eigen::MatrixXd::Zero(np, static_cast<Eigen::Index>(times.size())), 0, hurst};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    detail::require(static_cast<Eigen::Index>(rows[i].size()) == np, "read_csv: ragged rows");
    for (Eigen::Index p = 0; p < np; ++p) ens.paths(p, static_cast<Eigen::Index>(i)) = rows[i][p];
  }
  return ens;
}

}  // namespace fbmrep
