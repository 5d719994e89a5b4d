#pragma once

// Exact L2 distance between the time-shifted MG process and the MVN process
// driven by the same noise, log-log rate fits and the bound check.
//
// With beta = K - 1/2 the coupled difference Z^{H,s}_t - Z^H_t is the
// fractional Wiener integral of C(K,H) (dk - df), so its second moment is
// (C(H)/Gamma(H-K+1))^2 * int (I^beta_- (dk - df))^2 dv. For K = 1/2 the
// transform is the identity and dk, df have disjoint supports.

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "fbmrep/errors.hpp"
#include "fbmrep/kernels.hpp"
#include "fbmrep/parallel.hpp"
#include "fbmrep/quadrature.hpp"
#include "fbmrep/special_functions.hpp"

namespace fbmrep {

namespace detail {

// A function on the line, smooth between the sorted `breaks` and zero from
// `support_end` on. Values at the breaks themselves are never requested.
struct LineFunction {
  std::function<double(double)> f;
  std::vector<double> breaks;
  double support_end = 0.0;
};

// (I^beta_- phi)(v), |beta| < 1.
//
// Near v the integral runs in the offset u = w - v (log u for the Marchaud
// form) so that w - v is exact; past the midpoint to the first break it runs
// in w, which keeps v + u from rounding onto a singular point when |v| is
// large. For beta < 0 the part of the Marchaud difference integral below
// tau is replaced by its linear Taylor term.
inline double rl_transform(const LineFunction& phi, double beta, double v, double tol) {
  if (v >= phi.support_end) return 0.0;
  if (beta == 0.0) return phi.f(v);

  std::vector<double> nodes;
  for (double b : phi.breaks)
    if (b > v && b < phi.support_end) nodes.push_back(b);
  nodes.push_back(phi.support_end);
  std::sort(nodes.begin(), nodes.end());
  const double first = nodes.front() - v;
  const double mid = 0.5 * first;

  if (beta > 0.0) {
    const double e = beta - 1.0;
    double acc = quad::finite([&](double u) { return phi.f(v + u) * std::pow(u, e); }, 0.0, mid, tol).value;
    auto g = [&](double w) { return phi.f(w) * std::pow(w - v, e); };
    acc += quad::finite(g, v + mid, nodes.front(), tol).value;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) acc += quad::finite(g, nodes[i], nodes[i + 1], tol).value;
    return acc / std::tgamma(beta);
  }

  const double alpha = -beta;
  const double e = -alpha - 1.0;
  const double f0 = phi.f(v);
  const double tau = std::min(1e-7 * std::max(1.0, std::abs(v)), 0.25 * first);
  const double slope = (phi.f(v + tau) - f0) / tau;
  double acc = -slope * std::pow(tau, 1.0 - alpha) / (1.0 - alpha);
  acc += f0 * std::pow(phi.support_end - v, -alpha) / alpha;
  acc += quad::finite(
             [&](double y) {
               const double u = std::exp(y);
               return (f0 - phi.f(v + u)) * std::exp(-alpha * y);
             },
             std::log(tau), std::log(mid), tol)
             .value;
  auto g = [&](double w) { return (f0 - phi.f(w)) * std::pow(w - v, e); };
  acc += quad::finite(g, v + mid, nodes.front(), tol).value;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) acc += quad::finite(g, nodes[i], nodes[i + 1], tol).value;
  return alpha / std::tgamma(1.0 - alpha) * acc;
}

struct LineIntegral {
  double body = 0.0;  // over [-L, hi]
  double tail = 0.0;  // over (-inf, -L]
  double error = 0.0;
};

// int_{-inf}^{hi} g, split at `cuts` inside [-L, hi]; the tail is
// integrated, not dropped.
template <class G>
LineIntegral line_integral(G&& g, std::vector<double> cuts, double hi, double L, double tol) {
  const quad::Result body = quad::piecewise(g, -L, hi, cuts, tol);
  const quad::Result tail = quad::to_infinity([&](double x) { return g(-x); }, L, tol);
  return {body.value, tail.value, body.error + tail.error};
}

inline void require_tolerance(double tol) {
  require(tol > 0.0 && tol < 1.0, "quad_tol must lie in (0, 1)");
}

// Power difference with the singular points mapped to 0 (a null set for the
// integrals that use it).
inline double mvn_profile(double p, double t, double w) {
  if (w == 0.0 || w == t) return 0.0;
  return power_difference(p, t, w);
}

}  // namespace detail

/// (I^{K-1/2}_- df)(v) for v < -s in closed form via G0.
inline double transformed_delta_f(const KernelSpec& spec, double v) {
  const double s = spec.shift();
  if (v >= -s) return 0.0;
  const double x = -s - v;
  const double g0t = aux_G(AuxFunctionId{0}, spec, x / (spec.t - v));
  const double g0o = aux_G(AuxFunctionId{0}, spec, x / (-v));
  return std::pow(x, spec.H - 0.5) / std::tgamma(spec.K + 0.5) * (g0t - g0o);
}

/// v -> (I^{K-1/2}_- (dk - df))(v): the coupled difference Z^{H,s}_t - Z^H_t
/// is C(H)/Gamma(H-K+1) times the Wiener integral of this function.
class DifferenceTransform {
 public:
  DifferenceTransform(KernelSpec spec, double tol) : spec_(std::move(spec)), tol_(tol) {
    spec_.validate();
    const double s = spec_.shift();
    phi_ = detail::LineFunction{[this](double w) { return delta_kernels(spec_, DeltaKind::k, w); }, {-s, 0.0}, spec_.t};
  }
  DifferenceTransform(const DifferenceTransform&) = delete;
  DifferenceTransform& operator=(const DifferenceTransform&) = delete;

  double operator()(double v) const {
    const double s = *spec_.shift_s, t = spec_.t, beta = spec_.K - 0.5;
    if (v >= t) return 0.0;
    if (beta == 0.0) return v > -s ? phi_.f(v) : -delta_kernels(spec_, DeltaKind::f, v);
    if (v > -s) return detail::rl_transform(phi_, beta, v, tol_);
    // v left of the support of dk: ordinary weakly singular integral
    const double near = -s - v;
    std::vector<double> cuts{0.0};
    if (near < s) {
      const auto g = quad::geometric_cuts(-s, 0.0, near);
      cuts.insert(cuts.end(), g.begin(), g.end());
    }
    const double ik =
        quad::piecewise([&](double w) { return phi_.f(w) * std::pow(w - v, beta - 1.0); }, -s, t, cuts, tol_)
            .value /
        std::tgamma(beta);
    return ik - transformed_delta_f(spec_, v);
  }

 private:
  KernelSpec spec_;
  double tol_;
  detail::LineFunction phi_;
};

struct DistanceResult {
  double value = 0.0;
  // K = 1/2: closed-form bound on the part of the integral beyond -L.
  // Otherwise: the integrated contribution of (-inf, -L], already in value.
  double tail_bound = 0.0;
  double error = 0.0;  // quadrature error estimate
};

/// E[Z^{H,s}_t - Z^H_t]^2 by quadrature. L is the split between the finite
/// body and the integrated tail.
inline DistanceResult l2_distance(KernelSpec spec, double s, double L, double quad_tol) {
  spec.shift_s = s;
  spec.validate();
  detail::require(spec.t > 0.0, "l2_distance: requires t > 0");
  detail::require(L >= 4.0 * s, "l2_distance: requires L >= 4s");
  detail::require_tolerance(quad_tol);
  const double K = spec.K, H = spec.H, t = spec.t, p = H - K, beta = K - 0.5;
  if (K == H) return {};

  const double inner_tol = quad_tol * 1e-2;
  auto dk = [&](double w) { return delta_kernels(spec, DeltaKind::k, w); };
  auto sq = [](double x) { return x * x; };

  if (beta == 0.0) {
    const double pref = sq(norm_CKH(K, H));
    auto df2 = [&](double v) { return sq(detail::power_difference(p, t, v)); };
    const quad::Result f_body = quad::finite(df2, -L, -s, quad_tol);
    const quad::Result f_tail = quad::to_infinity([&](double x) { return df2(-x); }, L, quad_tol);
    const double zero[] = {0.0};
    const quad::Result k_body = quad::piecewise([&](double v) { return sq(dk(v)); }, -s, t, zero, quad_tol);
    DistanceResult r;
    r.value = pref * (f_body.value + f_tail.value + k_body.value);
    r.tail_bound = pref * p * p * t * t * std::pow(L, 2.0 * p - 1.0) / (1.0 - 2.0 * p);
    r.error = pref * (f_body.error + f_tail.error + k_body.error);
    return r;
  }

  const double pref = sq(norm_C(H) / std::tgamma(H - K + 1.0));
  const DifferenceTransform transformed(spec, inner_tol);
  const auto li = detail::line_integral([&](double v) { return sq(transformed(v)); }, {-s, 0.0}, t, L, quad_tol);
  return {pref * (li.body + li.tail), pref * li.tail, pref * li.error};
}

/// E[Z^H_{t1} Z^H_{t2}] for the MVN representation driven by a K-fBm,
/// by quadrature of the transformed integrands (t1, t2 > 0).
inline quad::Result representation_covariance(double K, double H, double t1, double t2, double L,
                                              double quad_tol) {
  KernelSpec{K, H, 1.0, std::nullopt}.validate();
  detail::require(t1 > 0.0 && t2 > 0.0, "representation_covariance: requires t > 0");
  detail::require(L > std::max(t1, t2), "representation_covariance: L too small");
  detail::require_tolerance(quad_tol);
  const double p = H - K, beta = K - 0.5;
  const double inner_tol = quad_tol * 1e-2;
  const detail::LineFunction m1{[=](double w) { return detail::mvn_profile(p, t1, w); }, {0.0, t1}, t1};
  const detail::LineFunction m2{[=](double w) { return detail::mvn_profile(p, t2, w); }, {0.0, t2}, t2};
  auto integrand = [&](double v) {
    const double a = detail::rl_transform(m1, beta, v, inner_tol);
    if (a == 0.0) return 0.0;
    return a * (t1 == t2 ? a : detail::rl_transform(m2, beta, v, inner_tol));
  };
  const double pref = std::pow(norm_C(H) / std::tgamma(H - K + 1.0), 2);
  const auto li = detail::line_integral(integrand, {0.0, t1, t2}, std::max(t1, t2), L, quad_tol);
  return {pref * (li.body + li.tail), pref * li.error};
}

/// Variance of the MVN representation at t divided by t^{2H}; 1 when the
/// representation is an H-fBm.
inline double variance_identity(const KernelSpec& spec, double L, double quad_tol) {
  spec.validate();
  detail::require(spec.t > 0.0, "variance_identity: requires t > 0");
  return representation_covariance(spec.K, spec.H, spec.t, spec.t, L, quad_tol).value /
         std::pow(spec.t, 2.0 * spec.H);
}

// ---------------------------------------------------------------------------
// Curves, rates, bounds

enum class CurveMethod { deterministic, monte_carlo };

struct DistanceCurve {
  KernelSpec spec;
  std::vector<double> shifts;
  std::vector<double> distances;
  std::vector<double> tail_bounds;
  std::vector<double> errors;
  CurveMethod method = CurveMethod::deterministic;
  double L_rule = 4.0;  // L = L_rule * s for each shift
  double quad_tol = 1e-8;
};

/// Delta(s) for every shift; shifts are evaluated in parallel and stored by
/// index.
inline DistanceCurve distance_curve(KernelSpec spec, const std::vector<double>& shifts, double L_rule,
                                    double quad_tol, unsigned threads = default_threads()) {
  spec.shift_s.reset();
  spec.validate();
  detail::require(L_rule >= 4.0, "distance_curve: L_rule must be at least 4");
  detail::require(!shifts.empty(), "distance_curve: no shifts");
  for (std::size_t i = 0; i < shifts.size(); ++i) {
    detail::require(shifts[i] > 2.0 * spec.t + 5.0, "distance_curve: shifts must exceed 2t + 5");
    if (i > 0) detail::require(shifts[i] > shifts[i - 1], "distance_curve: shifts must increase");
  }
  DistanceCurve c{spec, shifts, {}, {}, {}, CurveMethod::deterministic, L_rule, quad_tol};
  const std::size_t n = shifts.size();
  c.distances.assign(n, 0.0);
  c.tail_bounds.assign(n, 0.0);
  c.errors.assign(n, 0.0);
  parallel_for(
      n,
      [&](std::size_t i) {
        const DistanceResult r = l2_distance(spec, shifts[i], L_rule * shifts[i], quad_tol);
        c.distances[i] = r.value;
        c.tail_bounds[i] = r.tail_bound;
        c.errors[i] = r.error;
      },
      threads);
  return c;
}

struct RateEstimate {
  double slope = 0.0;
  double intercept = 0.0;
  double max_residual = 0.0;
  std::pair<double, double> fit_range{0.0, 0.0};
};

/// Least-squares line through (log s, log Delta).
inline RateEstimate fit_rate(const DistanceCurve& curve) {
  const std::size_t n = curve.shifts.size();
  detail::require(n >= 4 && curve.distances.size() == n, "fit_rate: need at least 4 points");
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    detail::require(curve.distances[i] > 0.0 && curve.shifts[i] > 0.0, "fit_rate: distances must be positive");
    x[i] = std::log(curve.shifts[i]);
    y[i] = std::log(curve.distances[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  RateEstimate r;
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  for (std::size_t i = 0; i < n; ++i)
    r.max_residual = std::max(r.max_residual, std::abs(y[i] - (r.intercept + r.slope * x[i])));
  r.fit_range = {curve.shifts.front(), curve.shifts.back()};
  return r;
}

/// The rate bound at shift s for the constants c1..c4.
inline double bound_value(const KernelSpec& spec, const BoundConstants& c, double s) {
  const double K = spec.K, H = spec.H;
  const double lead = std::pow(s, 2.0 * H - 2.0);
  if (K == 0.5) return std::pow(norm_C(H) / std::tgamma(H + 0.5), 2) * (c.c1 + c.c2.value_or(0.0)) * lead;
  const double pref = 2.0 * std::pow(norm_C(H) / std::tgamma(H - K + 1.0), 2);
  if (K > 0.5) return pref * (c.c1 + c.c2.value_or(0.0)) * lead;
  return pref * ((c.c1 + c.c3.value_or(0.0)) * lead + c.c4.value_or(0.0) * std::pow(s, 2.0 * K - 2.0));
}

struct BoundRow {
  double s = 0.0;
  double delta = 0.0;
  double bound = 0.0;
  double margin = 0.0;  // bound / delta; infinite when delta is 0
};

struct BoundReport {
  std::vector<BoundRow> rows;
  bool pass = true;
  bool constants_truncated = false;
};

inline BoundReport check_bound(const DistanceCurve& curve, const BoundConstants& constants) {
  BoundReport rep;
  rep.constants_truncated = constants.truncated;
  for (std::size_t i = 0; i < curve.shifts.size(); ++i) {
    const double s = curve.shifts[i];
    detail::require(s > constants.valid_from_s, "check_bound: shift outside the validity region");
    BoundRow row{s, curve.distances[i], bound_value(curve.spec, constants, s), 0.0};
    row.margin = row.delta > 0.0 ? row.bound / row.delta : std::numeric_limits<double>::infinity();
    rep.pass = rep.pass && row.delta <= row.bound;
    rep.rows.push_back(row);
  }
  return rep;
}

/// distance_curve.csv: s, delta, tail_bound, bound_value, margin.
inline void write_curve_csv(std::ostream& os, const DistanceCurve& curve, const BoundReport& report) {
  os << "s,delta,tail_bound,bound_value,margin\n" << std::setprecision(17);
  for (std::size_t i = 0; i < curve.shifts.size(); ++i) {
    const double bound = i < report.rows.size() ? report.rows[i].bound : std::nan("");
    const double margin = i < report.rows.size() ? report.rows[i].margin : std::nan("");
    os << curve.shifts[i] << ',' << curve.distances[i] << ',' << curve.tail_bounds[i] << ',' << bound << ','
       << margin << '\n';
  }
}

}  // namespace fbmrep
