#pragma once

// Right-sided Riemann-Liouville operators on uniformly sampled functions.
// A SampledFunction is read as the piecewise-linear interpolant of its
// samples and is zero to the right of the last grid point.

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "fbmrep/errors.hpp"
#include "fbmrep/special_functions.hpp"

namespace fbmrep {

struct SampledFunction {
  double grid_start = 0.0;
  double grid_step = 1.0;
  std::vector<double> values;
  double support_end = 0.0;

  std::size_t size() const { return values.size(); }
  double point(std::size_t j) const { return grid_start + static_cast<double>(j) * grid_step; }
  double grid_end() const { return point(values.size() - 1); }

  void validate() const {
    detail::require(values.size() >= 2, "SampledFunction: need at least two samples");
    detail::require(grid_step > 0.0 && std::isfinite(grid_step),
                    "SampledFunction: grid_step must be positive");
    detail::require(std::isfinite(grid_start) && !std::isnan(support_end),
                    "SampledFunction: non-finite grid");
    for (std::size_t j = 0; j < values.size(); ++j) {
      detail::require(std::isfinite(values[j]), "SampledFunction: non-finite sample");
      if (point(j) > support_end)
        detail::require(values[j] == 0.0, "SampledFunction: nonzero sample beyond support_end");
    }
  }

  /// Samples `fn` at n points starting at `start`; samples beyond
  /// `support_end` are forced to zero.
  template <class F>
  static SampledFunction sample(F&& fn, double start, double step, std::size_t n,
                                double support_end) {
    SampledFunction f{start, step, std::vector<double>(n, 0.0), support_end};
    for (std::size_t j = 0; j < n; ++j) {
      const double x = f.point(j);
      if (x <= support_end) f.values[j] = fn(x);
    }
    return f;
  }
};

struct FracOrder {
  double alpha = 0.5;
};

namespace detail {

// Moments of the cell [m, m + 1] (in units of the step) against the weight
// (m + theta)^{a - 1}: P = int (m+theta)^{a-1}, Q = int (m+theta)^{a-1} theta.
struct CellMoments {
  std::vector<double> left;   // weight on the sample at the near end of the cell
  std::vector<double> right;  // weight on the sample at the far end
};

inline CellMoments cell_moments(double a, std::size_t n) {
  CellMoments w{std::vector<double>(n), std::vector<double>(n)};
  using gl = boost::math::quadrature::gauss<double, 10>;
  for (std::size_t m = 0; m < n; ++m) {
    double p = 0.0, q = 0.0;
    if (m == 0) {
      p = 1.0 / a;
      q = 1.0 / (a + 1.0);
    } else {
      const double md = static_cast<double>(m);
      p = std::pow(md, a) * std::expm1(a * std::log1p(1.0 / md)) / a;
      q = gl::integrate([&](double th) { return std::pow(md + th, a - 1.0) * th; }, 0.0, 1.0);
    }
    w.left[m] = p - q;
    w.right[m] = q;
  }
  return w;
}

inline void require_integral_order(double alpha) {
  require(alpha > 0.0 && alpha <= 1.0, "fractional integral order must lie in (0, 1]");
}

inline void require_derivative_order(double alpha) {
  require(alpha >= 0.0 && alpha < 1.0, "fractional derivative order must lie in [0, 1)");
}

}  // namespace detail

/// (I^alpha_- f) on the grid of f by product integration: the interpolant
/// is integrated exactly against (u - s)^{alpha - 1} on every cell.
inline SampledFunction rl_integral(const SampledFunction& f, FracOrder order) {
  f.validate();
  const double alpha = order.alpha;
  detail::require_integral_order(alpha);
  const std::size_t n = f.size();
  const auto w = detail::cell_moments(alpha, n - 1);
  const double scale = std::pow(f.grid_step, alpha) / std::tgamma(alpha);

  SampledFunction out{f.grid_start, f.grid_step, std::vector<double>(n, 0.0), f.support_end};
  const auto& v = f.values;
  for (std::size_t j = 0; j + 1 < n; ++j) {
    double acc = 0.0;
    for (std::size_t k = j; k + 1 < n; ++k) {
      const std::size_t m = k - j;
      acc += w.left[m] * v[k] + w.right[m] * v[k + 1];
    }
    out.values[j] = scale * acc;
  }
  return out;
}

/// (D^alpha_- f) = -(d/ds) I^{1-alpha}_- f, differentiated by central
/// differences (second-order one-sided stencils at the ends).
inline SampledFunction rl_derivative(const SampledFunction& f, FracOrder order) {
  f.validate();
  const double alpha = order.alpha;
  detail::require_derivative_order(alpha);
  if (alpha == 0.0) return f;
  const SampledFunction g = rl_integral(f, FracOrder{1.0 - alpha});
  const std::size_t n = g.size();
  const double h = g.grid_step;
  SampledFunction out = g;
  const auto& y = g.values;
  if (n == 2) {
    out.values[0] = out.values[1] = -(y[1] - y[0]) / h;
    return out;
  }
  out.values[0] = -(-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h);
  for (std::size_t j = 1; j + 1 < n; ++j) out.values[j] = -(y[j + 1] - y[j - 1]) / (2.0 * h);
  out.values[n - 1] = -(3.0 * y[n - 1] - 4.0 * y[n - 2] + y[n - 3]) / (2.0 * h);
  return out;
}

/// Truncated Marchaud derivative
///   alpha / Gamma(1 - alpha) * int_eps^inf (f(s) - f(s + u)) u^{-alpha-1} du
/// evaluated exactly for the piecewise-linear interpolant.
inline SampledFunction marchaud_derivative(const SampledFunction& f, FracOrder order,
                                           double epsilon) {
  f.validate();
  const double alpha = order.alpha;
  detail::require(alpha > 0.0 && alpha < 1.0, "marchaud_derivative: alpha must lie in (0, 1)");
  detail::require(epsilon > 0.0 && std::isfinite(epsilon),
                  "marchaud_derivative: epsilon must be positive");
  using gl = boost::math::quadrature::gauss<double, 10>;
  const std::size_t n = f.size();
  const double h = f.grid_step;
  const auto& v = f.values;
  const double pref = alpha / std::tgamma(1.0 - alpha);

  SampledFunction out{f.grid_start, h, std::vector<double>(n, 0.0), f.support_end};
  // With eps below the step every cell past the own cell is grid aligned and
  // shares moment weights (exponent -alpha, cells m >= 1).
  const bool aligned = epsilon < h;
  const auto w = aligned ? detail::cell_moments(-alpha, n - 1) : detail::CellMoments{};
  const double h_pow = std::pow(h, -alpha);
  for (std::size_t j = 0; j < n; ++j) {
    double acc = 0.0;
    // own cell: f(s) - f(s + u) = -slope * u exactly
    if (j + 1 < n && aligned) {
      const double slope = (v[j + 1] - v[j]) / h;
      acc += -slope * (std::pow(h, 1.0 - alpha) - std::pow(epsilon, 1.0 - alpha)) / (1.0 - alpha);
    }
    const double r_start = (j + 1 < n) ? std::max(epsilon, h) : epsilon;
    acc += v[j] * std::pow(r_start, -alpha) / alpha;
    if (aligned) {
      double tail = 0.0;
      for (std::size_t k = j + 1; k + 1 < n; ++k) {
        const std::size_t m = k - j;
        tail += w.left[m] * v[k] + w.right[m] * v[k + 1];
      }
      acc -= h_pow * tail;
    } else {
      // cells of the interpolant to the right of s + eps
      for (std::size_t k = j; k + 1 < n; ++k) {
        const double r0 = std::max(static_cast<double>(k - j) * h, r_start);
        const double r1 = static_cast<double>(k - j + 1) * h;
        if (r1 <= r0) continue;
        const double base = static_cast<double>(k - j) * h;
        const double fk = v[k], slope = (v[k + 1] - v[k]) / h;
        if (fk == 0.0 && slope == 0.0) continue;
        acc -= gl::integrate(
            [&](double r) { return (fk + slope * (r - base)) * std::pow(r, -alpha - 1.0); }, r0,
            r1);
      }
    }
    out.values[j] = pref * acc;
  }
  return out;
}

/// eps -> 0 limit of the truncated Marchaud derivative by three-point
/// Richardson extrapolation over eps0, eps0/2, eps0/4 (error exponents
/// 1 - alpha and 2 - alpha).
inline SampledFunction marchaud_limit(const SampledFunction& f, FracOrder order, double eps0) {
  const double alpha = order.alpha;
  const SampledFunction d1 = marchaud_derivative(f, order, eps0);
  const SampledFunction d2 = marchaud_derivative(f, order, eps0 / 2.0);
  const SampledFunction d4 = marchaud_derivative(f, order, eps0 / 4.0);
  const double r1 = std::pow(2.0, 1.0 - alpha);
  const double r2 = std::pow(2.0, 2.0 - alpha);
  SampledFunction out = d1;
  for (std::size_t j = 0; j < out.size(); ++j) {
    const double a = (r1 * d2.values[j] - d1.values[j]) / (r1 - 1.0);
    const double b = (r1 * d4.values[j] - d2.values[j]) / (r1 - 1.0);
    out.values[j] = (r2 * b - a) / (r2 - 1.0);
  }
  return out;
}

/// Closed form of (I^{H-1/2}_- 1_{[0,t)})(s); for t < 0 the indicator is
/// read as -1_{[t,0)}.
inline double frac_integral_indicator(double H, double t, double s) {
  detail::require(H > 0.0 && H < 1.0, "frac_integral_indicator: H must lie in (0, 1)");
  detail::require(t != 0.0 && std::isfinite(t) && std::isfinite(s),
                  "frac_integral_indicator: t must be nonzero");
  const double beta = H - 0.5;
  auto power = [&](double x) {
    if (x < 0.0) return 0.0;
    if (x == 0.0) {
      if (beta < 0.0) throw DomainError("frac_integral_indicator: singular point");
      return 0.0;  // beta == 0 excludes the endpoint, beta > 0 vanishes there
    }
    return std::pow(x, beta);
  };
  return (power(t - s) - power(-s)) / std::tgamma(H + 0.5);
}

}  // namespace fbmrep
