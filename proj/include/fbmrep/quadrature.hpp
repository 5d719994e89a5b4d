#pragma once

// Thin wrappers over Boost.Math double-exponential quadrature. Integrators
// are expensive to construct, so one instance per thread is kept.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

namespace fbmrep::quad {

struct Result {
  double value = 0.0;
  double error = 0.0;
};

inline boost::math::quadrature::tanh_sinh<double>& tanh_sinh_instance() {
  thread_local boost::math::quadrature::tanh_sinh<double> integrator(15);
  return integrator;
}

inline boost::math::quadrature::exp_sinh<double>& exp_sinh_instance() {
  thread_local boost::math::quadrature::exp_sinh<double> integrator(12);
  return integrator;
}

/// Integral over the finite interval [a, b]; integrable endpoint
/// singularities are fine.
template <class F>
Result finite(F&& f, double a, double b, double tol) {
  if (!(b > a)) return {};
  // intervals at the resolution limit of a and b: one midpoint sample
  if (b - a <= 1024.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(a), std::abs(b))) {
    const double y = f(0.5 * (a + b));
    return {std::isfinite(y) ? y * (b - a) : 0.0, 0.0};
  }
  double err = 0.0;
  double l1 = 0.0;
  // The two-argument form maps abscissae as a + (b - a) * zc / 2; the
  // one-argument form in Boost 1.74 can round an abscissa onto an endpoint
  // when |a| or |b| is large.
  const double v = tanh_sinh_instance().integrate(
      [&](double x, double) {
        const double y = f(x);
        return std::isfinite(y) ? y : 0.0;
      },
      a, b, tol, &err, &l1);
  return {v, err};
}

/// Integral over [a, b] split at the interior points of `cuts`.
template <class F>
Result piecewise(F&& f, double a, double b, std::span<const double> cuts, double tol) {
  std::vector<double> nodes{a};
  for (double c : cuts)
    if (c > a && c < b) nodes.push_back(c);
  nodes.push_back(b);
  std::sort(nodes.begin(), nodes.end());
  Result total;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const Result r = finite(f, nodes[i], nodes[i + 1], tol);
    total.value += r.value;
    total.error += r.error;
  }
  return total;
}

/// Integral over [a, +inf).
template <class F>
Result to_infinity(F&& f, double a, double tol) {
  double err = 0.0;
  double l1 = 0.0;
  const double v = exp_sinh_instance().integrate(
      [&](double x) {
        const double y = f(x);
        return std::isfinite(y) ? y : 0.0;
      },
      a, std::numeric_limits<double>::infinity(), tol, &err, &l1);
  return {v, err};
}

/// Geometric split points a + d, a + 4d, a + 16d, ... below b. Used when an
/// integrand has a near-singularity at distance d to the left of a.
inline std::vector<double> geometric_cuts(double a, double b, double d) {
  std::vector<double> cuts;
  if (!(d > 0.0)) return cuts;
  for (double step = d; a + step < b; step *= 4.0) cuts.push_back(a + step);
  return cuts;
}

}  // namespace fbmrep::quad
