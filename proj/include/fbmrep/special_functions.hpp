#pragma once

// Gamma/beta wrappers, the Gauss hypergeometric function 2F1 on (-inf, 1],
// and the normalizing constants of the fBm integral transforms.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

#include <boost/math/special_functions/digamma.hpp>

#include "fbmrep/errors.hpp"

namespace fbmrep {

/// Parameters (a, b, c) and argument z of F(a, b, c, z).
struct HypParams {
  double a = 0.0;
  double b = 0.0;
  double c = 1.0;
  double z = 0.0;
};

struct EvalOptions {
  double rel_tol = 1e-12;
  int max_terms = 10000;
};

namespace detail {

inline constexpr double kIntegerTol = 1e-12;

inline bool is_nonpositive_integer(double x, double tol = kIntegerTol) {
  return x <= tol && std::abs(x - std::round(x)) <= tol;
}

/// 1/Gamma(x); exactly zero at the poles.
inline double rgamma(double x) {
  if (is_nonpositive_integer(x, 0.0)) return 0.0;
  return 1.0 / std::tgamma(x);
}

inline void validate(const EvalOptions& opts) {
  require(opts.rel_tol > 0.0, "EvalOptions: rel_tol must be positive");
  require(opts.max_terms >= 1, "EvalOptions: max_terms must be >= 1");
}

// Snap parameters that are within rounding noise of a non-positive integer,
// so that terminating series terminate.
inline double snap(double x) {
  return is_nonpositive_integer(x) ? std::round(x) : x;
}

/// Partial sums of sum_k (a)_k (b)_k / (c)_k z^k / k!, starting at k = 0
/// (or at k = 1 when `skip_first` is set, which returns F - 1).
inline double hyp_series(double a, double b, double c, double z, const EvalOptions& opts,
                         bool skip_first = false) {
  double term = 1.0;
  double sum = skip_first ? 0.0 : 1.0;
  const double tail_scale = std::abs(z) < 1.0 ? 0.1 * (1.0 - std::abs(z)) : 0.1;
  int quiet = 0;
  for (int k = 0; k < opts.max_terms; ++k) {
    term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z;
    sum += term;
    if (term == 0.0) return sum;
    // the neglected tail is roughly term / (1 - |z|)
    if (std::abs(term) <= tail_scale * opts.rel_tol * std::abs(sum)) {
      // three consecutive small terms guard against early stops on alternating series
      if (++quiet == 3) return sum;
    } else {
      quiet = 0;
    }
  }
  throw ConvergenceError("hyp2f1: power series did not converge",
                         std::abs(term) / std::max(std::abs(sum), 1e-300));
}

// Argument in [0, 0.75] is summed directly; closer to 1 the connection
// formulas in 1 - x are used.
inline constexpr double kDirectSeriesLimit = 0.75;
inline constexpr double kDegenerateTol = 1e-8;

// F(a, b; a + b + m; x) for integer m >= 0 (logarithmic case of the 1 - x
// connection formula). `c` is the caller's third parameter, equal to
// a + b + m up to kDegenerateTol.
inline double hyp_log_case(double a, double b, double c, int m, double y,
                           const EvalOptions& opts) {
  double finite = 0.0;
  if (m > 0) {
    double term = 1.0;
    double acc = 1.0;
    for (int n = 1; n < m; ++n) {
      term *= (a + n - 1) * (b + n - 1) / (n * (n - m)) * y;
      acc += term;
    }
    finite = std::tgamma(static_cast<double>(m)) * std::tgamma(c) * rgamma(a + m) *
             rgamma(b + m) * acc;
  }

  const double prefactor = std::tgamma(c) * rgamma(a) * rgamma(b);
  if (prefactor == 0.0) return finite;

  using boost::math::digamma;
  const double log_y = std::log(y);
  double psi_n1 = digamma(1.0);                       // psi(n + 1)
  double psi_nm1 = digamma(static_cast<double>(m + 1));  // psi(n + m + 1)
  double psi_a = digamma(a + m);                      // psi(a + n + m)
  double psi_b = digamma(b + m);                      // psi(b + n + m)
  double coeff = 1.0;
  for (int k = 1; k <= m; ++k) coeff /= k;            // 1 / m!
  double sum = 0.0;
  const double tail_scale = 0.1 * std::min(1.0, 1.0 - y);
  int quiet = 0;
  for (int n = 0; n < opts.max_terms; ++n) {
    const double term = coeff * (log_y - psi_n1 - psi_nm1 + psi_a + psi_b);
    sum += term;
    if (std::abs(term) <= tail_scale * opts.rel_tol * std::abs(sum)) {
      if (++quiet == 3) {
        const double sign = (m % 2 == 0) ? 1.0 : -1.0;
        return finite - sign * std::pow(y, m) * prefactor * sum;
      }
    } else {
      quiet = 0;
    }
    coeff *= (a + m + n) * (b + m + n) / ((n + 1.0) * (n + m + 1.0)) * y;
    psi_n1 += 1.0 / (n + 1.0);
    psi_nm1 += 1.0 / (n + m + 1.0);
    psi_a += 1.0 / (a + m + n);
    psi_b += 1.0 / (b + m + n);
  }
  throw ConvergenceError("hyp2f1: logarithmic connection series did not converge", 1.0);
}

/// F(a, b, c, x) for x in [0, 1). `y` is 1 - x, passed separately so callers
/// that know it exactly avoid the cancellation near x = 1.
inline double hyp_unit(double a, double b, double c, double x, double y,
                       const EvalOptions& opts) {
  a = snap(a);
  b = snap(b);
  if (a == 0.0 || b == 0.0 || x == 0.0) return 1.0;
  const bool terminating = is_nonpositive_integer(a, 0.0) || is_nonpositive_integer(b, 0.0);
  const double s = c - a - b;
  const double m = std::round(s);
  const double gap = std::abs(s - m);
  double limit = kDirectSeriesLimit;
  if (gap >= kDegenerateTol && gap < 1e-4) limit = 0.97;  // near-degenerate band
  if (terminating || x <= limit) return hyp_series(a, b, c, x, opts);

  if (s < 0.0 && gap >= kDegenerateTol) {
    // Euler transformation moves c - a - b to the positive side
    return std::pow(y, s) * hyp_unit(c - a, c - b, c, x, y, opts);
  }
  if (gap < kDegenerateTol) {
    if (m < 0.0) return std::pow(y, s) * hyp_unit(c - a, c - b, c, x, y, opts);
    return hyp_log_case(a, b, c, static_cast<int>(m), y, opts);
  }
  const double gc = std::tgamma(c);
  const double first = gc * std::tgamma(s) * rgamma(c - a) * rgamma(c - b);
  const double second = gc * std::tgamma(-s) * rgamma(a) * rgamma(b);
  double value = 0.0;
  if (first != 0.0) value += first * hyp_series(a, b, 1.0 - s, y, opts);
  if (second != 0.0) value += second * std::pow(y, s) * hyp_series(c - a, c - b, 1.0 + s, y, opts);
  return value;
}

inline void validate_c(double c) {
  require(std::isfinite(c), "hyp2f1: non-finite parameter c");
  if (is_nonpositive_integer(c)) throw DomainError("hyp2f1: c must not be a non-positive integer");
}

}  // namespace detail

/// Gamma function. Throws DomainError at the poles 0, -1, -2, ...
inline double gamma_fn(double x) {
  if (!std::isfinite(x) || detail::is_nonpositive_integer(x, 0.0))
    throw DomainError("gamma_fn: pole at non-positive integer");
  return std::tgamma(x);
}

inline double beta_fn(double x, double y) {
  return gamma_fn(x) * gamma_fn(y) / gamma_fn(x + y);
}

/// Gauss value F(a, b, c, 1) = Gamma(c) Gamma(c-a-b) / (Gamma(c-a) Gamma(c-b)).
/// Requires c and c - a - b away from the non-positive integers.
inline double hyp2f1_at_one(double a, double b, double c) {
  detail::validate_c(c);
  const double s = c - a - b;
  if (detail::is_nonpositive_integer(s))
    throw DomainError("hyp2f1_at_one: c - a - b must not be a non-positive integer");
  return gamma_fn(c) * gamma_fn(s) * detail::rgamma(c - a) * detail::rgamma(c - b);
}

/// F(a, b, c, z) for z in (-inf, 1].
///
/// Parameters are canonicalized so that a <= b, which makes the function
/// exactly symmetric in (a, b). Negative arguments are mapped into [0, 1)
/// with F(a,b,c,z) = (1-z)^{-a} F(a, c-b, c, z/(z-1)); arguments in [0, 1)
/// are summed directly up to 0.75 and through the 1 - z connection formulas
/// above that (including the logarithmic cases c - a - b in Z). At z = 1
/// the Gauss value is returned, which needs c - a - b > 0.
inline double hyp2f1(HypParams p, const EvalOptions& opts = {}) {
  detail::validate(opts);
  if (!std::isfinite(p.a) || !std::isfinite(p.b) || !std::isfinite(p.z) || std::isnan(p.z))
    throw DomainError("hyp2f1: non-finite argument");
  detail::validate_c(p.c);
  if (p.z > 1.0) throw DomainError("hyp2f1: argument must satisfy z <= 1");
  if (p.a > p.b) std::swap(p.a, p.b);
  const double a = detail::snap(p.a);
  const double b = detail::snap(p.b);
  const double c = p.c;
  const double z = p.z;
  if (a == 0.0 || b == 0.0 || z == 0.0) return 1.0;
  if (z == 1.0) {
    if (!(c - a - b > 0.0))
      throw DomainError("hyp2f1: z = 1 requires c - a - b > 0");
    return hyp2f1_at_one(a, b, c);
  }
  if (z > 0.0) return detail::hyp_unit(a, b, c, z, 1.0 - z, opts);
  if (detail::is_nonpositive_integer(a, 0.0) || detail::is_nonpositive_integer(b, 0.0))
    return detail::hyp_series(a, b, c, z, opts);
  const double w = z / (z - 1.0);
  return std::pow(1.0 - z, -a) * detail::hyp_unit(a, c - b, c, w, 1.0 / (1.0 - z), opts);
}

inline double hyp2f1(double a, double b, double c, double z, const EvalOptions& opts = {}) {
  return hyp2f1(HypParams{a, b, c, z}, opts);
}

/// Plain power series, no transformations; |z| < 1 only. Exposed for
/// cross-checks of the transformation route.
inline double hyp2f1_series(double a, double b, double c, double z, const EvalOptions& opts = {}) {
  detail::validate(opts);
  detail::validate_c(c);
  if (!(std::abs(z) < 1.0)) throw DomainError("hyp2f1_series: requires |z| < 1");
  return detail::hyp_series(detail::snap(a), detail::snap(b), c, z, opts);
}

/// F(a, b, c, z) - 1, accurate in the relative sense for small |z|.
inline double hyp2f1_minus_one(double a, double b, double c, double z,
                               const EvalOptions& opts = {}) {
  detail::validate(opts);
  detail::validate_c(c);
  if (std::abs(z) <= 0.5) return detail::hyp_series(detail::snap(a), detail::snap(b), c, z, opts, true);
  return hyp2f1(a, b, c, z, opts) - 1.0;
}

/// d/dz F(a, b, c, z) = ab/c F(a+1, b+1, c+1, z).
inline double hyp2f1_dz(HypParams p, const EvalOptions& opts = {}) {
  detail::validate_c(p.c);
  const double ab = detail::snap(p.a) * detail::snap(p.b);
  if (ab == 0.0) return 0.0;
  return ab / p.c * hyp2f1(HypParams{p.a + 1.0, p.b + 1.0, p.c + 1.0, p.z}, opts);
}

enum class WeightGeometry { w_below, w_above };

/// Both closed forms of int_x^y (y-u)^b |u-w|^c (u-x)^a du.
/// w_below: w < x < y, weight (u-w)^c. w_above: x < y < w, weight (w-u)^c.
inline std::pair<double, double> power_weighted_integral_forms(double a, double b, double c,
                                                               double w, double x, double y,
                                                               WeightGeometry geometry,
                                                               const EvalOptions& opts = {}) {
  detail::require(a > -1.0 && b > -1.0, "power_weighted_integral: a, b must exceed -1");
  detail::require(x < y, "power_weighted_integral: requires x < y");
  if (geometry == WeightGeometry::w_below)
    detail::require(w < x, "power_weighted_integral: w_below requires w < x < y");
  else
    detail::require(y < w, "power_weighted_integral: w_above requires x < y < w");
  const double lead = std::exp(std::lgamma(a + 1.0) + std::lgamma(b + 1.0) - std::lgamma(a + 2.0 + b)) *
                      std::pow(y - x, 1.0 + a + b);
  const double z1 = (y - x) / (w - x);
  const double z2 = (y - x) / (y - w);
  const double first = lead * std::pow(std::abs(x - w), c) * hyp2f1(-c, a + 1.0, a + 2.0 + b, z1, opts);
  const double second = lead * std::pow(std::abs(y - w), c) * hyp2f1(-c, b + 1.0, a + 2.0 + b, z2, opts);
  return {first, second};
}

inline double power_weighted_integral(double a, double b, double c, double w, double x, double y,
                                      WeightGeometry geometry, const EvalOptions& opts = {}) {
  const auto [first, second] = power_weighted_integral_forms(a, b, c, w, x, y, geometry, opts);
  // use the form whose argument lies in [0, 1): the series side needs no transformation
  return geometry == WeightGeometry::w_below ? second : first;
}

/// Left-hand side of the three-term relation
///   -c F(a,b-1,c,z) + (c-b+zb-za) F(a,b,c+1,z) + b(1-z) F(a,b+1,c+1,z) = 0.
inline double contiguity_residual(double a, double b, double c, double z,
                                  const EvalOptions& opts = {}) {
  detail::require(z < 1.0, "contiguity_residual: requires z < 1");
  return -c * hyp2f1(a, b - 1.0, c, z, opts) +
         (c - b + z * b - z * a) * hyp2f1(a, b, c + 1.0, z, opts) +
         b * (1.0 - z) * hyp2f1(a, b + 1.0, c + 1.0, z, opts);
}

namespace detail {
inline void require_hurst(double h, const char* msg) {
  require(h > 0.0 && h < 1.0, msg);
}
}  // namespace detail

/// C(H) = (2H Gamma(H+1/2) Gamma(3/2-H) / Gamma(2-2H))^{1/2}.
inline double norm_C(double hurst) {
  detail::require_hurst(hurst, "norm_C: Hurst index must lie in (0, 1)");
  return std::sqrt(2.0 * hurst * gamma_fn(hurst + 0.5) * gamma_fn(1.5 - hurst) /
                   gamma_fn(2.0 - 2.0 * hurst));
}

/// C(K, H) = C(H) / (C(K) Gamma(H - K + 1)).
inline double norm_CKH(double k, double h) {
  detail::require_hurst(k, "norm_CKH: K must lie in (0, 1)");
  detail::require_hurst(h, "norm_CKH: H must lie in (0, 1)");
  if (k == h) return 1.0;
  return norm_C(h) / norm_C(k) / gamma_fn(h - k + 1.0);
}

}  // namespace fbmrep
