#pragma once

// Molchan-Golosov and Mandelbrot-Van Ness kernels, the time-shifted MG
// integrand, the kernel differences used to compare the two
// representations, auxiliary hypergeometric functions G0..G17 and the
// constants c1..c4 of the convergence bound.

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fbmrep/errors.hpp"
#include "fbmrep/special_functions.hpp"

namespace fbmrep {

struct KernelSpec {
  double K = 0.5;  // Hurst index of the driver
  double H = 0.5;  // Hurst index of the target
  double t = 1.0;
  std::optional<double> shift_s;

  double p() const { return H - K; }

  void validate() const {
    detail::require(K > 0.0 && K < 1.0, "KernelSpec: K must lie in (0, 1)");
    detail::require(H > 0.0 && H < 1.0, "KernelSpec: H must lie in (0, 1)");
    detail::require(std::isfinite(t), "KernelSpec: t must be finite");
    if (shift_s) detail::require(*shift_s > 0.0 && std::isfinite(*shift_s), "KernelSpec: shift must be positive");
  }

  double shift() const {
    detail::require(shift_s.has_value(), "KernelSpec: operation needs a shift s");
    return *shift_s;
  }
};

namespace detail {

// x^e for x > 0, 0 for x < 0. At x == 0 the value is 0 for e > 0, and a
// domain error for e < 0; e == 0 is treated as the indicator of x > 0.
inline double pos_power(double x, double e) {
  if (x < 0.0) return 0.0;
  if (x == 0.0) {
    if (e < 0.0) throw DomainError("kernel evaluated at a singular point");
    return 0.0;
  }
  return e == 0.0 ? 1.0 : std::pow(x, e);
}

// (t - v)^p 1{v < t} - (-v)^p 1{v < 0} without cancellation when both
// terms are present and |v| is large.
inline double power_difference(double p, double t, double v) {
  if (v < 0.0 && v < t && p != 0.0) {
    const double b = -v;
    return std::pow(b, p) * std::expm1(p * std::log1p(t / b));
  }
  return pos_power(t - v, p) - pos_power(-v, p);
}

}  // namespace detail

/// F^(z) = F(1 - K - H, H - K, 1 + H - K, z).
inline double fhat(const KernelSpec& k, double z) {
  return hyp2f1(1.0 - k.K - k.H, k.H - k.K, 1.0 + k.H - k.K, z);
}

/// F^(z) - 1, accurate for small |z|.
inline double fhat_minus_one(const KernelSpec& k, double z) {
  return hyp2f1_minus_one(1.0 - k.K - k.H, k.H - k.K, 1.0 + k.H - k.K, z);
}

/// C(K,H) (t-u)^{H-K} F^((u-t)/u), 0 < u < t.
inline double mg_kernel(const KernelSpec& k, double u) {
  k.validate();
  detail::require(k.t > 0.0 && u > 0.0 && u < k.t, "mg_kernel: requires 0 < u < t");
  if (k.K == k.H) return 1.0;
  return norm_CKH(k.K, k.H) * std::pow(k.t - u, k.p()) * fhat(k, (u - k.t) / u);
}

/// C(K,H) [(t-v)^{H-K} 1{v<t} - (-v)^{H-K} 1{v<0}].
inline double mvn_kernel(const KernelSpec& k, double v) {
  k.validate();
  if (k.K == k.H) return detail::pos_power(k.t - v, 0.0) - detail::pos_power(-v, 0.0);
  return norm_CKH(k.K, k.H) * detail::power_difference(k.p(), k.t, v);
}

enum class DeltaKind { f, g, h, k };

namespace detail {

// k^s_tau(v) = (tau - v)^p (F^((v - tau)/(v + s)) - 1) on (-s, tau); the
// limit 0 at v = tau is returned exactly.
inline double k_part(const KernelSpec& k, double tau, double s, double v) {
  if (!(v > -s && v < tau)) return 0.0;
  return std::pow(tau - v, k.p()) * fhat_minus_one(k, (v - tau) / (v + s));
}

inline double g_part(const KernelSpec& k, double tau, double s, double v) {
  if (!(v > -s && v < tau)) return 0.0;
  return std::pow(tau - v, k.p()) * fhat(k, (v - tau) / (v + s));
}

inline double h_part(const KernelSpec& k, double tau, double s, double v) {
  if (!(v > -s && v < tau)) return 0.0;
  return pos_power(tau - v, k.p());
}

}  // namespace detail

/// Kernel differences between the shifted MG integrand and the MVN
/// integrand (t > 0):
///   f: MVN integrand restricted to v < -s
///   g: shifted MG integrand on (-s, t)
///   h: MVN integrand restricted to (-s, t)
///   k: g - h
inline double delta_kernels(const KernelSpec& spec, DeltaKind which, double v) {
  spec.validate();
  const double s = spec.shift();
  const double t = spec.t;
  const double p = spec.p();
  switch (which) {
    case DeltaKind::f:
      return v < -s ? detail::power_difference(p, t, v) : 0.0;
    case DeltaKind::g:
      if (spec.K == spec.H) return detail::h_part(spec, t, s, v) - detail::h_part(spec, 0.0, s, v);
      return detail::g_part(spec, t, s, v) - detail::g_part(spec, 0.0, s, v);
    case DeltaKind::h:
      return detail::h_part(spec, t, s, v) - detail::h_part(spec, 0.0, s, v);
    case DeltaKind::k:
      if (spec.K == spec.H) return 0.0;
      return detail::k_part(spec, t, s, v) - detail::k_part(spec, 0.0, s, v);
  }
  throw std::logic_error("delta_kernels: unknown kind");
}

/// C(K,H) times the integrand of Z^{H,s}_t against B^K; zero outside (-s, t).
inline double shifted_mg_integrand(const KernelSpec& spec, double v) {
  spec.validate();
  const double s = spec.shift();
  if (!(v > -s && v < spec.t)) return 0.0;
  return norm_CKH(spec.K, spec.H) * delta_kernels(spec, DeltaKind::g, v);
}

// ---------------------------------------------------------------------------
// Auxiliary functions

struct AuxFunctionId {
  int index = 0;
};

/// G_i(z) for i in 0..17.
inline double aux_G(AuxFunctionId id, const KernelSpec& spec, double z) {
  spec.validate();
  const double K = spec.K, H = spec.H;
  auto F = [&](double a, double b, double c) { return hyp2f1(a, b, c, z); };
  auto power = [&](double e) {
    if (e == 0.0) return 1.0;
    detail::require(z >= 0.0, "aux_G: power prefactor needs z >= 0");
    return detail::pos_power(z, e);
  };
  switch (id.index) {
    case 0: {
      const double pw = power(K - H);
      return z == 0.0 ? pw : pw * F(K - H, K - 0.5, K + 0.5);
    }
    case 1: return F(K - H + 1.0, K - 0.5, K + 0.5);
    case 2: return F(2.0 - K - H, H - K + 1.0, 2.0 + H - K);
    case 3: return F(1.5 - K, H - K + 2.0, H - K + 3.0);
    case 4: {
      detail::require(z >= 0.0, "aux_G: G4 needs z >= 0");
      if (z == 0.0) return 0.0;  // F^(-z) - 1 = O(z) dominates z^{H-K}, H - K > -1
      return std::pow(z, H - K) * fhat_minus_one(spec, -z);
    }
    case 5: return F(1.5 - K, H - K, H - K + 1.0);
    case 6: return F(1.5 - K, H - K + 1.0, H - K + 2.0);
    case 7: return F(2.0 * (K - H + 1.0), 1.0, 2.0 * K + 1.0);
    case 8: return F(1.0 + K - H, K + 0.5, K + 1.5);
    case 9: return F(2.0 * (K + 1.0 - H), 1.0, 2.0 * K + 3.0);
    case 10: return F(2.0 + K - H, K + 0.5, K + 1.5);
    case 11: return F(2.0 * (K + 2.0 - H), 1.0, 2.0 * K + 3.0);
    case 12: {
      if (K == H) return 1.0;
      const double pw = power(H - K);
      if (z == 0.0) return pw;
      return pw * F(2.0 * H, H - K, H - K + 1.0);
    }
    case 13: return F(1.5 - K, 1.0, 3.0 - K - H);
    case 14: return F(H + K - 1.0, 1.0, K + 0.5);
    case 15: return F(K + H, 1.0, K + 1.5);
    case 16: return F(K + H - 1.0, 1.0, K + 1.5);
    case 17: return F(1.5 - K, 1.0, 2.0);
    default: throw DomainError("aux_G: index must lie in 0..17");
  }
}

enum class StarInterval { star_left, star_right };  // [-1, 0] and [0, 1]

struct AuxMax {
  double value = 0.0;
  double argmax = 0.0;
  bool truncated = false;  // an endpoint was divergent and moved inward by 1e-6
};

/// max |G_i| over [-1, 0] or [0, 1]: 2^12 uniform samples, then
/// golden-section refinement around the best sample.
inline AuxMax aux_G_max(AuxFunctionId id, const KernelSpec& spec, StarInterval interval) {
  constexpr double kDelta = 1e-6;
  constexpr int kSamples = 4096;
  double lo = interval == StarInterval::star_left ? -1.0 : 0.0;
  double hi = interval == StarInterval::star_left ? 0.0 : 1.0;
  bool truncated = false;

  auto eval = [&](double z) { return std::abs(aux_G(id, spec, z)); };
  auto finite_at = [&](double z) {
    try {
      return std::isfinite(eval(z));
    } catch (const DomainError&) {
      return false;
    }
  };
  if (!finite_at(lo)) {
    lo += kDelta;
    truncated = true;
  }
  if (!finite_at(hi)) {
    hi -= kDelta;
    truncated = true;
  }

  std::vector<double> zs(kSamples + 1), gs(kSamples + 1);
  std::size_t best = 0;
  for (int i = 0; i <= kSamples; ++i) {
    zs[i] = i == kSamples ? hi : lo + (hi - lo) * i / kSamples;
    gs[i] = eval(zs[i]);
    if (gs[i] > gs[best]) best = static_cast<std::size_t>(i);
  }
  AuxMax out{gs[best], zs[best], truncated};
  if (best == 0 || best == static_cast<std::size_t>(kSamples)) return out;

  // golden-section search for the maximum inside the bracketing cells
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = zs[best - 1], b = zs[best + 1];
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = eval(x1), f2 = eval(x2);
  for (int it = 0; it < 80 && b - a > 1e-15; ++it) {
    if (f1 > f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = eval(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = eval(x2);
    }
  }
  const double xm = 0.5 * (a + b);
  const double fm = eval(xm);
  if (fm > out.value) out = {fm, xm, truncated};
  return out;
}

// ---------------------------------------------------------------------------
// Bound constants

struct BoundConstants {
  double c1 = 0.0;
  std::optional<double> c2, c3, c4;
  double d = 1.0;
  double valid_from_s = 0.0;
  bool truncated = false;  // some G-maximum was taken on a truncated interval
};

/// The constants c1..c4 of the rate bound (t > 0).
inline BoundConstants bound_constants(const KernelSpec& spec, double d) {
  spec.validate();
  detail::require(d > 0.0 && std::isfinite(d), "bound_constants: d must be positive");
  detail::require(spec.t > 0.0, "bound_constants: requires t > 0");
  const double K = spec.K, H = spec.H, t = spec.t;
  BoundConstants out;
  out.d = d;
  out.valid_from_s = 2.0 * t + 4.0 * d + 1.0;
  if (K == H) {
    out.c2 = 0.0;
    if (K < 0.5) {
      out.c2.reset();
      out.c3 = 0.0;
      out.c4 = 0.0;
    }
    return out;
  }

  auto right = [&](int i) {
    const AuxMax m = aux_G_max(AuxFunctionId{i}, spec, StarInterval::star_right);
    out.truncated = out.truncated || m.truncated;
    return m.value;
  };
  auto left = [&](int i) {
    const AuxMax m = aux_G_max(AuxFunctionId{i}, spec, StarInterval::star_left);
    out.truncated = out.truncated || m.truncated;
    return m.value;
  };
  auto sq = [](double x) { return x * x; };
  const double g = std::tgamma(K + 0.5);
  const double td = t + d;
  const double t2 = t * t;

  const double G1 = right(1);
  out.c1 = sq((K - H) / g) * sq(G1) * 4.0 * std::tgamma(2.0 * K) * std::tgamma(2.0 - 2.0 * H) /
           std::tgamma(2.0 * K - 2.0 * H + 2.0) * t2;

  const double sG2 = left(2);
  if (K == 0.5) {
    out.c2 = 2.0 * sq(sG2) * std::pow(td, 2.0 * H + 2.0) +
             (sq(td) / (4.0 * H * d * d) + 2.0 / (1.0 - H) + 2.0) * t2;
    return out;
  }

  const double gm = std::tgamma(K - 0.5);
  const double G3 = right(3), G5 = right(5), G6 = right(6), G13 = right(13), G17 = right(17);
  const double gHK = std::tgamma(H - K + 1.0), gH32 = std::tgamma(H + 1.5);
  if (K > 0.5) {
    const double G7 = right(7), G14 = right(14);
    const double lead = 20.0 * sq(sG2) * sq(G3) / (sq(gm) * sq(1.0 + H - K) * (1.0 - K)) +
                        20.0 * sq(sG2) * sq(gHK) / sq(gH32);
    const double mid =
        (std::max(160.0 * sq(G5), 10.0 * sq(G6) * sq(td) / (sq(H - K + 1.0) * d * d)) +
         10.0 * sq(G17) + 10.0 * sq(G13) / sq(2.0 - K - H)) /
            ((1.0 - K) * sq(gm)) +
        (10.0 * sq(G14) + 40.0 * sq(G1) * G7 + 10.0) / (K * sq(g));
    out.c2 = lead * std::pow(td, 2.0 * H + 2.0) + mid * t2;
    return out;
  }

  const double G8 = right(8), G9 = right(9), G10 = right(10), G11 = right(11), G15 = right(15),
               G16 = right(16);
  const double lead = 24.0 * sq(sG2) * sq(G3) / (sq(gm) * sq(1.0 + H - K) * (1.0 - K)) +
                      816.0 * sq(sG2) * sq(gHK) / (sq(1.0 + H - K) * sq(gH32));
  const double mid =
      (std::max(192.0 * sq(G5), 12.0 * sq(G6) * sq(td) / (sq(H - K + 1.0) * d * d)) +
       12.0 * sq(G13) / sq(2.0 - H - K) + 12.0 * sq(G17)) /
      (sq(gm) * (1.0 - K));
  const double tail = (408.0 * sq(G8) * G9 + 3072.0 * sq(G10) * G11 + 378.0 * sq(G15) +
                       24.0 * sq(G16) + 48.0) /
                      sq(std::tgamma(K + 1.5));
  out.c3 = lead * std::pow(td, 2.0 * H + 2.0) + mid * t2 + 48.0 / (K * sq(g)) * t2 + tail * t2;
  out.c4 = 12.0 * std::pow(d, 2.0 * (H - K - 1.0)) * sq(td) / (sq(g) * K) * t2;
  return out;
}

}  // namespace fbmrep
