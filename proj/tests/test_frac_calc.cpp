#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "fbmrep/frac_calc.hpp"

using namespace fbmrep;

namespace {

// C^1 bump supported on [-1, 1].
double bump(double x) {
  if (std::abs(x) >= 1.0) return 0.0;
  const double q = 1.0 - x * x;
  return q * q;
}

// Smoother bump for the derivative checks.
double bump3(double x) {
  if (std::abs(x) >= 1.0) return 0.0;
  const double q = 1.0 - x * x;
  return q * q * q * q;
}

SampledFunction sample_bump(double (*fn)(double), double start, double end, double h) {
  const auto n = static_cast<std::size_t>(std::llround((end - start) / h)) + 1;
  return SampledFunction::sample(fn, start, h, n, 1.0);
}

// Value of a sampled function at the coarse-grid point x (x must be a grid point).
double at(const SampledFunction& f, double x) {
  const auto j = static_cast<std::size_t>(std::llround((x - f.grid_start) / f.grid_step));
  return f.values.at(j);
}

double max_diff_on(const SampledFunction& a, const SampledFunction& b, double lo, double hi,
                   double stride) {
  double m = 0.0;
  for (double x = lo; x <= hi + 1e-12; x += stride) m = std::max(m, std::abs(at(a, x) - at(b, x)));
  return m;
}

// Indicator of [0, t) sampled with the midpoint value 1/2 at the jumps.
SampledFunction sample_indicator(double t, double start, double end, double h, bool midpoint) {
  const auto n = static_cast<std::size_t>(std::llround((end - start) / h)) + 1;
  SampledFunction f{start, h, std::vector<double>(n, 0.0), t};
  for (std::size_t j = 0; j < n; ++j) {
    const double x = f.point(j);
    const bool at_zero = std::abs(x) < 0.5 * h, at_t = std::abs(x - t) < 0.5 * h;
    if (midpoint && (at_zero || at_t))
      f.values[j] = 0.5;
    else if (x > 0.5 * h && x < t - 0.5 * h)
      f.values[j] = 1.0;
    else if (at_zero)
      f.values[j] = 1.0;
  }
  return f;
}

}  // namespace

TEST(SampledFunction, Validation) {
  EXPECT_THROW((SampledFunction{0.0, 0.1, {1.0}, 0.0}.validate()), DomainError);
  EXPECT_THROW((SampledFunction{0.0, 0.0, {1.0, 2.0}, 1.0}.validate()), DomainError);
  EXPECT_THROW((SampledFunction{0.0, 0.5, {1.0, 2.0, 3.0}, 0.5}.validate()), DomainError);
  EXPECT_NO_THROW((SampledFunction{0.0, 0.5, {1.0, 2.0, 0.0}, 0.5}.validate()));
}

TEST(RlIntegral, OrderOneIsPlainIntegral) {
  const double h = 1e-3;
  const auto f = sample_indicator(1.0, -0.5, 1.5, h, false);
  const auto g = rl_integral(f, FracOrder{1.0});
  for (double s : {-0.3, 0.0, 0.25, 0.5, 0.9, 1.2})
    EXPECT_NEAR(at(g, s), std::clamp(1.0 - std::max(s, 0.0), 0.0, 1.0), 2 * h) << s;
}

TEST(RlIntegral, IndicatorMatchesClosedForm) {
  // alpha = 0.25 corresponds to H = 0.75
  const double h = 1e-3;
  const auto f = sample_indicator(1.0, -2.0, 1.5, h, true);
  const auto g = rl_integral(f, FracOrder{0.25});
  for (double s : {-1.5, -1.0, -0.5, -0.1, 0.1, 0.5, 0.9})
    EXPECT_NEAR(at(g, s), frac_integral_indicator(0.75, 1.0, s), 1e-4) << s;
}

TEST(RlIntegral, IndicatorConvergenceRate) {
  // Plain sampling (no midpoint correction) converges at first order away
  // from the jumps; required rate is h^{min(1, H + 1/2)}.
  for (double H : {0.6, 0.75, 0.9}) {
    std::vector<double> err;
    for (double h : {4e-3, 2e-3, 1e-3}) {
      const auto g = rl_integral(sample_indicator(1.0, -1.0, 1.5, h, false), FracOrder{H - 0.5});
      double e = 0.0;
      for (double s : {-0.6, -0.3, 0.2, 0.5, 0.8})
        e = std::max(e, std::abs(at(g, s) - frac_integral_indicator(H, 1.0, s)));
      err.push_back(e);
    }
    const double want = std::min(1.0, H + 0.5);
    EXPECT_GE(std::log2(err[0] / err[1]), want - 0.05) << H;
    EXPECT_GE(std::log2(err[1] / err[2]), want - 0.05) << H;
  }
}

TEST(RlIntegral, MatchesAdaptiveQuadratureOnSmoothFunction) {
  boost::math::quadrature::tanh_sinh<double> ts;
  const auto f = sample_bump(bump3, -2.0, 1.0, 1e-3);
  for (double alpha : {0.2, 0.5, 0.8}) {
    const auto g = rl_integral(f, FracOrder{alpha});
    for (double s : {-1.5, -0.7, 0.0, 0.4}) {
      const double want =
          ts.integrate([&](double u) { return bump3(s + u) * std::pow(u, alpha - 1.0); }, 0.0,
                       1.0 - s) /
          std::tgamma(alpha);
      EXPECT_NEAR(at(g, s), want, 1e-5) << alpha << " " << s;
    }
  }
}

TEST(RlIntegral, SemigroupUnderRefinement) {
  const double pairs[][2] = {{0.3, 0.4}, {0.5, 0.5}};
  for (const auto& p : pairs) {
    std::vector<double> err;
    for (double h : {8e-3, 4e-3, 2e-3}) {
      const auto f = sample_bump(bump, -2.0, 1.0, h);
      const auto lhs = rl_integral(rl_integral(f, FracOrder{p[1]}), FracOrder{p[0]});
      const auto rhs = rl_integral(f, FracOrder{p[0] + p[1]});
      err.push_back(max_diff_on(lhs, rhs, -2.0, 1.0, 0.04));
    }
    EXPECT_LT(err[2], err[0]);
    EXPECT_GE(std::log2(err[0] / err[1]), 1.0) << p[0] << "," << p[1];
    EXPECT_GE(std::log2(err[1] / err[2]), 1.0) << p[0] << "," << p[1];
  }
}

TEST(RlIntegral, Linearity) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::size_t n = 300;
  SampledFunction f{-1.0, 0.01, std::vector<double>(n), 2.0}, g = f, combo = f;
  for (std::size_t j = 0; j < n; ++j) {
    f.values[j] = u(rng);
    g.values[j] = u(rng);
  }
  const double a = u(rng), b = u(rng);
  for (std::size_t j = 0; j < n; ++j) combo.values[j] = a * f.values[j] + b * g.values[j];
  for (double alpha : {0.3, 1.0}) {
    const auto lf = rl_integral(f, FracOrder{alpha}), lg = rl_integral(g, FracOrder{alpha});
    const auto lc = rl_integral(combo, FracOrder{alpha});
    for (std::size_t j = 0; j < n; ++j)
      EXPECT_NEAR(lc.values[j], a * lf.values[j] + b * lg.values[j], 1e-13);
  }
  const auto mf = marchaud_derivative(f, FracOrder{0.4}, 1e-3);
  const auto mg = marchaud_derivative(g, FracOrder{0.4}, 1e-3);
  const auto mc = marchaud_derivative(combo, FracOrder{0.4}, 1e-3);
  for (std::size_t j = 0; j < n; ++j)
    EXPECT_NEAR(mc.values[j], a * mf.values[j] + b * mg.values[j], 1e-10);
}

TEST(RlIntegral, RejectsBadOrder) {
  const auto f = sample_bump(bump, -1.0, 1.0, 0.1);
  EXPECT_THROW(rl_integral(f, FracOrder{0.0}), DomainError);
  EXPECT_THROW(rl_integral(f, FracOrder{1.2}), DomainError);
  EXPECT_THROW(rl_derivative(f, FracOrder{1.0}), DomainError);
  EXPECT_THROW(rl_derivative(f, FracOrder{-0.1}), DomainError);
}

TEST(RlDerivative, OrderZeroIsIdentity) {
  const auto f = sample_bump(bump3, -1.5, 1.0, 1e-3);
  EXPECT_EQ(rl_derivative(f, FracOrder{0.0}).values, f.values);
  const auto d = rl_derivative(f, FracOrder{1e-6});
  for (double x : {-0.8, -0.3, 0.0, 0.5}) EXPECT_NEAR(at(d, x), bump3(x), 1e-3) << x;
}

TEST(RlDerivative, InvertsIntegralOfSameOrder) {
  const auto f = sample_bump(bump3, -2.0, 1.0, 1e-3);
  const auto d = rl_derivative(rl_integral(f, FracOrder{0.3}), FracOrder{0.3});
  for (double x : {-1.5, -0.8, -0.3, 0.0, 0.5, 0.9}) EXPECT_NEAR(at(d, x), bump3(x), 2e-3) << x;
}

TEST(RlDerivative, CompositionLaw) {
  // D^a I^b f = I^{b-a} f, including b = 1
  const double pairs[][2] = {{0.2, 0.5}, {0.3, 0.7}, {0.5, 1.0}};
  for (const auto& p : pairs) {
    std::vector<double> err;
    for (double h : {8e-3, 4e-3, 2e-3}) {
      const auto f = sample_bump(bump, -2.0, 1.0, h);
      const auto lhs = rl_derivative(rl_integral(f, FracOrder{p[1]}), FracOrder{p[0]});
      const auto rhs = rl_integral(f, FracOrder{p[1] - p[0]});
      err.push_back(max_diff_on(lhs, rhs, -1.8, 0.96, 0.04));
    }
    EXPECT_LT(err[2], 5e-3) << p[0] << "," << p[1];
    EXPECT_GE(std::log2(err[0] / err[1]), 1.0) << p[0] << "," << p[1];
    EXPECT_GE(std::log2(err[1] / err[2]), 1.0) << p[0] << "," << p[1];
  }
}

TEST(Marchaud, ConstantOnlySeesSupportBoundary) {
  const std::size_t n = 101;
  const double c = 2.5, alpha = 0.35;
  SampledFunction f{0.0, 0.01, std::vector<double>(n, c), 1.0};
  for (double eps : {1e-4, 3e-3, 0.05}) {
    const auto d = marchaud_derivative(f, FracOrder{alpha}, eps);
    for (std::size_t j = 0; j + 1 < n; ++j) {
      const double dist = f.grid_end() - f.point(j);
      if (dist <= eps) continue;
      EXPECT_NEAR(d.values[j], c * std::pow(dist, -alpha) / std::tgamma(1.0 - alpha),
                  1e-10 * std::abs(d.values[j]) + 1e-12)
          << eps << " " << j;
    }
  }
}

TEST(Marchaud, AgreesWithRiemannLiouvilleDerivative) {
  const auto f = sample_bump(bump3, -2.0, 1.0, 1e-3);
  for (double alpha : {0.2, 0.5, 0.8}) {
    const auto m = marchaud_limit(f, FracOrder{alpha}, 1e-4);
    const auto d = rl_derivative(f, FracOrder{alpha});
    for (double x : {-1.5, -0.7, 0.0, 0.3, 0.8}) EXPECT_NEAR(at(m, x), at(d, x), 2e-3) << alpha;
  }
}

TEST(Marchaud, InvertsHalfIntegral) {
  const auto g = sample_bump(bump3, -2.0, 1.0, 1e-3);
  const auto f = rl_integral(g, FracOrder{0.5});
  const auto m = marchaud_limit(f, FracOrder{0.5}, 1e-4);
  for (double x : {-1.5, -0.7, 0.0, 0.3, 0.8}) EXPECT_NEAR(at(m, x), bump3(x), 2e-3) << x;
}

TEST(Marchaud, RichardsonRemovesTruncation) {
  const auto f = sample_bump(bump3, -2.0, 1.0, 1e-2);
  const auto lim = marchaud_limit(f, FracOrder{0.4}, 0.08);
  const auto fine = marchaud_limit(f, FracOrder{0.4}, 1e-3);
  for (double x : {-1.0, -0.5, 0.2}) EXPECT_NEAR(at(lim, x), at(fine, x), 1e-3) << x;
}

TEST(Marchaud, RejectsBadArguments) {
  const auto f = sample_bump(bump, -1.0, 1.0, 0.1);
  EXPECT_THROW(marchaud_derivative(f, FracOrder{0.4}, 0.0), DomainError);
  EXPECT_THROW(marchaud_derivative(f, FracOrder{0.4}, -1.0), DomainError);
  EXPECT_THROW(marchaud_derivative(f, FracOrder{0.0}, 0.1), DomainError);
}

TEST(FracIntegralIndicator, Examples) {
  for (double s : {-2.0, -0.1, 0.0, 0.3, 0.99, 1.0, 1.5})
    EXPECT_EQ(frac_integral_indicator(0.5, 1.0, s), (s >= 0.0 && s < 1.0) ? 1.0 : 0.0) << s;
  EXPECT_NEAR(frac_integral_indicator(0.75, 1.0, 0.5), std::pow(0.5, 0.25) / std::tgamma(1.25),
              1e-15);
  EXPECT_NEAR(frac_integral_indicator(0.75, 1.0, -1.0),
              (std::pow(2.0, 0.25) - 1.0) / std::tgamma(1.25), 1e-15);
}

TEST(FracIntegralIndicator, MatchesQuadrature) {
  boost::math::quadrature::tanh_sinh<double> ts;
  for (double H : {0.6, 0.75, 0.95}) {
    const double b = H - 0.5;
    for (double t : {1.0, 2.5})
      for (double s : {-3.0, -0.5, 0.2, 0.9}) {
        double want = 0.0;
        if (s < 0.0) want += ts.integrate([&](double u) { return std::pow(u, b - 1.0); }, -s, t - s);
        else want += ts.integrate([&](double u) { return std::pow(u, b - 1.0); }, 0.0, t - s);
        want /= std::tgamma(b);
        EXPECT_NEAR(frac_integral_indicator(H, t, s), want, 1e-12) << H << " " << t << " " << s;
      }
  }
}

TEST(FracIntegralIndicator, NegativeTimeConvention) {
  // 1_{[0,t)} := -1_{[t,0)}: the t < 0 value is minus the transform of 1_{[t,0)}
  const double H = 0.7, t = -1.0;
  for (double s : {-3.0, -0.5}) {
    const double direct =
        -(std::pow(-s, H - 0.5) - ((t - s) > 0.0 ? std::pow(t - s, H - 0.5) : 0.0)) /
        std::tgamma(H + 0.5);
    EXPECT_NEAR(frac_integral_indicator(H, t, s), direct, 1e-15);
  }
}

TEST(FracIntegralIndicator, Domain) {
  EXPECT_THROW(frac_integral_indicator(0.0, 1.0, 0.5), DomainError);
  EXPECT_THROW(frac_integral_indicator(0.5, 0.0, 0.5), DomainError);
  EXPECT_THROW(frac_integral_indicator(0.3, 1.0, 1.0), DomainError);
  EXPECT_THROW(frac_integral_indicator(0.3, 1.0, 0.0), DomainError);
}
