#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "fbmrep/convergence.hpp"
#include "fbmrep/simulate.hpp"

using namespace fbmrep;

namespace {

double sample_var(const Eigen::VectorXd& x) {
  const double m = x.mean();
  return (x.array() - m).square().sum() / (static_cast<double>(x.size()) - 1.0);
}

// standard error of a sample variance for Gaussian data
double var_se(double var, std::size_t n) { return var * std::sqrt(2.0 / static_cast<double>(n)); }

}  // namespace

TEST(FbmCovariance, Values) {
  EXPECT_DOUBLE_EQ(fbm_covariance(0.5, 0.3, 0.8), 0.3);
  EXPECT_NEAR(fbm_covariance(0.75, 0.5, 1.0), 0.5 * (std::pow(0.5, 1.5) + 1.0 - std::pow(0.5, 1.5)), 1e-15);
  EXPECT_DOUBLE_EQ(fbm_covariance(0.3, 0.0, 2.0), 0.0);
  EXPECT_THROW(fbm_covariance(1.0, 0.1, 0.2), DomainError);
}

TEST(Grid, IndexAndValidation) {
  const Grid g{-2.0, 1.0, 12};
  EXPECT_EQ(g.index_of(0.0), 8);
  EXPECT_EQ(g.time(12), 1.0);
  EXPECT_FALSE(g.find(0.1).has_value());
  EXPECT_THROW((Grid{1.0, 1.0, 4}.validate()), DomainError);
  EXPECT_THROW((Grid{0.0, 1.0, 1}.validate()), DomainError);
}

TEST(ExactSampler, VarianceAndCovariance) {
  const std::size_t n = 20000;
  const Grid g{0.0, 1.0, 16};
  for (double H : {0.3, 0.75}) {
    const auto ens = sample_fbm_exact(H, g, n, 11);
    EXPECT_EQ(ens.paths.col(0).cwiseAbs().maxCoeff(), 0.0);
    const auto est = empirical_covariance(ens, {0.5, 1.0});
    EXPECT_NEAR(est.matrix(1, 1), 1.0, 4.0 * std::sqrt(2.0 / n)) << H;
    EXPECT_NEAR(est.matrix(0, 1), fbm_covariance(H, 0.5, 1.0), 4.0 * est.std_error(0, 1)) << H;
  }
}

TEST(ExactSampler, BrownianIncrementsUncorrelated) {
  const Grid g{0.0, 1.0, 8};
  const auto ens = sample_fbm_exact(0.5, g, 20000, 5);
  const Eigen::VectorXd d1 = ens.paths.col(1) - ens.paths.col(0);
  const Eigen::VectorXd d2 = ens.paths.col(2) - ens.paths.col(1);
  const double rho = ((d1.array() - d1.mean()) * (d2.array() - d2.mean())).sum() /
                     std::sqrt(sample_var(d1) * sample_var(d2)) / (d1.size() - 1.0);
  EXPECT_NEAR(rho, 0.0, 4.0 / std::sqrt(20000.0));
}

TEST(Brownian, AnchoredAtZero) {
  const Grid g{-1.0, 1.0, 20};
  const auto ens = sample_brownian(g, 4000, 3);
  EXPECT_EQ(ens.paths.col(g.index_of(0.0)).cwiseAbs().maxCoeff(), 0.0);
  const double v = sample_var(ens.paths.col(0));
  EXPECT_NEAR(v, 1.0, 4.0 * var_se(1.0, 4000));
}

TEST(FractionalWienerIntegral, HalfOrderTelescopes) {
  const Grid g{-1.0, 1.0, 32};
  const auto w = sample_brownian(g, 50, 9);
  // indicator of [0, 1): left-point sum over the cells of [0, 1)
  const auto f = SampledFunction::sample([](double u) { return u < 1.0 ? 1.0 : 0.0; }, 0.0, g.step(), 17, 1.0);
  const auto got = fractional_wiener_integral(f, 0.5, w);
  for (std::size_t p = 0; p < got.size(); ++p)
    EXPECT_NEAR(got[p], w.paths(p, 32) - w.paths(p, 16), 1e-13);
}

TEST(FractionalWienerIntegral, Linear) {
  const Grid g{-4.0, 1.0, 80};
  const auto w = sample_brownian(g, 20, 4);
  const double h = g.step();
  const auto f1 = SampledFunction::sample([](double u) { return std::sin(3 * u); }, -1.0, h, 33, 1.0);
  const auto f2 = SampledFunction::sample([](double u) { return u * u; }, -1.0, h, 33, 1.0);
  SampledFunction f3 = f1;
  for (std::size_t j = 0; j < f3.size(); ++j) f3.values[j] = 2.0 * f1.values[j] - f2.values[j];
  for (double K : {0.3, 0.5, 0.8}) {
    const auto a = fractional_wiener_integral(f1, K, w);
    const auto b = fractional_wiener_integral(f2, K, w);
    const auto c = fractional_wiener_integral(f3, K, w);
    for (std::size_t p = 0; p < a.size(); ++p) EXPECT_NEAR(c[p], 2.0 * a[p] - b[p], 1e-10) << K;
  }
}

TEST(FractionalWienerIntegral, IndicatorGivesFbmVariance) {
  // the integral of 1_[0,1) is B^K_1; the driver reaches far enough left
  // that the truncated variance is within a few percent of 1
  const double K = 0.7;
  const Grid g{-400.0, 1.0, 401 * 16};
  const auto w = sample_brownian(g, 4000, 21);
  const auto f = SampledFunction::sample([](double u) { return u < 1.0 ? 1.0 : 0.0; }, 0.0, g.step(), 17, 1.0);
  const auto got = fractional_wiener_integral(f, K, w);
  const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(got.data(), static_cast<Eigen::Index>(got.size()));
  const double v = sample_var(x);
  // variance lost left of -400: int_400^inf (C(K) beta x^{beta-1}/Gamma(beta+1))^2 dx
  const double beta = K - 0.5;
  const double lost = std::pow(norm_C(K) / std::tgamma(beta), 2) * std::pow(400.0, 2 * beta - 1) / (1 - 2 * beta);
  EXPECT_NEAR(v, 1.0 - lost, 4.0 * var_se(1.0, x.size()) + 0.02);
}

TEST(MgTransform, EqualIndicesCopyDriver) {
  const Grid g{0.0, 1.0, 16};
  const auto b = sample_fbm_exact(0.6, g, 30, 2);
  const auto z = mg_transform_path(KernelSpec{0.6, 0.6, 1.0, {}}, b);
  EXPECT_EQ(z.paths, b.paths);
}

TEST(MgTransform, BrownianDriverGivesFbm) {
  const std::size_t n = 20000;
  const Grid g{0.0, 1.0, 64};
  const auto w = sample_brownian(g, n, 7);
  for (double H : {0.3, 0.7}) {
    const auto z = mg_transform_path(KernelSpec{0.5, H, 1.0, {}}, w);
    const auto est = empirical_covariance(z, {0.5, 1.0});
    EXPECT_NEAR(est.matrix(1, 1), 1.0, 5.0 * est.std_error(1, 1)) << H;
    EXPECT_NEAR(est.matrix(0, 1), fbm_covariance(H, 0.5, 1.0), 5.0 * est.std_error(0, 1)) << H;
    // stationary increments: three windows of length 1/4
    const double want = std::pow(0.25, 2 * H);
    for (int u : {0, 24, 48}) {
      const Eigen::VectorXd inc = z.paths.col(u + 16) - z.paths.col(u);
      EXPECT_NEAR(sample_var(inc), want, 5.0 * var_se(want, n)) << H << " " << u;
    }
  }
}

TEST(MgTransform, FbmDriver) {
  const std::size_t n = 20000;
  const Grid g{0.0, 1.0, 32};
  const auto b = sample_fbm_exact(0.7, g, n, 8);
  const auto z = mg_transform_path(KernelSpec{0.7, 0.4, 1.0, {}}, b);
  const auto est = empirical_covariance(z, {0.5, 1.0});
  EXPECT_NEAR(est.matrix(1, 1), 1.0, 5.0 * est.std_error(1, 1));
  EXPECT_NEAR(est.matrix(0, 1), fbm_covariance(0.4, 0.5, 1.0), 5.0 * est.std_error(0, 1));
}

TEST(MvnTransform, StartsAtZeroAndHasFbmVariance) {
  const std::size_t n = 8000;
  const double L = 64.0;
  const Grid g{-L, 1.0, 65 * 8};
  const auto w = sample_brownian(g, n, 12);
  for (double H : {0.3, 0.7}) {
    const auto r = mvn_transform_path(KernelSpec{0.5, H, 1.0, {}}, w, L);
    EXPECT_EQ(r.paths.paths.col(0).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_GT(r.tail_variance, 0.0);
    const double v = sample_var(r.paths.paths.col(r.paths.grid.n_steps));
    EXPECT_NEAR(v, 1.0 - r.tail_variance, 5.0 * var_se(1.0, n)) << H;
  }
}

TEST(MvnTransform, VarianceIsSelfSimilar) {
  // Brownian-form MVN variance at L = 128: quadrature of the squared kernel
  // on [-L, t], and the cell-averaged sum on a 2^-10 grid; both plus the
  // reported tail term. Without the tail term H = 0.7 misses 1e-3 (the
  // truncated part scales like t^2, not t^{2H}).
  const double L = 128.0, h = std::ldexp(1.0, -10);
  for (double H : {0.3, 0.7}) {
    const double cm = norm_C(H) / std::tgamma(H + 0.5);
    auto tail = [&](double t) {
      return cm * cm * (H - 0.5) * (H - 0.5) * t * t * std::pow(L, 2 * H - 2) / (2 - 2 * H);
    };
    auto quad_var = [&](double t) {
      const std::vector<double> cuts{0.0};
      auto k2 = [&](double v) {
        if (v >= t || v == 0.0) return 0.0;
        const double k = cm * detail::power_difference(H - 0.5, t, v);
        return k * k;
      };
      return quad::piecewise(k2, -L, t, cuts, 1e-12).value + tail(t);
    };
    auto grid_var = [&](double t) {
      double acc = 0.0;
      for (double a = -L; a < t; a += h) {
        const double c = cm * detail::mvn_cell_integral(H - 0.5, t, a, a + h) / h;
        acc += c * c * h;
      }
      return acc + tail(t);
    };
    const double q1 = quad_var(1.0), g1 = grid_var(1.0);
    EXPECT_NEAR(q1, 1.0, 1e-3) << H;
    for (double t : {0.25, 0.5}) {
      EXPECT_NEAR(quad_var(t) / (std::pow(t, 2 * H) * q1), 1.0, 1e-3) << H << " " << t;
      EXPECT_NEAR(grid_var(t) / (std::pow(t, 2 * H) * g1), 1.0, 3e-3) << H << " " << t;
    }
  }
}

TEST(MvnTransform, EqualIndicesGiveIncrements) {
  const Grid g{-2.0, 1.0, 24};
  const auto b = sample_fbm_exact(0.65, g, 10, 1);
  const auto r = mvn_transform_path(KernelSpec{0.65, 0.65, 1.0, {}}, b, 2.0);
  const int i0 = g.index_of(0.0);
  for (int i = 0; i <= 8; ++i)
    for (int p = 0; p < 10; ++p) EXPECT_NEAR(r.paths.paths(p, i), b.paths(p, i0 + i) - b.paths(p, i0), 1e-14);
}

TEST(MvnTransform, RequiresReach) {
  const Grid g{-2.0, 1.0, 24};
  const auto w = sample_brownian(g, 2, 1);
  EXPECT_THROW(mvn_transform_path(KernelSpec{0.5, 0.7, 1.0, {}}, w, 8.0), DomainError);
}

TEST(Coupled, MeanSquareMatchesDistance) {
  const std::size_t n = 6000;
  const double s = 16.0;
  const Grid g{-s, 1.0, 17 * 16};
  for (auto [K, H] : {std::pair{0.5, 0.7}, std::pair{0.5, 0.3}}) {
    const KernelSpec spec{K, H, 1.0, s};
    const auto pr = zhs_and_zh_paths(spec, g, 4 * s, n, 31);
    const Eigen::VectorXd d = pr.shifted_mg.paths.col(16) - pr.mvn.paths.col(16);
    const double ms = d.squaredNorm() / static_cast<double>(n);
    const Eigen::ArrayXd sq = d.array().square();
    const double se = std::sqrt((sq - ms).square().sum() / (n - 1.0) / n);
    const double want = l2_distance(KernelSpec{K, H, 1.0, {}}, s, 4 * s, 1e-8).value;
    EXPECT_NEAR(ms + pr.truncation_variance, want, 4.0 * se + 0.02 * want) << K << " " << H;
    // both marginals are H-fBm (up to truncation of Z^H)
    EXPECT_NEAR(sample_var(pr.shifted_mg.paths.col(16)), 1.0, 5.0 * var_se(1.0, n)) << H;
  }
}

TEST(Coupled, FractionalDriverMeanSquare) {
  const std::size_t n = 3000;
  const double s = 8.0;
  const Grid g{-s, 1.0, 9 * 8};
  const KernelSpec spec{0.7, 0.4, 1.0, s};
  const auto pr = zhs_and_zh_paths(spec, g, 4 * s, n, 17);
  const Eigen::VectorXd d = pr.shifted_mg.paths.col(8) - pr.mvn.paths.col(8);
  const double ms = d.squaredNorm() / static_cast<double>(n);
  const double want = l2_distance(KernelSpec{0.7, 0.4, 1.0, {}}, s, 4 * s, 1e-8).value;
  EXPECT_NEAR(ms + pr.truncation_variance, want, 4.0 * want * std::sqrt(2.0 / n) + 0.02 * want);
}

TEST(Coupled, EqualIndicesCoincide) {
  const Grid g{-4.0, 1.0, 40};
  const auto pr = zhs_and_zh_paths(KernelSpec{0.6, 0.6, 1.0, 4.0}, g, 16.0, 20, 2);
  EXPECT_EQ(pr.shifted_mg.paths, pr.mvn.paths);
}

TEST(Determinism, ThreadCountDoesNotMatter) {
  const Grid g{-4.0, 1.0, 40};
  const KernelSpec spec{0.5, 0.7, 1.0, 4.0};
  const auto a = zhs_and_zh_paths(spec, g, 16.0, 64, 99, 1);
  const auto b = zhs_and_zh_paths(spec, g, 16.0, 64, 99, 4);
  EXPECT_EQ(a.shifted_mg.paths, b.shifted_mg.paths);
  EXPECT_EQ(a.mvn.paths, b.mvn.paths);
  EXPECT_EQ(sample_fbm_exact(0.3, Grid{0.0, 1.0, 8}, 50, 4, 1).paths,
            sample_fbm_exact(0.3, Grid{0.0, 1.0, 8}, 50, 4, 3).paths);
  EXPECT_NE(sample_brownian(g, 4, 1).paths, sample_brownian(g, 4, 2).paths);
}

TEST(EmpiricalCovariance, ZeroAndBrownian) {
  PathEnsemble zero{Grid{0.0, 1.0, 4}, Eigen::MatrixXd::Zero(10, 5), 0, 0.5};
  const auto z = empirical_covariance(zero, {0.5, 1.0});
  EXPECT_EQ(z.matrix, Eigen::MatrixXd::Zero(2, 2));
  const auto w = sample_brownian(Grid{0.0, 1.0, 4}, 20000, 8);
  const auto est = empirical_covariance(w, {0.5, 1.0});
  const Eigen::Matrix2d want{{0.5, 0.5}, {0.5, 1.0}};
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) EXPECT_NEAR(est.matrix(a, b), want(a, b), 4.0 * est.std_error(a, b));
  EXPECT_EQ(est.matrix(0, 1), est.matrix(1, 0));
  PathEnsemble one{Grid{0.0, 1.0, 4}, Eigen::MatrixXd::Zero(1, 5), 0, 0.5};
  EXPECT_THROW(empirical_covariance(one, {1.0}), DomainError);
}

TEST(EmpiricalCovariance, JackknifeMatchesGaussianTheory) {
  const std::size_t n = 20000;
  const auto ens = sample_fbm_exact(0.5, Grid{0.0, 1.0, 4}, n, 77);
  const auto est = empirical_covariance(ens, {1.0});
  EXPECT_NEAR(est.std_error(0, 0), std::sqrt(2.0 / n), 0.1 * std::sqrt(2.0 / n));
  EXPECT_THROW(empirical_covariance(ens, {0.3}), DomainError);
}

TEST(Csv, RoundTripIsExact) {
  const auto ens = sample_fbm_exact(0.7, Grid{0.0, 2.0, 10}, 5, 6);
  std::stringstream ss;
  write_csv(ss, ens);
  const std::string text = ss.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "time,path_0,path_1,path_2,path_3,path_4");
  const auto back = read_csv(ss, 0.7);
  EXPECT_EQ(back.paths, ens.paths);
  EXPECT_EQ(back.grid.n_steps, 10);
  EXPECT_EQ(back.grid.t_end, 2.0);
  std::stringstream bad("time,path_0\n0,1\n0.5,x\n1,2\n");
  EXPECT_THROW(read_csv(bad, 0.5), DomainError);
}
