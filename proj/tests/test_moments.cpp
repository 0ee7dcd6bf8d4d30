#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "avm/error.hpp"
#include "avm/moments.hpp"

using namespace avm;

namespace {

ModelParams make(int n, double alpha, double beta) {
  RawParams r;
  r.n = n;
  r.alpha = alpha;
  r.beta = beta;
  r.a.assign(static_cast<std::size_t>(n), 1.0 / n);
  r.b = r.a;
  if (n == 3) {
    r.a = {0.2, 0.3, 0.5};
    r.b = {0.5, 0.25, 0.25};
  }
  return validate_params(r);
}

double max_abs(const Mat& x) { return x.cwiseAbs().maxCoeff(); }

Mat mpow(const Mat& x, long k) {
  Mat out = Mat::Identity(x.rows(), x.cols());
  for (long i = 0; i < k; ++i) out = out * x;
  return out;
}

// Cov(z_{t+tau}, z_t) from z_t = M^t z_0 + sum_s M^(t-1-s) gamma_s, with
// z_0 ~ (., G) and gamma_s ~ (., Sigma0) independent.
Mat brute_force_cov(const Mat& m, const Mat& G, const Mat& S, long t, long tau) {
  Mat out = mpow(m, t + tau) * G * mpow(m, t).transpose();
  for (long s = 0; s < t; ++s) {
    out += mpow(m, t + tau - 1 - s) * S * mpow(m, t - 1 - s).transpose();
  }
  return out;
}

// Solves S = M S M^T + Sigma via (I - M kron M) vec S = vec Sigma.
Mat lyapunov(const Mat& m, const Mat& sigma) {
  const auto d = m.rows();
  Mat kron(d * d, d * d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) kron.block(i * d, j * d, d, d) = m(i, j) * m;
  }
  const Mat lhs = Mat::Identity(d * d, d * d) - kron;
  const Vec rhs = Eigen::Map<const Vec>(sigma.data(), d * d);
  const Vec sol = lhs.partialPivLu().solve(rhs);
  return Eigen::Map<const Mat>(sol.data(), d, d);
}

struct Fixture {
  ModelParams params;
  SpectralDecomposition decomp;
  NoiseSpec noise;
  Mat m;
};

Fixture fixture(int n, double alpha, double beta) {
  ModelParams p = make(n, alpha, beta);
  SpectralDecomposition d = decompose(p);
  Mat m = build_transition_matrix(p).entries;
  return {p, d, standard_noise(n), m};
}

}  // namespace

TEST(Inputs, CovarianceAndMeanOfShocks) {
  const auto f = fixture(2, 0.1, 0.9);
  NoiseSpec spec;
  spec.mu = (Vec(4) << 1.0, 2.0, 3.0, 4.0).finished();
  spec.sigma = (Vec(4) << 1.0, 2.0, 0.5, 1.0).finished();
  const MomentInputs in = make_moment_inputs(f.params, spec, Mat::Zero(4, 4));
  EXPECT_NEAR(in.Sigma0(0, 0), 0.01, 1e-15);
  EXPECT_NEAR(in.Sigma0(1, 1), 0.04, 1e-15);
  EXPECT_NEAR(in.Sigma0(2, 2), 0.81 * 0.25, 1e-15);
  EXPECT_NEAR(in.Sigma0(3, 3), 0.81, 1e-15);
  EXPECT_NEAR(in.mu_gamma(1), 0.2, 1e-15);
  EXPECT_NEAR(in.mu_gamma(2), -2.7, 1e-15);
}

TEST(Inputs, RejectsNonPsdCovariance) {
  const auto f = fixture(2, 0.1, 0.9);
  Mat G = Mat::Identity(4, 4);
  G(0, 0) = -1.0;
  EXPECT_THROW(make_moment_inputs(f.params, f.noise, G), Error);
  Mat asym = Mat::Identity(4, 4);
  asym(0, 1) = 0.5;
  EXPECT_THROW(make_moment_inputs(f.params, f.noise, asym), Error);
  EXPECT_THROW(make_moment_inputs(f.params, f.noise, Mat::Identity(3, 3)), Error);
}

TEST(CrossCovariance, SmallestTimeHasTwoShockTerms) {
  const auto f = fixture(3, 0.1, 0.9);
  const MomentInputs in = make_moment_inputs(f.params, f.noise, Mat::Zero(6, 6));
  const Mat J = f.decomp.jordan.dense();
  const Mat& qi = *f.decomp.Qinv;
  const Mat St = qi * in.Sigma0 * qi.transpose();
  const auto exact = cross_covariance(in, f.decomp, 2, 0);
  EXPECT_LT(max_abs(exact.transformed - (St + J * St * J)), 1e-14);
  const auto truncated = cross_covariance(in, f.decomp, 2, 0, ShockSum::Truncated);
  EXPECT_LT(max_abs(truncated.transformed - J * St * J), 1e-14);
}

TEST(CrossCovariance, MatchesBruteForceExpansion) {
  const auto f = fixture(2, 0.1, 1.5);
  ASSERT_TRUE(f.decomp.has_basis());
  Mat G(4, 4);
  G << 2.0, 0.3, 0.0, 0.1,
       0.3, 1.0, 0.2, 0.0,
       0.0, 0.2, 1.5, -0.4,
       0.1, 0.0, -0.4, 0.8;
  NoiseSpec spec = f.noise;
  spec.sigma = (Vec(4) << 1.0, 0.5, 2.0, 1.5).finished();
  const MomentInputs in = make_moment_inputs(f.params, spec, G);
  for (long t = 2; t <= 6; ++t) {
    for (long tau = 0; tau <= 3; ++tau) {
      const Mat expect = brute_force_cov(f.m, G, in.Sigma0, t, tau);
      const auto c = cross_covariance(in, f.decomp, t, tau);
      EXPECT_LT(max_abs(c.original - expect), 1e-12 * std::max(1.0, max_abs(expect)))
          << "t=" << t << " tau=" << tau;
      const Mat& qi = *f.decomp.Qinv;
      EXPECT_LT(max_abs(c.transformed - qi * expect * qi.transpose()), 1e-12 * std::max(1.0, max_abs(c.transformed)));
    }
  }
}

TEST(CrossCovariance, TruncatedSumDropsTheMostRecentShock) {
  const auto f = fixture(3, 0.1, 0.9);
  const MomentInputs in = make_moment_inputs(f.params, f.noise, Mat::Zero(6, 6));
  const Mat& qi = *f.decomp.Qinv;
  const Mat St = qi * in.Sigma0 * qi.transpose();
  const Mat J = f.decomp.jordan.dense();
  const auto exact = cross_covariance(in, f.decomp, 5, 2);
  const auto truncated = cross_covariance(in, f.decomp, 5, 2, ShockSum::Truncated);
  EXPECT_LT(max_abs(exact.transformed - truncated.transformed - mpow(J, 2) * St), 1e-14);
}

TEST(CrossCovariance, CoordinateRoundTrip) {
  const auto f = fixture(3, 0.1, 0.9);
  const MomentInputs in = make_moment_inputs(f.params, f.noise, 0.5 * Mat::Identity(6, 6));
  const auto c = cross_covariance(in, f.decomp, 7, 1);
  const Mat& q = *f.decomp.Q;
  const Mat& qi = *f.decomp.Qinv;
  EXPECT_LT(max_abs(qi * c.original * qi.transpose() - c.transformed), 1e-10);
  EXPECT_LT(max_abs(q * c.transformed * q.transpose() - c.original), 1e-10);
}

TEST(CrossCovariance, LagZeroIsSymmetricPsd) {
  const auto f = fixture(3, 0.1, 0.9);
  const MomentInputs in = make_moment_inputs(f.params, f.noise, 0.2 * Mat::Identity(6, 6));
  for (long t : {2L, 3L, 8L, 20L}) {
    const auto c = cross_covariance(in, f.decomp, t, 0);
    for (const Mat* x : {&c.transformed, &c.original}) {
      EXPECT_LT(max_abs(*x - x->transpose()), 1e-10);
      Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (*x + x->transpose()));
      EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10 * x->trace());
    }
  }
}

TEST(CrossCovariance, Errors) {
  const auto f = fixture(3, 0.1, 0.9);
  const MomentInputs in = make_moment_inputs(f.params, f.noise, Mat::Zero(6, 6));
  try {
    cross_covariance(in, f.decomp, 1, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::RangeError);
  }
  const auto g = fixture(3, 1.09804, 0.7);
  const MomentInputs gin = make_moment_inputs(g.params, g.noise, Mat::Zero(6, 6));
  try {
    cross_covariance(gin, g.decomp, 3, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::WrongRegime);
  }
}

TEST(Stationarity, GapGrowsWithTime) {
  const auto f = fixture(3, 0.1, 0.9);
  const MomentInputs in = make_moment_inputs(f.params, f.noise, Mat::Zero(6, 6));
  const auto rep = stationarity_diagnostic(in, f.decomp, {2, 5, 10}, {0, 1});
  EXPECT_EQ(rep.grid.size(), 6u);
  EXPECT_GT(rep.stationarity_gap, 1e-3);
  EXPECT_GT(rep.stationarity_gap_original, 1e-3);
  // Gamma(t2,t2) - Gamma(t1,t1) = sum_{i=t1}^{t2-1} J^i S J^i
  const Mat& qi = *f.decomp.Qinv;
  const Mat St = qi * in.Sigma0 * qi.transpose();
  const Mat J = f.decomp.jordan.dense();
  Mat diff = Mat::Zero(6, 6);
  for (long i = 2; i <= 4; ++i) diff += mpow(J, i) * St * mpow(J, i);
  EXPECT_LT(max_abs(rep.grid[1].transformed - rep.grid[0].transformed - diff), 1e-14);
}

TEST(Stationarity, DeterministicCaseHasNoGap) {
  const auto f = fixture(3, 0.1, 0.9);
  NoiseSpec spec = f.noise;
  spec.zero_noise = true;
  const MomentInputs in = make_moment_inputs(f.params, spec, Mat::Zero(6, 6));
  const auto rep = stationarity_diagnostic(in, f.decomp, {2, 5, 10}, {0, 1});
  EXPECT_EQ(rep.stationarity_gap, 0.0);
  EXPECT_EQ(rep.stationarity_gap_original, 0.0);
}

TEST(Limits, LambdaTildeValues) {
  const auto f = fixture(3, 0.1, 0.9);
  const MomentInputs in = make_moment_inputs(f.params, f.noise, Mat::Zero(6, 6));
  const LimitReport lim = limiting_moments(in, f.decomp, 1e-12);
  ASSERT_EQ(lim.lambda_tilde.size(), 4u);
  const double r = std::sqrt(0.28);
  EXPECT_NEAR(lim.lambda_tilde[0], 10.0, 1e-12);
  EXPECT_NEAR(lim.lambda_tilde[1], 1.0 / 0.9, 1e-12);
  EXPECT_NEAR(lim.lambda_tilde[2], 1.0 / (1.0 - 0.5 * (1 + r)), 1e-12);
  EXPECT_NEAR(lim.lambda_tilde[2], 4.247640, 5e-7);
  EXPECT_NEAR(lim.lambda_tilde[3], 1.307916, 5e-7);
  EXPECT_TRUE(lim.condition45);
  EXPECT_LT(lim.limiting_mean.cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Limits, GeometricSeriesTruncation) {
  const auto f = fixture(3, 0.1, 0.9);
  const MomentInputs in = make_moment_inputs(f.params, f.noise, Mat::Zero(6, 6));
  const double tol = 1e-10;
  const LimitReport lim = limiting_moments(in, f.decomp, tol);
  const Vec d = f.decomp.jordan.diagonal_entries();
  for (Eigen::Index k = 0; k < d.size(); ++k) {
    double sum = 0.0;
    double p = 1.0;
    for (long i = 0; i <= lim.truncation_terms; ++i, p *= d(k)) sum += p;
    EXPECT_LT(std::abs(sum - 1.0 / (1.0 - d(k))) * (1.0 - d(k)), tol);
  }
}

TEST(Limits, MeanAndMaInfinityMatchDirectSolves) {
  const auto f = fixture(2, 0.1, 1.5);
  NoiseSpec spec = f.noise;
  spec.mu = (Vec(4) << 1.0, -0.5, 0.25, 2.0).finished();
  const MomentInputs in = make_moment_inputs(f.params, spec, Mat::Zero(4, 4));
  ASSERT_TRUE(condition45(f.decomp.eig));
  const LimitReport lim = limiting_moments(in, f.decomp, 1e-14);
  const Vec mean = (Mat::Identity(4, 4) - f.m).partialPivLu().solve(in.mu_gamma);
  EXPECT_LT((lim.limiting_mean - mean).cwiseAbs().maxCoeff(), 1e-10);
  const Mat cov = lyapunov(f.m, in.Sigma0);
  EXPECT_LT(max_abs(lim.ma_infinity_cov - cov), 1e-9 * max_abs(cov));
  EXPECT_LT(lim.tail_bound, 1e-12 * max_abs(cov));
  EXPECT_GT(lim.discrepancy, 1e-3);
  for (const Mat* x : {&lim.ma_infinity_cov, &lim.product_limit_cov}) {
    EXPECT_LT(max_abs(*x - x->transpose()), 1e-10 * max_abs(*x));
    Eigen::SelfAdjointEigenSolver<Mat> es(*x);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10 * x->trace());
  }
}

TEST(Limits, ConditionViolated) {
  const auto f = fixture(2, 0.1, 2.5);
  ASSERT_TRUE(f.decomp.has_basis());
  EXPECT_FALSE(condition45(f.decomp.eig));
  const MomentInputs in = make_moment_inputs(f.params, f.noise, Mat::Zero(4, 4));
  try {
    limiting_moments(in, f.decomp, 1e-12);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ConditionViolated);
  }
}

TEST(MonteCarlo, CrossCovarianceWithinFourStandardErrors) {
  const auto f = fixture(2, 0.1, 1.5);
  const Mat G = 0.5 * Mat::Identity(4, 4);
  const MomentInputs in = make_moment_inputs(f.params, f.noise, G);
  const auto c = cross_covariance(in, f.decomp, 3, 1);
  const auto mc = monte_carlo_cross_covariance(f.params, f.noise, G, Vec::Zero(4), 3, 1, 20000, 99);
  EXPECT_EQ(mc.replications, 20000);
  EXPECT_LT(max_standard_score(mc, c.original), 4.0);
  const Mat& qi = *f.decomp.Qinv;
  const auto mct = monte_carlo_cross_covariance(f.params, f.noise, G, Vec::Zero(4), 3, 1, 20000, 99, &qi);
  EXPECT_LT(max_standard_score(mct, c.transformed), 4.0);
}

TEST(MonteCarlo, ScoreTreatsZeroErrorStrictly) {
  MonteCarloVector v;
  v.estimate = Vec::Ones(2);
  v.standard_error = Vec::Zero(2);
  EXPECT_EQ(max_standard_score(v, Vec::Ones(2)), 0.0);
  EXPECT_TRUE(std::isinf(max_standard_score(v, Vec::Zero(2))));
  v.standard_error = Vec::Constant(2, 0.5);
  EXPECT_DOUBLE_EQ(max_standard_score(v, Vec::Zero(2)), 2.0);
}
