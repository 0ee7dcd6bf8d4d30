#include "avm/moments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "avm/error.hpp"
#include "avm/random.hpp"

namespace avm {
namespace {

double max_abs(const Mat& x) { return x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff(); }

// Symmetric square root of a PSD matrix; tolerates zero eigenvalues.
Mat psd_sqrt(const Mat& g) {
  Eigen::SelfAdjointEigenSolver<Mat> es(g);
  const Vec root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

void check_psd(const Mat& g, int dim) {
  if (g.rows() != dim || g.cols() != dim) {
    throw Error(ErrorKind::DimensionMismatch,
                "G must be 2n x 2n = " + std::to_string(dim) + " square");
  }
  if (!g.allFinite() || max_abs(g - g.transpose()) > 1e-12 * std::max(1.0, max_abs(g))) {
    throw Error(ErrorKind::InvalidNoise, "G must be finite and symmetric");
  }
  if (dim > 0) {
    Eigen::SelfAdjointEigenSolver<Mat> es(g, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-12 * std::max(1.0, max_abs(g))) {
      throw Error(ErrorKind::InvalidNoise, "G must be positive semidefinite");
    }
  }
}

// Applies J^p X J^q entrywise for diagonal J with entries d.
Mat scale_by_powers(const Vec& d, long p, long q, const Mat& x) {
  const auto dim = d.size();
  Vec dp(dim);
  Vec dq(dim);
  for (Eigen::Index k = 0; k < dim; ++k) {
    dp(k) = std::pow(d(k), static_cast<double>(p));
    dq(k) = std::pow(d(k), static_cast<double>(q));
  }
  return dp.asDiagonal() * x * dq.asDiagonal();
}

struct Transformed {
  Mat G;
  Mat Sigma0;
};

Transformed transform_inputs(const MomentInputs& inputs,
                             const SpectralDecomposition& decomp) {
  const Mat& qinv = *decomp.Qinv;
  return {qinv * inputs.G * qinv.transpose(),
          qinv * inputs.Sigma0 * qinv.transpose()};
}

Vec draw_standard(Gaussian& rng, Eigen::Index dim) {
  Vec v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = rng.standard();
  return v;
}

Vec draw_gamma(Gaussian& rng, const ModelParams& params, const NoiseSpec& noise) {
  const int n = params.n();
  Vec g(2 * n);
  for (int i = 0; i < 2 * n; ++i) {
    const double e = noise.zero_noise ? noise.mu(i) : rng(noise.mu(i), noise.sigma(i));
    g(i) = i < n ? params.alpha() * e : -params.beta() * e;
  }
  return g;
}

// Cross-moment estimate from paired samples u_r, v_r with centred-product
// standard errors.
MonteCarloMatrix cross_moment(const std::vector<Vec>& u, const std::vector<Vec>& v) {
  const auto reps = static_cast<long>(u.size());
  const auto rows = u.front().size();
  const auto cols = v.front().size();
  Vec mu = Vec::Zero(rows);
  Vec mv = Vec::Zero(cols);
  for (long r = 0; r < reps; ++r) {
    mu += u[r];
    mv += v[r];
  }
  mu /= static_cast<double>(reps);
  mv /= static_cast<double>(reps);

  Mat sum = Mat::Zero(rows, cols);
  Mat sum_sq = Mat::Zero(rows, cols);
  for (long r = 0; r < reps; ++r) {
    const Mat p = (u[r] - mu) * (v[r] - mv).transpose();
    sum += p;
    sum_sq += p.cwiseProduct(p);
  }
  const double nr = static_cast<double>(reps);
  MonteCarloMatrix out;
  out.replications = reps;
  out.estimate = sum / (nr - 1.0);
  const Mat mean_p = sum / nr;
  const Mat var_p = (sum_sq / nr - mean_p.cwiseProduct(mean_p)) * (nr / (nr - 1.0));
  out.standard_error = (var_p.cwiseMax(0.0) / nr).cwiseSqrt();
  return out;
}

}  // namespace

MomentInputs make_moment_inputs(const ModelParams& params,
                                const NoiseSpec& noise, const Mat& G) {
  const int n = params.n();
  check_psd(G, 2 * n);
  if (noise.mu.size() != 2 * n || noise.sigma.size() != 2 * n) {
    throw Error(ErrorKind::DimensionMismatch, "noise spec length does not match 2n");
  }
  MomentInputs in;
  in.G = 0.5 * (G + G.transpose());
  in.Sigma0 = Mat::Zero(2 * n, 2 * n);
  in.mu_gamma.resize(2 * n);
  for (int i = 0; i < n; ++i) {
    const double a2 = params.alpha() * params.alpha();
    const double b2 = params.beta() * params.beta();
    if (!noise.zero_noise) {
      in.Sigma0(i, i) = a2 * noise.sigma(i) * noise.sigma(i);
      in.Sigma0(n + i, n + i) = b2 * noise.sigma(n + i) * noise.sigma(n + i);
    }
    in.mu_gamma(i) = params.alpha() * noise.mu(i);
    in.mu_gamma(n + i) = -params.beta() * noise.mu(n + i);
  }
  return in;
}

CrossCovariance cross_covariance(const MomentInputs& inputs,
                                 const SpectralDecomposition& decomp, long t,
                                 long tau, ShockSum sum) {
  require_basis(decomp);
  if (t < 2 || tau < 0) {
    std::ostringstream os;
    os << "cross covariance formula holds for t >= 2, tau >= 0 (got t = " << t
       << ", tau = " << tau << ")";
    throw Error(ErrorKind::RangeError, os.str());
  }
  const Vec d = decomp.jordan.diagonal_entries();
  const Transformed tr = transform_inputs(inputs, decomp);

  CrossCovariance c;
  c.t = t;
  c.tau = tau;
  c.transformed = scale_by_powers(d, t + tau, t, tr.G);
  const long first = sum == ShockSum::Exact ? 0 : 1;
  for (long i = first; i <= t - 1; ++i) {
    c.transformed += scale_by_powers(d, tau + i, i, tr.Sigma0);
  }
  const Mat& q = *decomp.Q;
  c.original = q * c.transformed * q.transpose();
  return c;
}

CovarianceReport stationarity_diagnostic(const MomentInputs& inputs,
                                         const SpectralDecomposition& decomp,
                                         const std::vector<long>& t_grid,
                                         const std::vector<long>& tau_grid,
                                         ShockSum sum) {
  if (t_grid.empty() || tau_grid.empty()) {
    throw Error(ErrorKind::RangeError, "t and tau grids must be nonempty");
  }
  CovarianceReport report;
  for (long tau : tau_grid) {
    const std::size_t first = report.grid.size();
    for (long t : t_grid) {
      report.grid.push_back(cross_covariance(inputs, decomp, t, tau, sum));
    }
    for (std::size_t i = first; i < report.grid.size(); ++i) {
      for (std::size_t j = i + 1; j < report.grid.size(); ++j) {
        report.stationarity_gap =
            std::max(report.stationarity_gap,
                     max_abs(report.grid[i].transformed - report.grid[j].transformed));
        report.stationarity_gap_original =
            std::max(report.stationarity_gap_original,
                     max_abs(report.grid[i].original - report.grid[j].original));
      }
    }
  }
  return report;
}

bool condition45(const EigenStructure& eig) {
  const double r = eig.spectral_radius();
  return r > 0.0 && r < 1.0;
}

LimitReport limiting_moments(const MomentInputs& inputs,
                             const SpectralDecomposition& decomp,
                             double tail_tol) {
  require_basis(decomp);
  if (!(tail_tol > 0.0 && tail_tol < 1.0)) {
    throw Error(ErrorKind::RangeError, "tail tolerance must lie in (0, 1)");
  }
  const EigenStructure& eig = decomp.eig;
  LimitReport rep;
  rep.condition45 = condition45(eig);
  if (!rep.condition45) {
    std::ostringstream os;
    os << "limits need 0 < max|lambda| < 1, got " << eig.spectral_radius();
    throw Error(ErrorKind::ConditionViolated, os.str());
  }
  const double l3 = eig.lambda3.real();
  const double l4 = eig.lambda4.real();
  rep.lambda_tilde = {1.0 / (1.0 - eig.lambda1), 1.0 / (1.0 - eig.lambda2),
                      1.0 / (1.0 - l3), 1.0 / (1.0 - l4)};

  const Mat& q = *decomp.Q;
  const Mat& qinv = *decomp.Qinv;
  const Vec d = decomp.jordan.diagonal_entries();
  const Vec dt = d.unaryExpr([](double l) { return 1.0 / (1.0 - l); });
  const Transformed tr = transform_inputs(inputs, decomp);

  rep.limiting_mean = q * (dt.asDiagonal() * (qinv * inputs.mu_gamma));
  rep.product_limit_cov =
      q * (dt.asDiagonal() * tr.Sigma0 * dt.asDiagonal()) * q.transpose();

  const double rho = eig.spectral_radius();
  rep.truncation_terms =
      static_cast<long>(std::ceil(std::log(tail_tol) / std::log(rho)));
  // sum_{i=0}^{K} (d_j d_k)^i, accumulated entrywise
  const auto dim = d.size();
  Mat weights = Mat::Zero(dim, dim);
  Mat power = Mat::Ones(dim, dim);
  const Mat ratio = d * d.transpose();
  for (long i = 0; i <= rep.truncation_terms; ++i) {
    weights += power;
    power = power.cwiseProduct(ratio);
  }
  const Mat ma_tilde = weights.cwiseProduct(tr.Sigma0);
  rep.ma_infinity_cov = q * ma_tilde * q.transpose();
  rep.tail_bound = max_abs(tr.Sigma0) *
                   std::pow(rho, 2.0 * static_cast<double>(rep.truncation_terms + 1)) /
                   (1.0 - rho * rho);
  rep.discrepancy = max_abs(rep.product_limit_cov - rep.ma_infinity_cov);
  return rep;
}

MonteCarloMatrix monte_carlo_cross_covariance(
    const ModelParams& params, const NoiseSpec& noise, const Mat& G,
    const Vec& z0_mean, long t, long tau, long replications,
    std::uint64_t seed, const Mat* transform) {
  const int dim = 2 * params.n();
  check_psd(G, dim);
  if (z0_mean.size() != dim) {
    throw Error(ErrorKind::DimensionMismatch, "z0 mean must have length 2n");
  }
  if (replications < 2 || t < 0 || tau < 0) {
    throw Error(ErrorKind::RangeError, "need >= 2 replications and t, tau >= 0");
  }
  const Mat m = build_transition_matrix(params).entries;
  const Mat root = psd_sqrt(G);

  std::vector<Vec> later;
  std::vector<Vec> earlier;
  later.reserve(static_cast<std::size_t>(replications));
  earlier.reserve(static_cast<std::size_t>(replications));
  for (long r = 0; r < replications; ++r) {
    Gaussian rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    Vec z = z0_mean + root * draw_standard(rng, dim);
    Vec at_t = z;
    for (long s = 0; s < t + tau; ++s) {
      z = m * z + draw_gamma(rng, params, noise);
      if (s + 1 == t) at_t = z;
    }
    if (transform != nullptr) {
      later.push_back(*transform * z);
      earlier.push_back(*transform * at_t);
    } else {
      later.push_back(std::move(z));
      earlier.push_back(std::move(at_t));
    }
  }
  return cross_moment(later, earlier);
}

LongRunEstimate monte_carlo_long_run(const ModelParams& params,
                                     const NoiseSpec& noise, const Vec& z0,
                                     long t_from, long t_to, long replications,
                                     std::uint64_t seed) {
  const int dim = 2 * params.n();
  if (z0.size() != dim) {
    throw Error(ErrorKind::DimensionMismatch, "z0 must have length 2n");
  }
  if (replications < 2 || t_from < 0 || t_to < t_from) {
    throw Error(ErrorKind::RangeError, "need >= 2 replications and 0 <= t_from <= t_to");
  }
  const Mat m = build_transition_matrix(params).entries;
  std::vector<Vec> averages;
  std::vector<Vec> endpoints;
  averages.reserve(static_cast<std::size_t>(replications));
  endpoints.reserve(static_cast<std::size_t>(replications));
  for (long r = 0; r < replications; ++r) {
    Gaussian rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    Vec z = z0;
    Vec acc = Vec::Zero(dim);
    if (t_from == 0) acc += z;
    for (long s = 1; s <= t_to; ++s) {
      z = m * z + draw_gamma(rng, params, noise);
      if (s >= t_from) acc += z;
    }
    if (!z.allFinite()) {
      throw NonFiniteStateError(t_to, "long-run replication diverged");
    }
    averages.push_back(acc / static_cast<double>(t_to - t_from + 1));
    endpoints.push_back(std::move(z));
  }

  LongRunEstimate out;
  const double nr = static_cast<double>(replications);
  Vec mean = Vec::Zero(dim);
  for (const Vec& a : averages) mean += a;
  mean /= nr;
  Vec var = Vec::Zero(dim);
  for (const Vec& a : averages) var += (a - mean).cwiseAbs2();
  var /= (nr - 1.0);
  out.time_average.estimate = mean;
  out.time_average.standard_error = (var / nr).cwiseSqrt();
  out.time_average.replications = replications;
  out.endpoint_cov = cross_moment(endpoints, endpoints);
  return out;
}

namespace {

double score(double estimate, double reference, double se) {
  const double diff = std::abs(estimate - reference);
  if (se > 0.0) return diff / se;
  return diff <= 1e-12 * (1.0 + std::abs(reference))
             ? 0.0
             : std::numeric_limits<double>::infinity();
}

}  // namespace

double max_standard_score(const MonteCarloMatrix& mc, const Mat& reference) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < reference.rows(); ++i) {
    for (Eigen::Index j = 0; j < reference.cols(); ++j) {
      worst = std::max(worst, score(mc.estimate(i, j), reference(i, j),
                                    mc.standard_error(i, j)));
    }
  }
  return worst;
}

double max_standard_score(const MonteCarloVector& mc, const Vec& reference) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < reference.size(); ++i) {
    worst = std::max(worst, score(mc.estimate(i), reference(i), mc.standard_error(i)));
  }
  return worst;
}

}  // namespace avm
