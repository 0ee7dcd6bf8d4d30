#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "avm/model.hpp"
#include "avm/spectral.hpp"

namespace avm {

/// Second-order inputs of the explicit solution.
struct MomentInputs {
  Mat G;         // Cov(z_0), symmetric PSD
  Mat Sigma0;    // Cov(gamma_t) = diag(alpha^2 sigma_i^2, beta^2 sigma_{n+i}^2)
  Vec mu_gamma;  // E gamma_t = (alpha mu_i, -beta mu_{n+i})
};

/// Throws DimensionMismatch / InvalidNoise when G is not a symmetric PSD
/// 2n x 2n matrix.
MomentInputs make_moment_inputs(const ModelParams& params,
                                const NoiseSpec& noise, const Mat& G);

/// Which lags of the noise enter the sum over past shocks.
///
/// Exact sums i = 0..t-1, which is what E[z~_{t+tau} z~_t^T] expands to
/// when z~_t carries the t shocks gamma_0..gamma_{t-1}. Truncated starts
/// at i = 1 and drops the most recent shock; it is kept so the difference
/// can be measured.
enum class ShockSum { Exact, Truncated };

struct CrossCovariance {
  long t = 0;
  long tau = 0;
  Mat transformed;  // Cov(z~_{t+tau}, z~_t)
  Mat original;     // Q transformed Q^T = Cov(z_{t+tau}, z_t)
};

/// Cov(z~_{t+tau}, z~_t) = J^{t+tau} G~ J^t + sum_i J^{tau+i} Sigma~_0 J^i,
/// with G~ = Q^{-1} G Q^{-T} and Sigma~_0 = Q^{-1} Sigma_0 Q^{-T}.
/// Requires t >= 2 (RangeError) and the diagonal basis (WrongRegime).
CrossCovariance cross_covariance(const MomentInputs& inputs,
                                 const SpectralDecomposition& decomp, long t,
                                 long tau, ShockSum sum = ShockSum::Exact);

struct CovarianceReport {
  std::vector<CrossCovariance> grid;
  double stationarity_gap = 0.0;           // transformed coordinates
  double stationarity_gap_original = 0.0;  // original coordinates
};

/// Largest change of a fixed-lag covariance across the t grid.
CovarianceReport stationarity_diagnostic(const MomentInputs& inputs,
                                         const SpectralDecomposition& decomp,
                                         const std::vector<long>& t_grid,
                                         const std::vector<long>& tau_grid,
                                         ShockSum sum = ShockSum::Exact);

/// 0 < max |lambda_i| < 1
bool condition45(const EigenStructure& eig);

struct LimitReport {
  std::vector<double> lambda_tilde;  // 1 / (1 - lambda_i), order l1, l2, l3, l4
  bool condition45 = false;
  Vec limiting_mean;                 // Q diag(lambda~) Q^{-1} mu_gamma
  Mat product_limit_cov;       // Q D Sigma~_0 D Q^T, D = diag(lambda~)
  Mat ma_infinity_cov;               // sum_i Q J^i Sigma~_0 J^i Q^T
  double discrepancy = 0.0;          // ||product - ma_infinity||_max
  long truncation_terms = 0;         // K
  double tail_bound = 0.0;           // bound on the omitted terms, max-norm
};

/// Throws ConditionViolated if max |lambda_i| >= 1 (or is zero), WrongRegime
/// without the diagonal basis.
LimitReport limiting_moments(const MomentInputs& inputs,
                             const SpectralDecomposition& decomp,
                             double tail_tol);

/// Entrywise sample estimate with standard errors from replication scatter.
struct MonteCarloMatrix {
  Mat estimate;
  Mat standard_error;
  long replications = 0;
};

struct MonteCarloVector {
  Vec estimate;
  Vec standard_error;
  long replications = 0;
};

/// Sample Cov(z_{t+tau}, z_t) over independent replications of the
/// recursion, with z_0 ~ N(z0_mean, G). If transform is non-null the
/// samples are mapped through it first (pass Q^{-1} for z~ coordinates).
MonteCarloMatrix monte_carlo_cross_covariance(
    const ModelParams& params, const NoiseSpec& noise, const Mat& G,
    const Vec& z0_mean, long t, long tau, long replications,
    std::uint64_t seed, const Mat* transform = nullptr);

struct LongRunEstimate {
  MonteCarloVector time_average;  // mean over t in [t_from, t_to], per replication
  MonteCarloMatrix endpoint_cov;  // Cov(z_{t_to}) across replications
};

LongRunEstimate monte_carlo_long_run(const ModelParams& params,
                                     const NoiseSpec& noise, const Vec& z0,
                                     long t_from, long t_to, long replications,
                                     std::uint64_t seed);

/// Entrywise |estimate - reference| / stderr, maximized; entries with zero
/// standard error count only if they disagree.
double max_standard_score(const MonteCarloMatrix& mc, const Mat& reference);
double max_standard_score(const MonteCarloVector& mc, const Vec& reference);

}  // namespace avm
