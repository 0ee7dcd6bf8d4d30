#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "avm/model.hpp"
#include "avm/simulate.hpp"
#include "avm/spectral.hpp"

namespace avm {

enum class CycleRegime { ComplexOscillatory, DistinctReal, RepeatedReal };

std::string_view to_string(CycleRegime regime) noexcept;

/// The aggregate output equation
///   xbar(t+2) + kappa1 xbar(t+1) + kappa2 xbar(t) = h(t)
/// obtained by averaging the vector model with the weights.
struct CycleModel {
  double alpha = 0.0;
  double beta = 0.0;
  double kappa1 = 0.0;  // alpha + beta - 2
  double kappa2 = 0.0;  // 1 - alpha - beta + 2 alpha beta
  double delta1 = 0.0;  // kappa1^2 - 4 kappa2
  std::complex<double> rho1;
  std::complex<double> rho2;
  double rho_mod = 0.0;  // largest root modulus; |rho1| = sqrt(kappa2) when oscillatory
  double omega = 0.0;    // arg rho1 in (0, pi), oscillatory regime only
  CycleRegime regime = CycleRegime::DistinctReal;
  bool invertible = false;  // 0 < kappa2 < 1
  double tolerance = 0.0;   // boundary threshold on |delta1|

  /// 2 pi / omega; oscillatory regime only.
  double period() const;
  /// Strictly periodic only when |rho1| = 1.
  bool strictly_periodic() const;
};

CycleModel reduce_to_cycle(double alpha, double beta,
                           double boundary_tol = kBoundaryTol);

/// The same regime question asked through the transition matrix.
Regime matching_spectral_regime(CycleRegime regime) noexcept;

/// Explicit parameter-region form of 0 < kappa2 < 1, split on beta vs 1/2.
/// Undefined (nullopt) at beta = 1/2.
std::optional<bool> region_invertible(double alpha, double beta);

/// Aggregate shocks epsbar(t) = b . eps(t), etabar(t) = a . eta(t).
struct ScalarNoise {
  std::vector<double> eps_bar;
  std::vector<double> eta_bar;
  double eps_mean = 0.0;
  double eps_sd = 1.0;
  double eta_mean = 0.0;
  double eta_sd = 1.0;
  std::uint64_t seed = 0;
};

/// length draws of each series, i.i.d. normal.
ScalarNoise sample_scalar_noise(long length, double eps_sd, double eta_sd,
                                std::uint64_t seed, double eps_mean = 0.0,
                                double eta_mean = 0.0);

/// Aggregates the shocks of a vector-model path with the model weights.
ScalarNoise scalar_noise_from(const std::vector<NoiseDraw>& noises,
                              const ModelParams& params);

/// h(t) = alpha (epsbar(t+1) - epsbar(t)) + alpha beta (epsbar(t) - etabar(t)).
/// Throws IndexError when t + 1 is past the end of epsbar.
double forcing_term(const ScalarNoise& noise, double alpha, double beta, long t);

/// h(0..count-1).
std::vector<double> forcing_series(const ScalarNoise& noise, double alpha,
                                   double beta, long count);

/// xbar(0..T) from the literal recursion, h built from noise.
std::vector<double> simulate_cycle(const CycleModel& model,
                                   const ScalarNoise& noise, double x0,
                                   double x1, long T);

struct CycleConstants {
  double c1 = 0.0;
  double c2 = 0.0;
};

/// c1 cos(c2) = x0 and c1 |rho1| cos(c2 + omega) = x1, with c1 >= 0.
CycleConstants fit_constants(const CycleModel& model, double x0, double x1);

struct CycleSolution {
  double c1 = 0.0;
  double c2 = 0.0;
  std::vector<double> values;
};

/// c1 |rho1|^t cos(c2 + omega t) for t = 0..t_max.
CycleSolution homogeneous_solution(const CycleModel& model, double c1,
                                   double c2, long t_max);

/// General homogeneous solution in any regime, fitted to xbar(0), xbar(1):
///   oscillatory:   c1 |rho1|^t cos(c2 + omega t)
///   distinct real: c1 rho1^t + c2 rho2^t
///   repeated:      (c1 + c2 t) rho1^t
struct HomogeneousFit {
  CycleRegime regime = CycleRegime::DistinctReal;
  double c1 = 0.0;
  double c2 = 0.0;

  double operator()(const CycleModel& model, long t) const;
};

HomogeneousFit fit_homogeneous(const CycleModel& model, double x0, double x1);

/// psi_0..psi_count-1 with psi_0 = 1, psi_1 = -kappa1,
/// psi_s = -kappa1 psi_{s-1} - kappa2 psi_{s-2}.
std::vector<double> psi_weights(const CycleModel& model, long count);

struct ParticularSolution {
  std::vector<double> values;  // xbar_p(0..h.size()+1)
  long truncation = 0;         // K
  double residual_bound = 0.0; // per-step bound on the truncation error
};

/// xbar_p(t) = sum_{s=0}^{K} psi_s h(t-2-s), terms with negative index
/// dropped, so that xbar_p satisfies the forced equation with h(t) driving
/// step t+2. K = ceil(log(trunc_tol) / log|rho1|). Throws NotInvertible
/// unless 0 < kappa2 < 1.
ParticularSolution particular_solution(const CycleModel& model,
                                       const std::vector<double>& h,
                                       double trunc_tol);

/// Residual of the forced equation at step t.
double cycle_residual(const CycleModel& model, const std::vector<double>& x,
                      const std::vector<double>& h, long t);

inline constexpr long kMinPeriodogramLength = 64;
inline constexpr double kProminenceThreshold = 3.0;

struct PeriodEstimate {
  double frequency = 0.0;  // cycles per step
  double period = 0.0;     // steps
  long peak_bin = 0;
  double prominence = 0.0;  // smoothed peak / smoothed median
  bool significant = false; // prominence >= kProminenceThreshold
};

/// Periodogram peak over (0, 1/2], mean removed, no taper; the peak bin is
/// refined by a parabola through its neighbours. Throws TooShort below 64
/// samples.
PeriodEstimate dominant_period(const std::vector<double>& series);

/// |DFT|^2 / N at Fourier frequencies k/N, k = 1..N/2, mean removed.
std::vector<double> periodogram(const std::vector<double>& series);

}  // namespace avm
