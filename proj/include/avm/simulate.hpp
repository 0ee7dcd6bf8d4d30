#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "avm/model.hpp"
#include "avm/spectral.hpp"

namespace avm {

/// One period of idiosyncratic shocks; gamma = (alpha eps, -beta eta).
struct NoiseDraw {
  long t = 0;
  Vec epsilon;
  Vec eta;
  Vec gamma;
};

enum class Method { Recursive, Explicit };

std::string_view to_string(Method method) noexcept;

/// z[t] for t = 0..T driven by noises[t] for t = 0..T-1.
struct Trajectory {
  std::vector<Vec> z;
  std::vector<NoiseDraw> noises;
  std::uint64_t seed = 0;
  Method method = Method::Recursive;

  long horizon() const noexcept { return static_cast<long>(z.size()) - 1; }
};

struct AggregateSeries {
  std::vector<double> xbar;  // b . x_t
  std::vector<double> ybar;  // a . y_t
};

NoiseDraw make_noise_draw(const ModelParams& params, long t, Vec epsilon,
                          Vec eta);

/// T i.i.d. draws. eps_i ~ N(mu_i, sigma_i^2), eta_i ~ N(mu_{n+i},
/// sigma_{n+i}^2). Deterministic in seed.
std::vector<NoiseDraw> sample_noise_path(const NoiseSpec& spec,
                                         const ModelParams& params, long T,
                                         std::uint64_t seed);

/// z_{t+1} = M z_t + gamma_t, literally. Throws NonFiniteStateError.
Trajectory simulate_recursive(const ModelParams& params,
                              const TransitionMatrix& m, const Vec& z0,
                              std::vector<NoiseDraw> noises,
                              std::uint64_t seed = 0);

/// Closed form z_{t+1} = Q J^{t+1} Q^{-1} z0 + sum_i Q J^i Q^{-1} gamma_{t-i},
/// accumulated in transformed coordinates.
Trajectory simulate_explicit(const ModelParams& params,
                             const SpectralDecomposition& decomp,
                             const Vec& z0, std::vector<NoiseDraw> noises,
                             std::uint64_t seed = 0);

/// Transformed states Q^{-1} z_t from the same closed form.
std::vector<Vec> explicit_transformed_path(const SpectralDecomposition& decomp,
                                           const Vec& z0,
                                           const std::vector<NoiseDraw>& noises);

AggregateSeries aggregates(const Trajectory& trajectory,
                           const ModelParams& params);

/// ||a - b||_inf over all t, and max_t ||a_t||_inf.
struct PathDeviation {
  double max_abs_diff = 0.0;
  double max_abs_value = 0.0;
};

PathDeviation compare_paths(const Trajectory& a, const Trajectory& b);

}  // namespace avm
