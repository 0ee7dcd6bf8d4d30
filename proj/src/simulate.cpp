#include "avm/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "avm/error.hpp"
#include "avm/random.hpp"

namespace avm {
namespace {

void check_finite(const Vec& z, long t) {
  if (!z.allFinite()) {
    std::ostringstream os;
    os << "state became non-finite at t = " << t
       << " (explosive parameters?)";
    throw NonFiniteStateError(t, os.str());
  }
}

void check_path_inputs(const ModelParams& params, const Vec& z0,
                       const std::vector<NoiseDraw>& noises) {
  const int dim = 2 * params.n();
  if (z0.size() != dim) {
    throw Error(ErrorKind::DimensionMismatch,
                "z0 must have length 2n = " + std::to_string(dim));
  }
  if (!z0.allFinite()) {
    throw Error(ErrorKind::NonFiniteState, "z0 is not finite");
  }
  for (const auto& d : noises) {
    if (d.gamma.size() != dim) {
      throw Error(ErrorKind::DimensionMismatch,
                  "noise draw dimension does not match 2n");
    }
  }
}

}  // namespace

std::string_view to_string(Method method) noexcept {
  return method == Method::Recursive ? "recursive" : "explicit";
}

NoiseDraw make_noise_draw(const ModelParams& params, long t, Vec epsilon,
                          Vec eta) {
  const int n = params.n();
  NoiseDraw d;
  d.t = t;
  d.gamma.resize(2 * n);
  d.gamma.head(n) = params.alpha() * epsilon;
  d.gamma.tail(n) = -params.beta() * eta;
  d.epsilon = std::move(epsilon);
  d.eta = std::move(eta);
  return d;
}

std::vector<NoiseDraw> sample_noise_path(const NoiseSpec& spec,
                                         const ModelParams& params, long T,
                                         std::uint64_t seed) {
  const int n = params.n();
  if (spec.mu.size() != 2 * n || spec.sigma.size() != 2 * n) {
    throw Error(ErrorKind::DimensionMismatch,
                "noise spec length does not match 2n");
  }
  if (T < 1) {
    throw Error(ErrorKind::RangeError, "T must be >= 1");
  }
  Gaussian rng(seed);
  std::vector<NoiseDraw> out;
  out.reserve(static_cast<std::size_t>(T));
  for (long t = 0; t < T; ++t) {
    Vec eps(n);
    Vec eta(n);
    for (int i = 0; i < n; ++i) {
      eps(i) = spec.zero_noise ? spec.mu(i) : rng(spec.mu(i), spec.sigma(i));
    }
    for (int i = 0; i < n; ++i) {
      eta(i) = spec.zero_noise ? spec.mu(n + i)
                               : rng(spec.mu(n + i), spec.sigma(n + i));
    }
    out.push_back(make_noise_draw(params, t, std::move(eps), std::move(eta)));
  }
  return out;
}

Trajectory simulate_recursive(const ModelParams& params,
                              const TransitionMatrix& m, const Vec& z0,
                              std::vector<NoiseDraw> noises,
                              std::uint64_t seed) {
  check_path_inputs(params, z0, noises);
  Trajectory traj;
  traj.seed = seed;
  traj.method = Method::Recursive;
  traj.z.reserve(noises.size() + 1);
  traj.z.push_back(z0);
  for (std::size_t t = 0; t < noises.size(); ++t) {
    Vec next = m.entries * traj.z.back() + noises[t].gamma;
    check_finite(next, static_cast<long>(t) + 1);
    traj.z.push_back(std::move(next));
  }
  traj.noises = std::move(noises);
  return traj;
}

std::vector<Vec> explicit_transformed_path(const SpectralDecomposition& decomp,
                                           const Vec& z0,
                                           const std::vector<NoiseDraw>& noises) {
  require_basis(decomp);
  const Mat& qinv = *decomp.Qinv;
  const JordanForm& j = decomp.jordan;
  const Vec zt0 = qinv * z0;

  std::vector<Vec> out;
  out.reserve(noises.size() + 1);
  out.push_back(zt0);
  // forced = sum_{i=0}^{t-1} J^i gamma~_{t-1-i}, advanced as J forced + gamma~_t
  Vec forced = Vec::Zero(zt0.size());
  for (std::size_t t = 0; t < noises.size(); ++t) {
    forced = j.apply_power(1, forced) + qinv * noises[t].gamma;
    const long step = static_cast<long>(t) + 1;
    out.push_back(j.apply_power(step, zt0) + forced);
  }
  return out;
}

Trajectory simulate_explicit(const ModelParams& params,
                             const SpectralDecomposition& decomp,
                             const Vec& z0, std::vector<NoiseDraw> noises,
                             std::uint64_t seed) {
  check_path_inputs(params, z0, noises);
  require_basis(decomp);
  const Mat& q = *decomp.Q;
  const std::vector<Vec> transformed = explicit_transformed_path(decomp, z0, noises);

  Trajectory traj;
  traj.seed = seed;
  traj.method = Method::Explicit;
  traj.z.reserve(transformed.size());
  traj.z.push_back(z0);
  for (std::size_t t = 1; t < transformed.size(); ++t) {
    Vec z = q * transformed[t];
    check_finite(z, static_cast<long>(t));
    traj.z.push_back(std::move(z));
  }
  traj.noises = std::move(noises);
  return traj;
}

AggregateSeries aggregates(const Trajectory& trajectory,
                           const ModelParams& params) {
  const int n = params.n();
  AggregateSeries s;
  s.xbar.reserve(trajectory.z.size());
  s.ybar.reserve(trajectory.z.size());
  for (const Vec& z : trajectory.z) {
    if (z.size() != 2 * n) {
      throw Error(ErrorKind::DimensionMismatch,
                  "trajectory dimension does not match params");
    }
    s.xbar.push_back(params.b().dot(z.head(n)));
    s.ybar.push_back(params.a().dot(z.tail(n)));
  }
  return s;
}

PathDeviation compare_paths(const Trajectory& a, const Trajectory& b) {
  if (a.z.size() != b.z.size()) {
    throw Error(ErrorKind::DimensionMismatch, "paths differ in length");
  }
  PathDeviation d;
  for (std::size_t t = 0; t < a.z.size(); ++t) {
    d.max_abs_diff = std::max(d.max_abs_diff, (a.z[t] - b.z[t]).cwiseAbs().maxCoeff());
    d.max_abs_value = std::max(
        {d.max_abs_value, a.z[t].cwiseAbs().maxCoeff(), b.z[t].cwiseAbs().maxCoeff()});
  }
  return d;
}

}  // namespace avm
