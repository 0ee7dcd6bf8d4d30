#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace avm {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Weight vectors must sum to one within this tolerance.
inline constexpr double kWeightSumTol = 1e-12;

/// Unvalidated parameter record, as read from a config file.
struct RawParams {
  std::int64_t n = 0;
  double alpha = 0.0;
  double beta = 0.0;
  std::vector<double> a;
  std::vector<double> b;
};

/// Validated model parameters. Only validate_params() can produce one.
///
/// n agents; alpha is the output adjustment constant, beta the sentiment
/// adjustment constant; a weights sentiment (ybar = a.y), b weights output
/// (xbar = b.x). Both weight vectors are strictly positive and sum to one.
class ModelParams {
 public:
  int n() const noexcept { return n_; }
  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }
  const Vec& a() const noexcept { return a_; }
  const Vec& b() const noexcept { return b_; }

  /// Round-trips through validate_params() unchanged.
  RawParams raw() const;

  friend ModelParams validate_params(const RawParams& raw);

 private:
  ModelParams() = default;

  int n_ = 0;
  double alpha_ = 0.0;
  double beta_ = 0.0;
  Vec a_;
  Vec b_;
};

/// Gate for every computation. Throws avm::Error with kind
/// DimensionMismatch, WeightViolation or ForbiddenPair.
ModelParams validate_params(const RawParams& raw);

/// Non-fatal remarks, e.g. adjustment constants outside (0, 1).
std::vector<std::string> lint_params(const ModelParams& params);

struct RawNoise {
  std::vector<double> mu;
  std::vector<double> sigma;
  bool zero_noise = false;
};

/// Means and standard deviations for (eps_1..eps_n, eta_1..eta_n).
/// With zero_noise set every draw equals its mean.
struct NoiseSpec {
  Vec mu;
  Vec sigma;
  bool zero_noise = false;
};

NoiseSpec validate_noise(const RawNoise& raw, int n);

/// Standard normal noise on all 2n coordinates.
NoiseSpec standard_noise(int n);

/// The 2n x 2n matrix sending z_t = (x_t, y_t) to M z_t.
///
///   [ (1-alpha) I    alpha 1 a^T ]
///   [ -beta 1 b^T    (1-beta) I  ]
struct TransitionMatrix {
  Mat entries;
  int n = 0;

  Vec apply(const Vec& z) const { return entries * z; }
};

TransitionMatrix build_transition_matrix(const ModelParams& params);

}  // namespace avm
