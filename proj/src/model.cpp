#include "avm/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "avm/error.hpp"

namespace avm {
namespace {

Vec check_weights(const std::vector<double>& w, const char* name) {
  double sum = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!std::isfinite(w[i]) || w[i] <= 0.0) {
      std::ostringstream os;
      os << "weight " << name << "[" << i << "] = " << w[i]
         << " is not strictly positive";
      throw Error(ErrorKind::WeightViolation, os.str());
    }
    sum += w[i];
  }
  if (std::abs(sum - 1.0) > kWeightSumTol) {
    std::ostringstream os;
    os.precision(17);
    os << "weights " << name << " sum to " << sum << ", not 1";
    throw Error(ErrorKind::WeightViolation, os.str());
  }
  Vec out = Eigen::Map<const Vec>(w.data(), static_cast<Eigen::Index>(w.size()));
  // Sums within summation rounding of 1 are left alone, so re-validating the
  // output is a no-op.
  const double slack = 2.0 * static_cast<double>(w.size()) * std::numeric_limits<double>::epsilon();
  for (int iter = 0; iter < 8 && std::abs(sum - 1.0) > slack; ++iter) {
    out /= sum;
    sum = out.sum();
  }
  return out;
}

}  // namespace

RawParams ModelParams::raw() const {
  RawParams r;
  r.n = n_;
  r.alpha = alpha_;
  r.beta = beta_;
  r.a.assign(a_.data(), a_.data() + a_.size());
  r.b.assign(b_.data(), b_.data() + b_.size());
  return r;
}

ModelParams validate_params(const RawParams& raw) {
  if (raw.n < 1 || raw.n > (1 << 20)) {
    throw Error(ErrorKind::DimensionMismatch,
                "n must be a positive integer, got " + std::to_string(raw.n));
  }
  const auto n = static_cast<std::size_t>(raw.n);
  if (raw.a.size() != n || raw.b.size() != n) {
    std::ostringstream os;
    os << "weight lengths (a: " << raw.a.size() << ", b: " << raw.b.size()
       << ") do not match n = " << raw.n;
    throw Error(ErrorKind::DimensionMismatch, os.str());
  }
  if (!std::isfinite(raw.alpha) || !std::isfinite(raw.beta)) {
    throw Error(ErrorKind::ForbiddenPair, "alpha and beta must be finite");
  }
  if ((raw.alpha == 0.0 && raw.beta == 0.0) ||
      (raw.alpha == 1.0 && raw.beta == 1.0)) {
    std::ostringstream os;
    os << "(alpha, beta) = (" << raw.alpha << ", " << raw.beta
       << ") is excluded";
    throw Error(ErrorKind::ForbiddenPair, os.str());
  }

  ModelParams p;
  p.n_ = static_cast<int>(raw.n);
  p.alpha_ = raw.alpha;
  p.beta_ = raw.beta;
  p.a_ = check_weights(raw.a, "a");
  p.b_ = check_weights(raw.b, "b");
  return p;
}

std::vector<std::string> lint_params(const ModelParams& params) {
  std::vector<std::string> notes;
  auto check = [&](double v, const char* name) {
    if (v <= 0.0 || v >= 1.0) {
      std::ostringstream os;
      os << name << " = " << v << " lies outside (0, 1)";
      notes.push_back(os.str());
    }
  };
  check(params.alpha(), "alpha");
  check(params.beta(), "beta");
  return notes;
}

NoiseSpec validate_noise(const RawNoise& raw, int n) {
  const auto len = static_cast<std::size_t>(2 * n);
  if (raw.mu.size() != len || raw.sigma.size() != len) {
    std::ostringstream os;
    os << "noise mu/sigma must have length 2n = " << len << " (got "
       << raw.mu.size() << ", " << raw.sigma.size() << ")";
    throw Error(ErrorKind::DimensionMismatch, os.str());
  }
  for (std::size_t i = 0; i < len; ++i) {
    if (!std::isfinite(raw.mu[i])) {
      throw Error(ErrorKind::InvalidNoise,
                  "noise mu[" + std::to_string(i) + "] is not finite");
    }
    if (!std::isfinite(raw.sigma[i]) || raw.sigma[i] <= 0.0) {
      throw Error(ErrorKind::InvalidNoise,
                  "noise sigma[" + std::to_string(i) + "] must be > 0");
    }
  }
  NoiseSpec spec;
  spec.mu = Eigen::Map<const Vec>(raw.mu.data(), static_cast<Eigen::Index>(len));
  spec.sigma =
      Eigen::Map<const Vec>(raw.sigma.data(), static_cast<Eigen::Index>(len));
  spec.zero_noise = raw.zero_noise;
  return spec;
}

NoiseSpec standard_noise(int n) {
  NoiseSpec spec;
  spec.mu = Vec::Zero(2 * n);
  spec.sigma = Vec::Ones(2 * n);
  return spec;
}

TransitionMatrix build_transition_matrix(const ModelParams& params) {
  const int n = params.n();
  const double alpha = params.alpha();
  const double beta = params.beta();
  TransitionMatrix m;
  m.n = n;
  m.entries = Mat::Zero(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    m.entries(i, i) = 1.0 - alpha;
    m.entries(n + i, n + i) = 1.0 - beta;
    for (int j = 0; j < n; ++j) {
      m.entries(i, n + j) = alpha * params.a()(j);
      m.entries(n + i, j) = -beta * params.b()(j);
    }
  }
  return m;
}

}  // namespace avm
