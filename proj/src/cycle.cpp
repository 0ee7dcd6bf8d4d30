#include "avm/cycle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "avm/error.hpp"
#include "avm/random.hpp"

namespace avm {
namespace {

void require_oscillatory(const CycleModel& model, const char* what) {
  if (model.regime != CycleRegime::ComplexOscillatory) {
    throw Error(ErrorKind::WrongRegime,
                std::string(what) + " needs the complex oscillatory regime, got " +
                    std::string(to_string(model.regime)));
  }
}

}  // namespace

std::string_view to_string(CycleRegime regime) noexcept {
  switch (regime) {
    case CycleRegime::ComplexOscillatory: return "complex_oscillatory";
    case CycleRegime::DistinctReal: return "distinct_real";
    case CycleRegime::RepeatedReal: return "repeated_real";
  }
  return "unknown";
}

double CycleModel::period() const {
  require_oscillatory(*this, "period");
  return 2.0 * std::numbers::pi / omega;
}

bool CycleModel::strictly_periodic() const {
  return regime == CycleRegime::ComplexOscillatory &&
         std::abs(rho_mod - 1.0) <= 1e-12;
}

CycleModel reduce_to_cycle(double alpha, double beta, double boundary_tol) {
  CycleModel m;
  m.alpha = alpha;
  m.beta = beta;
  m.kappa1 = alpha + beta - 2.0;
  m.kappa2 = 1.0 - alpha - beta + 2.0 * alpha * beta;
  m.delta1 = m.kappa1 * m.kappa1 - 4.0 * m.kappa2;
  m.tolerance = boundary_tol * std::max(1.0, alpha * alpha + beta * beta);
  m.invertible = m.kappa2 > 0.0 && m.kappa2 < 1.0;

  const double centre = -0.5 * m.kappa1;
  if (std::abs(m.delta1) <= m.tolerance) {
    m.regime = CycleRegime::RepeatedReal;
    m.rho1 = m.rho2 = centre;
    m.rho_mod = std::abs(centre);
  } else if (m.delta1 < 0.0) {
    m.regime = CycleRegime::ComplexOscillatory;
    const double half = 0.5 * std::sqrt(-m.delta1);
    m.rho1 = {centre, half};
    m.rho2 = {centre, -half};
    m.rho_mod = std::sqrt(m.kappa2);
    m.omega = std::atan2(half, centre);
  } else {
    m.regime = CycleRegime::DistinctReal;
    const double half = 0.5 * std::sqrt(m.delta1);
    m.rho1 = centre + half;
    m.rho2 = centre - half;
    m.rho_mod = std::max(std::abs(centre + half), std::abs(centre - half));
  }
  return m;
}

Regime matching_spectral_regime(CycleRegime regime) noexcept {
  switch (regime) {
    case CycleRegime::ComplexOscillatory: return Regime::ComplexConjugate;
    case CycleRegime::DistinctReal: return Regime::DiagonalizableReal;
    case CycleRegime::RepeatedReal: return Regime::RepeatedRootJordan;
  }
  return Regime::DiagonalizableReal;
}

std::optional<bool> region_invertible(double alpha, double beta) {
  if (beta == 0.5) return std::nullopt;
  const double lo_hi_a = (beta - 1.0) / (2.0 * beta - 1.0);
  const double lo_hi_b = beta / (2.0 * beta - 1.0);
  if (beta > 0.5) return lo_hi_a < alpha && alpha < lo_hi_b;
  return lo_hi_b < alpha && alpha < lo_hi_a;
}

ScalarNoise sample_scalar_noise(long length, double eps_sd, double eta_sd,
                                std::uint64_t seed, double eps_mean,
                                double eta_mean) {
  if (length < 1) throw Error(ErrorKind::RangeError, "noise length must be >= 1");
  if (!(eps_sd > 0.0) || !(eta_sd > 0.0)) {
    throw Error(ErrorKind::InvalidNoise, "noise standard deviations must be > 0");
  }
  ScalarNoise s;
  s.eps_mean = eps_mean;
  s.eps_sd = eps_sd;
  s.eta_mean = eta_mean;
  s.eta_sd = eta_sd;
  s.seed = seed;
  s.eps_bar.reserve(static_cast<std::size_t>(length));
  s.eta_bar.reserve(static_cast<std::size_t>(length));
  Gaussian rng(seed);
  for (long t = 0; t < length; ++t) {
    s.eps_bar.push_back(rng(eps_mean, eps_sd));
    s.eta_bar.push_back(rng(eta_mean, eta_sd));
  }
  return s;
}

ScalarNoise scalar_noise_from(const std::vector<NoiseDraw>& noises,
                              const ModelParams& params) {
  ScalarNoise s;
  s.eps_bar.reserve(noises.size());
  s.eta_bar.reserve(noises.size());
  for (const auto& d : noises) {
    s.eps_bar.push_back(params.b().dot(d.epsilon));
    s.eta_bar.push_back(params.a().dot(d.eta));
  }
  return s;
}

double forcing_term(const ScalarNoise& noise, double alpha, double beta, long t) {
  if (t < 0 || static_cast<std::size_t>(t) + 1 >= noise.eps_bar.size() ||
      static_cast<std::size_t>(t) >= noise.eta_bar.size()) {
    std::ostringstream os;
    os << "h(" << t << ") needs epsbar up to index " << t + 1 << " (have "
       << noise.eps_bar.size() << ")";
    throw Error(ErrorKind::IndexError, os.str());
  }
  const auto i = static_cast<std::size_t>(t);
  const double e0 = noise.eps_bar[i];
  const double e1 = noise.eps_bar[i + 1];
  return alpha * (e1 - e0) + alpha * beta * (e0 - noise.eta_bar[i]);
}

std::vector<double> forcing_series(const ScalarNoise& noise, double alpha,
                                   double beta, long count) {
  std::vector<double> h;
  h.reserve(static_cast<std::size_t>(std::max(0L, count)));
  for (long t = 0; t < count; ++t) h.push_back(forcing_term(noise, alpha, beta, t));
  return h;
}

std::vector<double> simulate_cycle(const CycleModel& model,
                                   const ScalarNoise& noise, double x0,
                                   double x1, long T) {
  if (T < 2) throw Error(ErrorKind::RangeError, "cycle simulation needs T >= 2");
  std::vector<double> x(static_cast<std::size_t>(T) + 1);
  x[0] = x0;
  x[1] = x1;
  for (long t = 0; t + 2 <= T; ++t) {
    const auto i = static_cast<std::size_t>(t);
    const double h = forcing_term(noise, model.alpha, model.beta, t);
    x[i + 2] = -model.kappa1 * x[i + 1] - model.kappa2 * x[i] + h;
    if (!std::isfinite(x[i + 2])) {
      std::ostringstream os;
      os << "cycle path became non-finite at t = " << t + 2;
      throw NonFiniteStateError(t + 2, os.str());
    }
  }
  return x;
}

CycleConstants fit_constants(const CycleModel& model, double x0, double x1) {
  require_oscillatory(model, "fit_constants");
  if (x0 == 0.0 && x1 == 0.0) return {};
  // c1 cos c2 = x0, c1 sin c2 = (x0 cos w - x1 / |rho|) / sin w
  const double s = (x0 * std::cos(model.omega) - x1 / model.rho_mod) /
                   std::sin(model.omega);
  return {std::hypot(x0, s), std::atan2(s, x0)};
}

CycleSolution homogeneous_solution(const CycleModel& model, double c1,
                                   double c2, long t_max) {
  require_oscillatory(model, "homogeneous_solution");
  if (t_max < 0) throw Error(ErrorKind::RangeError, "t_max must be >= 0");
  CycleSolution sol;
  sol.c1 = c1;
  sol.c2 = c2;
  sol.values.reserve(static_cast<std::size_t>(t_max) + 1);
  for (long t = 0; t <= t_max; ++t) {
    const double td = static_cast<double>(t);
    sol.values.push_back(c1 * std::pow(model.rho_mod, td) *
                         std::cos(c2 + model.omega * td));
  }
  return sol;
}

double HomogeneousFit::operator()(const CycleModel& model, long t) const {
  const double td = static_cast<double>(t);
  switch (regime) {
    case CycleRegime::ComplexOscillatory:
      return c1 * std::pow(model.rho_mod, td) * std::cos(c2 + model.omega * td);
    case CycleRegime::DistinctReal:
      return c1 * std::pow(model.rho1.real(), td) +
             c2 * std::pow(model.rho2.real(), td);
    case CycleRegime::RepeatedReal:
      return (c1 + c2 * td) * std::pow(model.rho1.real(), td);
  }
  return 0.0;
}

HomogeneousFit fit_homogeneous(const CycleModel& model, double x0, double x1) {
  HomogeneousFit fit;
  fit.regime = model.regime;
  switch (model.regime) {
    case CycleRegime::ComplexOscillatory: {
      const CycleConstants c = fit_constants(model, x0, x1);
      fit.c1 = c.c1;
      fit.c2 = c.c2;
      break;
    }
    case CycleRegime::DistinctReal: {
      const double r1 = model.rho1.real();
      const double r2 = model.rho2.real();
      fit.c2 = (x1 - r1 * x0) / (r2 - r1);
      fit.c1 = x0 - fit.c2;
      break;
    }
    case CycleRegime::RepeatedReal: {
      const double r = model.rho1.real();
      if (r == 0.0) {
        if (x1 != 0.0) {
          throw Error(ErrorKind::DegenerateRoot,
                      "double root at zero cannot reach a nonzero xbar(1)");
        }
        fit.c1 = x0;
        break;
      }
      fit.c1 = x0;
      fit.c2 = x1 / r - x0;
      break;
    }
  }
  return fit;
}

std::vector<double> psi_weights(const CycleModel& model, long count) {
  std::vector<double> psi;
  if (count <= 0) return psi;
  psi.reserve(static_cast<std::size_t>(count));
  psi.push_back(1.0);
  if (count > 1) psi.push_back(-model.kappa1);
  for (long s = 2; s < count; ++s) {
    const auto i = static_cast<std::size_t>(s);
    psi.push_back(-model.kappa1 * psi[i - 1] - model.kappa2 * psi[i - 2]);
  }
  return psi;
}

ParticularSolution particular_solution(const CycleModel& model,
                                       const std::vector<double>& h,
                                       double trunc_tol) {
  if (!model.invertible || !(model.rho_mod < 1.0) || !(model.rho_mod > 0.0)) {
    std::ostringstream os;
    os << "lag operators are not invertible (kappa2 = " << model.kappa2
       << ", largest root modulus = " << model.rho_mod << ")";
    throw Error(ErrorKind::NotInvertible, os.str());
  }
  if (!(trunc_tol > 0.0 && trunc_tol < 1.0)) {
    throw Error(ErrorKind::RangeError, "truncation tolerance must lie in (0, 1)");
  }
  const double rho = model.rho_mod;
  ParticularSolution out;
  out.truncation = static_cast<long>(std::ceil(std::log(trunc_tol) / std::log(rho)));
  const std::vector<double> psi = psi_weights(model, out.truncation + 1);

  const long len = static_cast<long>(h.size());
  out.values.assign(static_cast<std::size_t>(len) + 2, 0.0);
  for (long t = 2; t < len + 2; ++t) {
    const long top = std::min(out.truncation, t - 2);
    double acc = 0.0;
    for (long s = 0; s <= top; ++s) {
      acc += psi[static_cast<std::size_t>(s)] * h[static_cast<std::size_t>(t - 2 - s)];
    }
    out.values[static_cast<std::size_t>(t)] = acc;
  }

  // |psi_s| <= (s+1) rho^s, so the dropped tail per value is at most
  // sup|h| rho^(K+1) [(K+2)/(1-rho) + rho/(1-rho)^2].
  double sup_h = 0.0;
  for (double v : h) sup_h = std::max(sup_h, std::abs(v));
  const double k = static_cast<double>(out.truncation);
  const double tail = std::pow(rho, k + 1.0) *
                      ((k + 2.0) / (1.0 - rho) + rho / ((1.0 - rho) * (1.0 - rho)));
  out.residual_bound =
      (1.0 + std::abs(model.kappa1) + std::abs(model.kappa2)) * tail * sup_h;
  return out;
}

double cycle_residual(const CycleModel& model, const std::vector<double>& x,
                      const std::vector<double>& h, long t) {
  const auto i = static_cast<std::size_t>(t);
  if (t < 0 || i + 2 >= x.size() || i >= h.size()) {
    throw Error(ErrorKind::IndexError, "residual index out of range");
  }
  return x[i + 2] + model.kappa1 * x[i + 1] + model.kappa2 * x[i] - h[i];
}

}  // namespace avm
