#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "avm/cli.hpp"
#include "avm/cycle.hpp"
#include "avm/error.hpp"
#include "avm/moments.hpp"
#include "avm/random.hpp"
#include "avm/simulate.hpp"
#include "avm/spectral.hpp"

namespace avm::cli {
namespace {

constexpr double kFigAlpha = 1.09804;
constexpr double kFigBeta = 0.7;
constexpr long kFigT = 700;

json complex_json(std::complex<double> z) { return {{"re", z.real()}, {"im", z.imag()}}; }

json matrix_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

double max_abs(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

bool is_validation(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::WeightViolation:
    case ErrorKind::ForbiddenPair:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::DimensionError:
    case ErrorKind::InvalidNoise:
    case ErrorKind::RangeError:
    case ErrorKind::ConfigError:
      return true;
    default:
      return false;
  }
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

class Stages {
 public:
  template <class F>
  auto run(const std::string& name, F&& fn) {
    const auto start = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      record(name, start);
    } else {
      auto result = fn();
      record(name, start);
      return result;
    }
  }
  const json& timing() const { return timing_; }

 private:
  void record(const std::string& name, std::chrono::steady_clock::time_point start) {
    timing_[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  json timing_ = json::object();
};

// Shared invocation state for one subcommand.
struct Invocation {
  std::string command;
  RunConfig cfg;
  Stages stages;
  json warnings = json::array();
  std::string report_path;
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;

  void warn(const std::string& msg) {
    warnings.push_back(msg);
    *err << "warning: " << one_line(msg) << '\n';
  }

  void emit(json payload) {
    json report;
    report["tool_version"] = AVM_VERSION;
    report["command"] = command;
    report["config_echo"] = to_json(cfg);
    report["payload"] = std::move(payload);
    report["warnings"] = warnings;
    report["timing"] = stages.timing();
    const std::string text = report.dump(2) + "\n";
    if (report_path.empty()) {
      *out << text;
    } else {
      write_atomic(report_path, text);
    }
  }
};

ModelParams model_from(const RunConfig& cfg) { return validate_params(resolved_model(cfg)); }

NoiseSpec noise_from(const RunConfig& cfg, int n) {
  return cfg.noise ? validate_noise(*cfg.noise, n) : standard_noise(n);
}

Vec read_z0(const std::string& source, int n) {
  if (source == "zeros") return Vec::Zero(2 * n);
  const std::string path = source.substr(4);
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot open z0 file '" + path + "'");
  std::vector<double> vals;
  std::string tok;
  std::string line;
  while (std::getline(in, line)) {
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    while (ls >> tok) {
      try {
        std::size_t used = 0;
        vals.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw Error(ErrorKind::ConfigError, "z0 file has a non-numeric entry '" + tok + "'");
      }
    }
  }
  if (vals.size() != static_cast<std::size_t>(2 * n)) {
    throw Error(ErrorKind::DimensionMismatch,
                "z0 file has " + std::to_string(vals.size()) + " values, expected 2n = " +
                    std::to_string(2 * n));
  }
  return Eigen::Map<Vec>(vals.data(), 2 * n);
}

std::string trajectory_csv(const Trajectory& traj, const ModelParams& params) {
  const int n = params.n();
  const AggregateSeries agg = aggregates(traj, params);
  std::string s = "t";
  for (int i = 1; i <= n; ++i) s += ",x_" + std::to_string(i);
  for (int i = 1; i <= n; ++i) s += ",y_" + std::to_string(i);
  s += ",xbar,ybar\n";
  for (std::size_t t = 0; t < traj.z.size(); ++t) {
    s += std::to_string(t);
    for (Eigen::Index k = 0; k < traj.z[t].size(); ++k) s += "," + format_double(traj.z[t](k));
    s += "," + format_double(agg.xbar[t]) + "," + format_double(agg.ybar[t]) + "\n";
  }
  return s;
}

std::string with_suffix(const std::string& path, const std::string& tag) {
  std::filesystem::path p(path);
  const std::string ext = p.has_extension() ? p.extension().string() : ".csv";
  p.replace_extension();
  return p.string() + "_" + tag + ext;
}

json eigen_json(const EigenStructure& eig) {
  json arr = json::array();
  for (const auto& e : eig.entries()) {
    arr.push_back({{"value", complex_json(e.value)}, {"multiplicity", e.multiplicity}});
  }
  return arr;
}

json decomposition_json(const ModelParams& params, const SpectralDecomposition& d,
                        const TransitionMatrix& m) {
  json p;
  p["regime"] = to_string(d.regime());
  p["d1"] = d.classification.bounds.d1;
  p["d2"] = d.classification.bounds.d2;
  p["delta"] = d.classification.bounds.delta;
  p["boundary_tolerance"] = d.classification.tolerance;
  p["eigenvalues"] = eigen_json(d.eig);
  p["spectral_radius"] = d.eig.spectral_radius();
  json blocks = json::array();
  for (const auto& r : d.jordan.runs()) {
    blocks.push_back({{"eigenvalue", r.eigenvalue}, {"block_size", r.block_size}, {"repeat", r.repeat}});
  }
  p["jordan_blocks"] = blocks;
  if (d.scales) {
    p["tau"] = {{"tau_minus", d.scales->tau_minus},
                {"tau_plus", d.scales->tau_plus},
                {"tau_tilde", d.scales->tau_tilde},
                {"lower3", d.scales->lower3},
                {"lower4", d.scales->lower4}};
  }
  p["basis_available"] = d.has_basis();
  if (!d.basis_note.empty()) p["basis_note"] = d.basis_note;
  if (d.has_basis()) {
    const VerificationReport v = verify_decomposition(m.entries, d.jordan, *d.Q, *d.Qinv, 1e-10);
    p["residuals"] = {{"mq_minus_qj", v.mq_minus_qj},
                      {"q_qinv_minus_i", v.q_qinv_minus_i},
                      {"qinv_m_q_minus_j", v.qinv_m_q_minus_j},
                      {"m_norm", v.m_norm},
                      {"tolerance", v.tolerance},
                      {"passed", v.passed}};
  }
  p["n"] = params.n();
  return p;
}

// ---------------------------------------------------------------- decompose

void cmd_decompose(Invocation& inv, const std::string& dump_dir) {
  const ModelParams params = model_from(inv.cfg);
  for (const auto& note : lint_params(params)) inv.warn(note);
  const auto m = inv.stages.run("transition_matrix", [&] { return build_transition_matrix(params); });
  const auto d = inv.stages.run("decompose", [&] { return decompose(params); });
  json payload = inv.stages.run("verify", [&] { return decomposition_json(params, d, m); });
  if (!dump_dir.empty()) {
    const std::filesystem::path dir(dump_dir);
    json files = json::array();
    auto dump = [&](const std::string& name, const Mat& x) {
      const std::string path = (dir / name).string();
      write_atomic(path, matrix_csv(x));
      files.push_back(path);
    };
    dump("M.csv", m.entries);
    if (d.has_basis()) {
      dump("Q.csv", *d.Q);
      dump("Qinv.csv", *d.Qinv);
    }
    payload["dumped"] = files;
  }
  inv.emit(std::move(payload));
}

// ----------------------------------------------------------------- simulate

void cmd_simulate(Invocation& inv) {
  const RunConfig& cfg = inv.cfg;
  if (cfg.run.T < 1) throw Error(ErrorKind::RangeError, "T must be >= 1");
  const ModelParams params = model_from(cfg);
  for (const auto& note : lint_params(params)) inv.warn(note);
  const NoiseSpec spec = noise_from(cfg, params.n());
  const Vec z0 = read_z0(cfg.run.z0, params.n());
  const auto m = build_transition_matrix(params);
  const auto noises = inv.stages.run("noise", [&] {
    return sample_noise_path(spec, params, cfg.run.T, cfg.run.seed);
  });

  const bool want_rec = cfg.run.method != "explicit";
  const bool want_exp = cfg.run.method != "recursive";
  std::optional<Trajectory> rec;
  std::optional<Trajectory> exp;
  if (want_rec) {
    rec = inv.stages.run("recursive", [&] {
      return simulate_recursive(params, m, z0, noises, cfg.run.seed);
    });
  }
  if (want_exp) {
    const auto d = inv.stages.run("decompose", [&] { return decompose(params); });
    exp = inv.stages.run("explicit", [&] {
      return simulate_explicit(params, d, z0, noises, cfg.run.seed);
    });
  }

  json payload;
  payload["method"] = cfg.run.method;
  payload["T"] = cfg.run.T;
  payload["seed"] = cfg.run.seed;
  payload["n"] = params.n();
  payload["regime"] = to_string(classify_regime(params.alpha(), params.beta()).regime);
  auto summary = [&](const Trajectory& tr) {
    const AggregateSeries agg = aggregates(tr, params);
    double peak = 0.0;
    for (const Vec& z : tr.z) peak = std::max(peak, z.cwiseAbs().maxCoeff());
    return json{{"final_xbar", agg.xbar.back()},
                {"final_ybar", agg.ybar.back()},
                {"max_abs_state", peak},
                {"final_state", vec_json(tr.z.back())}};
  };
  if (rec) payload["recursive"] = summary(*rec);
  if (exp) payload["explicit"] = summary(*exp);
  if (rec && exp) {
    const PathDeviation dev = compare_paths(*rec, *exp);
    payload["deviation"] = {{"max_abs_diff", dev.max_abs_diff},
                            {"max_abs_value", dev.max_abs_value},
                            {"relative", dev.max_abs_diff / (1.0 + dev.max_abs_value)}};
  }

  json files = json::array();
  if (!cfg.output.path.empty()) {
    inv.stages.run("write", [&] {
      if (rec && exp) {
        const std::string rp = with_suffix(cfg.output.path, "recursive");
        const std::string ep = with_suffix(cfg.output.path, "explicit");
        const std::string rtext = trajectory_csv(*rec, params);
        const std::string etext = trajectory_csv(*exp, params);
        write_atomic(rp, rtext);
        write_atomic(ep, etext);
        files.push_back(rp);
        files.push_back(ep);
      } else {
        write_atomic(cfg.output.path, trajectory_csv(rec ? *rec : *exp, params));
        files.push_back(cfg.output.path);
      }
    });
  }
  payload["files"] = files;
  inv.emit(std::move(payload));
}

// ------------------------------------------------------------------ moments

void cmd_moments(Invocation& inv, const std::string& dump_dir) {
  const RunConfig& cfg = inv.cfg;
  const MomentsSection& ms = cfg.moments;
  if (ms.t_grid.empty() || ms.tau_grid.empty()) {
    throw Error(ErrorKind::RangeError, "t and tau grids must be nonempty");
  }
  for (long tau : ms.tau_grid) {
    if (tau < 0) throw Error(ErrorKind::RangeError, "tau grid entries must be >= 0");
  }
  if (ms.mc_reps < 0) throw Error(ErrorKind::RangeError, "mc_reps must be >= 0");
  if (!(ms.g_scale >= 0.0)) throw Error(ErrorKind::InvalidNoise, "g_scale must be >= 0");

  const ModelParams params = model_from(cfg);
  const NoiseSpec spec = noise_from(cfg, params.n());
  const auto d = inv.stages.run("decompose", [&] { return decompose(params); });
  const int dim = 2 * params.n();
  const Mat G = ms.g_scale * Mat::Identity(dim, dim);
  const MomentInputs inputs = make_moment_inputs(params, spec, G);

  const CovarianceReport rep = inv.stages.run("covariance", [&] {
    return stationarity_diagnostic(inputs, d, ms.t_grid, ms.tau_grid);
  });

  json grid = json::array();
  for (const auto& c : rep.grid) {
    const CrossCovariance truncated = cross_covariance(inputs, d, c.t, c.tau, ShockSum::Truncated);
    grid.push_back({{"t", c.t},
                    {"tau", c.tau},
                    {"transformed", matrix_json(c.transformed)},
                    {"original", matrix_json(c.original)},
                    {"truncated_sum_difference", max_abs(c.transformed - truncated.transformed)}});
  }
  json payload;
  payload["regime"] = to_string(d.regime());
  payload["grid"] = grid;
  payload["stationarity_gap"] = rep.stationarity_gap;
  payload["stationarity_gap_original"] = rep.stationarity_gap_original;

  if (condition45(d.eig)) {
    const LimitReport lim = inv.stages.run("limits", [&] {
      return limiting_moments(inputs, d, ms.tail_tol);
    });
    payload["limits"] = {{"condition45", true},
                         {"lambda_tilde", lim.lambda_tilde},
                         {"limiting_mean", vec_json(lim.limiting_mean)},
                         {"product_limit_cov", matrix_json(lim.product_limit_cov)},
                         {"ma_infinity_cov", matrix_json(lim.ma_infinity_cov)},
                         {"discrepancy", lim.discrepancy},
                         {"truncation_terms", lim.truncation_terms},
                         {"tail_bound", lim.tail_bound}};
  } else {
    payload["limits"] = {{"condition45", false}};
    inv.warn("spectral radius not in (0, 1); limits skipped");
  }

  if (ms.mc_reps > 0) {
    json mc = json::array();
    inv.stages.run("monte_carlo", [&] {
      std::uint64_t idx = 0;
      for (const auto& c : rep.grid) {
        const MonteCarloMatrix est = monte_carlo_cross_covariance(
            params, spec, G, Vec::Zero(dim), c.t, c.tau, ms.mc_reps,
            derive_seed(ms.mc_seed, idx++));
        mc.push_back({{"t", c.t},
                      {"tau", c.tau},
                      {"replications", est.replications},
                      {"max_standard_score", max_standard_score(est, c.original)}});
      }
    });
    payload["monte_carlo"] = mc;
  }

  if (!dump_dir.empty()) {
    const std::filesystem::path dir(dump_dir);
    json files = json::array();
    for (const auto& c : rep.grid) {
      const std::string tag = "t" + std::to_string(c.t) + "_tau" + std::to_string(c.tau);
      const std::string op = (dir / ("gamma_" + tag + ".csv")).string();
      const std::string tp = (dir / ("gamma_tilde_" + tag + ".csv")).string();
      write_atomic(op, matrix_csv(c.original));
      write_atomic(tp, matrix_csv(c.transformed));
      files.push_back(op);
      files.push_back(tp);
    }
    payload["dumped"] = files;
  }
  inv.emit(std::move(payload));
}

// -------------------------------------------------------------------- cycle

json cycle_model_json(const CycleModel& m) {
  json j;
  j["alpha"] = m.alpha;
  j["beta"] = m.beta;
  j["kappa1"] = m.kappa1;
  j["kappa2"] = m.kappa2;
  j["delta1"] = m.delta1;
  j["rho1"] = complex_json(m.rho1);
  j["rho2"] = complex_json(m.rho2);
  j["rho_mod"] = m.rho_mod;
  j["regime"] = to_string(m.regime);
  j["invertible"] = m.invertible;
  const auto region = region_invertible(m.alpha, m.beta);
  j["region_invertible"] = region ? json(*region) : json(nullptr);
  if (m.regime == CycleRegime::ComplexOscillatory) {
    j["omega"] = m.omega;
    j["predicted_period"] = m.period();
    j["strictly_periodic"] = m.strictly_periodic();
  }
  return j;
}

void cmd_cycle(Invocation& inv) {
  const RunConfig& cfg = inv.cfg;
  const double alpha = cfg.model.alpha;
  const double beta = cfg.model.beta;
  if (!std::isfinite(alpha) || !std::isfinite(beta) || (alpha == 0.0 && beta == 0.0) ||
      (alpha == 1.0 && beta == 1.0)) {
    throw Error(ErrorKind::ForbiddenPair, "(alpha, beta) is excluded or not finite");
  }
  const long T = cfg.run.T;
  if (T < 2) throw Error(ErrorKind::RangeError, "cycle simulation needs T >= 2");

  const CycleModel model = reduce_to_cycle(alpha, beta);
  const ScalarNoise noise = inv.stages.run("noise", [&] {
    return sample_scalar_noise(T + 2, cfg.cycle.eps_sd, cfg.cycle.eta_sd, cfg.run.seed);
  });
  const std::vector<double> x = inv.stages.run("simulate", [&] {
    return simulate_cycle(model, noise, cfg.cycle.x0, cfg.cycle.x1, T);
  });
  const std::vector<double> h = forcing_series(noise, alpha, beta, T + 1);

  json payload;
  payload["model"] = cycle_model_json(model);
  payload["T"] = T;
  payload["seed"] = cfg.run.seed;
  payload["rows"] = T + 1;
  if (cfg.cycle.analyze) {
    json a;
    try {
      // x(0), x(1) are the supplied initial values; only the simulated part is analyzed.
      const std::vector<double> simulated(x.begin() + 2, x.end());
      const PeriodEstimate est =
          inv.stages.run("periodogram", [&] { return dominant_period(simulated); });
      a["estimated_period"] = est.period;
      a["frequency"] = est.frequency;
      a["peak_bin"] = est.peak_bin;
      a["prominence"] = est.prominence;
      a["significant"] = est.significant;
      if (model.regime == CycleRegime::ComplexOscillatory) {
        a["predicted_period"] = model.period();
        a["relative_error"] = est.period / model.period() - 1.0;
      }
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::TooShort) throw;
      inv.warn(std::string("TooShort: ") + e.what());
      a["skipped"] = e.what();
    }
    payload["analysis"] = a;
  }

  if (!cfg.output.path.empty()) {
    inv.stages.run("write", [&] {
      std::string s = "t,xbar,h\n";
      for (long t = 0; t <= T; ++t) {
        const auto i = static_cast<std::size_t>(t);
        s += std::to_string(t) + "," + format_double(x[i]) + "," + format_double(h[i]) + "\n";
      }
      write_atomic(cfg.output.path, s);
    });
    payload["files"] = json::array({cfg.output.path});
  }
  inv.emit(std::move(payload));
}

// ------------------------------------------------------------------- verify

struct CheckList {
  json items = json::array();
  bool all_passed = true;

  void add(const std::string& name, double value, double tol, bool passed) {
    items.push_back({{"name", name}, {"value", value}, {"tolerance", tol}, {"passed", passed}});
    all_passed = all_passed && passed;
  }
  void skip(const std::string& name, const std::string& why) {
    items.push_back({{"name", name}, {"skipped", why}});
  }
};

double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

bool cmd_verify(Invocation& inv) {
  const RunConfig& cfg = inv.cfg;
  const ModelParams params = model_from(cfg);
  for (const auto& note : lint_params(params)) inv.warn(note);
  const NoiseSpec spec = noise_from(cfg, params.n());
  const int n = params.n();
  const int dim = 2 * n;
  const auto m = build_transition_matrix(params);
  const auto d = decompose(params);
  CheckList checks;

  inv.stages.run("matrix", [&] {
    const Mat& e = m.entries;
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double id = i == j ? 1.0 : 0.0;
        worst = std::max({worst, std::abs(e(i, j) - (1.0 - params.alpha()) * id),
                          std::abs(e(n + i, n + j) - (1.0 - params.beta()) * id),
                          std::abs(e(i, n + j) - params.alpha() * params.a()(j)),
                          std::abs(e(n + i, j) + params.beta() * params.b()(j))});
      }
    }
    checks.add("transition_matrix_blocks", worst, 0.0, worst == 0.0);
  });

  inv.stages.run("spectrum", [&] {
    if (n <= 20) {
      double worst = 0.0;
      for (double lam : {-0.7, 0.05, 0.5, 1.3, 1.0 - params.alpha() + 0.01}) {
        const double det = (lam * Mat::Identity(dim, dim) - m.entries).determinant();
        const double fac = characteristic_polynomial(params, lam);
        worst = std::max(worst, std::abs(det - fac) / std::max(std::abs(det), 1e-300));
      }
      checks.add("characteristic_polynomial_vs_det", worst, 1e-8, worst < 1e-8);
    } else {
      checks.skip("characteristic_polynomial_vs_det", "n > 20");
    }
    const double tr = m.entries.trace();
    const double tr_gap = std::abs(d.eig.trace().real() - tr);
    checks.add("eigenvalue_sum_vs_trace", tr_gap, 1e-10 * std::max(1.0, std::abs(tr)),
               tr_gap < 1e-10 * std::max(1.0, std::abs(tr)));
    const CycleModel cm = reduce_to_cycle(params.alpha(), params.beta());
    const bool agree = matching_spectral_regime(cm.regime) == d.regime();
    checks.add("cycle_regime_agrees", agree ? 0.0 : 1.0, 0.0, agree);
  });

  if (d.has_basis()) {
    inv.stages.run("basis", [&] {
      const VerificationReport v = verify_decomposition(m.entries, d.jordan, *d.Q, *d.Qinv, 1e-10);
      checks.add("mq_minus_qj", v.mq_minus_qj, 1e-10 * v.m_norm, v.mq_minus_qj < 1e-10 * v.m_norm);
      checks.add("q_qinv_minus_i", v.q_qinv_minus_i, 1e-10, v.q_qinv_minus_i < 1e-10);
      if (n <= 50) {
        const double gap = max_abs(*d.Qinv - d.Q->inverse());
        checks.add("structured_vs_generic_inverse", gap, 1e-8, gap < 1e-8);
      }
    });
  } else {
    checks.skip("basis", d.basis_note);
  }

  inv.stages.run("simulation", [&] {
    const long T = std::max(cfg.run.T, 2L);
    const auto noises = sample_noise_path(spec, params, T, cfg.run.seed);
    try {
      const Trajectory rec = simulate_recursive(params, m, Vec::Zero(dim), noises, cfg.run.seed);
      if (d.has_basis()) {
        const Trajectory exp = simulate_explicit(params, d, Vec::Zero(dim), noises, cfg.run.seed);
        const PathDeviation dev = compare_paths(rec, exp);
        const double tol = 1e-8 * (1.0 + dev.max_abs_value);
        checks.add("explicit_vs_recursive", dev.max_abs_diff, tol, dev.max_abs_diff < tol);
      }
      const AggregateSeries agg = aggregates(rec, params);
      const ScalarNoise sn = scalar_noise_from(noises, params);
      const CycleModel cm = reduce_to_cycle(params.alpha(), params.beta());
      const std::vector<double> h = forcing_series(sn, params.alpha(), params.beta(), T - 1);
      double worst = 0.0;
      double scale = 1.0;
      for (long t = 0; t + 2 <= T; ++t) {
        worst = std::max(worst, std::abs(cycle_residual(cm, agg.xbar, h, t)));
        scale = std::max({scale, std::abs(agg.xbar[static_cast<std::size_t>(t) + 2]),
                          std::abs(h[static_cast<std::size_t>(t)])});
      }
      checks.add("reduction_residual", worst, 1e-10 * scale, worst < 1e-10 * scale);
    } catch (const NonFiniteStateError& e) {
      checks.skip("simulation", e.what());
    }
  });

  if (d.has_basis()) {
    inv.stages.run("moments", [&] {
      const MomentInputs inputs = make_moment_inputs(params, spec, Mat::Zero(dim, dim));
      const CovarianceReport rep = stationarity_diagnostic(inputs, d, {2, 5, 10}, {0, 1});
      checks.add("nonstationarity_gap", rep.stationarity_gap, 0.0, rep.stationarity_gap > 0.0);
      const bool both = (rep.stationarity_gap > 0.0) == (rep.stationarity_gap_original > 0.0);
      checks.add("gap_coordinate_agreement", rep.stationarity_gap_original, 0.0, both);
      if (condition45(d.eig)) {
        const LimitReport lim = limiting_moments(inputs, d, 1e-12);
        double worst = 0.0;
        const Vec diag = d.jordan.diagonal_entries();
        for (Eigen::Index k = 0; k < diag.size(); ++k) {
          double sum = 0.0;
          double pw = 1.0;
          for (long i = 0; i <= lim.truncation_terms; ++i, pw *= diag(k)) sum += pw;
          worst = std::max(worst, rel_diff(sum, 1.0 / (1.0 - diag(k))));
        }
        checks.add("geometric_series_limit", worst, 1e-10, worst < 1e-10);
      } else {
        checks.skip("geometric_series_limit", "spectral radius not in (0, 1)");
      }
    });
  }

  json payload;
  payload["regime"] = to_string(d.regime());
  payload["checks"] = checks.items;
  payload["passed"] = checks.all_passed;
  inv.emit(std::move(payload));
  return checks.all_passed;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Vector autoregressive agent model toolkit", "avm"};
  app.require_subcommand(1);
  app.set_version_flag("--version", AVM_VERSION);

  std::string config_path;
  std::string report_path;
  std::optional<long> n;
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<long> T;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> method;
  std::optional<std::string> z0;
  std::optional<std::string> out_path;
  std::string dump_dir;
  std::vector<long> t_grid;
  std::vector<long> tau_grid;
  std::optional<long> mc_reps;
  std::optional<std::uint64_t> mc_seed;
  std::optional<double> tail_tol;
  std::optional<double> g_scale;
  std::optional<double> eps_sd;
  std::optional<double> eta_sd;
  std::optional<double> x0;
  std::optional<double> x1;
  bool analyze = false;

  auto common = [&](CLI::App* sub, bool model_flags) {
    sub->add_option("--config", config_path, "JSON run configuration");
    sub->add_option("--report", report_path, "write the JSON report here instead of stdout");
    if (model_flags) {
      sub->add_option("--n", n, "number of agents (uniform weights unless configured)");
      sub->add_option("--alpha", alpha, "output adjustment constant");
      sub->add_option("--beta", beta, "sentiment adjustment constant");
    }
  };

  auto* decompose_cmd = app.add_subcommand("decompose", "regime, eigenvalues, Q and Q^-1");
  common(decompose_cmd, true);
  decompose_cmd->add_option("--dump-matrices", dump_dir, "directory for M.csv, Q.csv, Qinv.csv");

  auto* simulate_cmd = app.add_subcommand("simulate", "simulate the vector model");
  common(simulate_cmd, true);
  simulate_cmd->add_option("--T", T, "number of steps");
  simulate_cmd->add_option("--seed", seed, "64-bit seed");
  simulate_cmd->add_option("--method", method, "recursive | explicit | both");
  simulate_cmd->add_option("--z0", z0, "zeros | csv:<path>");
  simulate_cmd->add_option("--out", out_path, "trajectory CSV");

  auto* moments_cmd = app.add_subcommand("moments", "cross-covariances and limits");
  common(moments_cmd, true);
  moments_cmd->add_option("--t-grid", t_grid, "comma-separated t values (>= 2)")->delimiter(',');
  moments_cmd->add_option("--tau-grid", tau_grid, "comma-separated lags")->delimiter(',');
  moments_cmd->add_option("--mc-reps", mc_reps, "Monte Carlo replications (0 skips)");
  moments_cmd->add_option("--mc-seed", mc_seed, "Monte Carlo base seed");
  moments_cmd->add_option("--tail-tol", tail_tol, "truncation tolerance for infinite sums");
  moments_cmd->add_option("--g-scale", g_scale, "Cov(z_0) = g * I");
  moments_cmd->add_option("--dump", dump_dir, "directory for covariance CSVs");

  auto* cycle_cmd = app.add_subcommand("cycle", "scalar business-cycle equation");
  common(cycle_cmd, false);
  cycle_cmd->add_option("--alpha", alpha, "output adjustment constant");
  cycle_cmd->add_option("--beta", beta, "sentiment adjustment constant");
  cycle_cmd->add_option("--T", T, "number of steps");
  cycle_cmd->add_option("--seed", seed, "64-bit seed");
  cycle_cmd->add_option("--eps-sd", eps_sd, "sd of epsbar");
  cycle_cmd->add_option("--eta-sd", eta_sd, "sd of etabar");
  cycle_cmd->add_option("--x0", x0, "xbar(0)");
  cycle_cmd->add_option("--x1", x1, "xbar(1)");
  cycle_cmd->add_option("--out", out_path, "CSV with columns t, xbar, h");
  cycle_cmd->add_flag("--analyze", analyze, "attach a periodogram analysis");

  auto* fig_cmd = app.add_subcommand("fig-a", "the oscillating trajectory setup (alpha 1.09804, beta 0.7)");
  common(fig_cmd, false);
  fig_cmd->add_option("--seed", seed, "64-bit seed (default 1)");
  fig_cmd->add_option("--T", T, "number of steps (default 700)");
  fig_cmd->add_option("--out", out_path, "CSV with columns t, xbar, h");

  auto* verify_cmd = app.add_subcommand("verify", "run the invariant checks for a configuration");
  common(verify_cmd, true);
  verify_cmd->add_option("--T", T, "simulation length for path checks");
  verify_cmd->add_option("--seed", seed, "64-bit seed");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << AVM_VERSION << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: ConfigError: " << one_line(e.what()) << '\n';
    return 2;
  }

  Invocation inv;
  inv.out = &out;
  inv.err = &err;
  inv.report_path = report_path;
  try {
    CLI::App* sub = app.get_subcommands().front();
    inv.command = sub->get_name();
    const bool cycle_like = sub == cycle_cmd || sub == fig_cmd;

    if (!config_path.empty()) {
      inv.cfg = load_config(config_path);
    } else if (cycle_like) {
      inv.cfg.model.alpha = kFigAlpha;
      inv.cfg.model.beta = kFigBeta;
      if (sub == fig_cmd) {
        inv.cfg.run.T = kFigT;
        inv.cfg.run.seed = 1;
      }
    }

    RunConfig& cfg = inv.cfg;
    if (n) {
      if (cfg.model.n != *n) {
        cfg.model.a.clear();
        cfg.model.b.clear();
      }
      cfg.model.n = *n;
    }
    if (alpha) cfg.model.alpha = *alpha;
    if (beta) cfg.model.beta = *beta;
    if (T) cfg.run.T = *T;
    if (seed) cfg.run.seed = *seed;
    if (method) cfg.run.method = *method;
    if (z0) cfg.run.z0 = *z0;
    if (out_path) cfg.output.path = *out_path;
    if (!t_grid.empty()) cfg.moments.t_grid = t_grid;
    if (!tau_grid.empty()) cfg.moments.tau_grid = tau_grid;
    if (mc_reps) cfg.moments.mc_reps = *mc_reps;
    if (mc_seed) cfg.moments.mc_seed = *mc_seed;
    if (tail_tol) cfg.moments.tail_tol = *tail_tol;
    if (g_scale) cfg.moments.g_scale = *g_scale;
    if (eps_sd) cfg.cycle.eps_sd = *eps_sd;
    if (eta_sd) cfg.cycle.eta_sd = *eta_sd;
    if (x0) cfg.cycle.x0 = *x0;
    if (x1) cfg.cycle.x1 = *x1;
    if (analyze || sub == fig_cmd) cfg.cycle.analyze = true;
    // Re-validate the merged configuration through the same schema.
    cfg = parse_config(to_json(cfg));

    if (!cycle_like && cfg.model.n == 0) {
      throw Error(ErrorKind::ConfigError, "missing 'n' (use --config or --n)");
    }

    if (sub == decompose_cmd) {
      cmd_decompose(inv, dump_dir);
    } else if (sub == simulate_cmd) {
      cmd_simulate(inv);
    } else if (sub == moments_cmd) {
      cmd_moments(inv, dump_dir);
    } else if (cycle_like) {
      cmd_cycle(inv);
    } else if (sub == verify_cmd) {
      return cmd_verify(inv) ? 0 : 1;
    }
    return 0;
  } catch (const Error& e) {
    err << "error: " << to_string(e.kind()) << ": " << one_line(e.what()) << '\n';
    return is_validation(e.kind()) ? 2 : 1;
  } catch (const std::exception& e) {
    err << "error: Internal: " << one_line(e.what()) << '\n';
    return 1;
  }
}

}  // namespace avm::cli
