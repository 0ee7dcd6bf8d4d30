#include <fstream>
#include <set>
#include <sstream>

#include "avm/cli.hpp"
#include "avm/error.hpp"

namespace avm::cli {
namespace {

[[noreturn]] void config_error(const std::string& msg) {
  throw Error(ErrorKind::ConfigError, msg);
}

void reject_unknown(const json& obj, const std::string& where,
                    const std::set<std::string>& allowed) {
  if (!obj.is_object()) config_error(where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) {
      config_error("unknown key '" + (where.empty() ? key : where + "." + key) + "'");
    }
  }
}

template <class T>
T get_as(const json& obj, const std::string& key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    config_error("key '" + where + key + "' has the wrong type");
  }
}

template <class T>
void read_opt(const json& obj, const std::string& key, const std::string& where, T& dst) {
  if (obj.contains(key)) dst = get_as<T>(obj, key, where);
}

}  // namespace

RunConfig parse_config(const json& doc) {
  reject_unknown(doc, "", {"n", "alpha", "beta", "a", "b", "noise", "run",
                           "output", "moments", "cycle"});
  RunConfig cfg;
  read_opt(doc, "n", "", cfg.model.n);
  read_opt(doc, "alpha", "", cfg.model.alpha);
  read_opt(doc, "beta", "", cfg.model.beta);
  read_opt(doc, "a", "", cfg.model.a);
  read_opt(doc, "b", "", cfg.model.b);

  if (doc.contains("noise")) {
    const json& nz = doc.at("noise");
    reject_unknown(nz, "noise", {"mu", "sigma", "zero_noise"});
    RawNoise raw;
    read_opt(nz, "mu", "noise.", raw.mu);
    read_opt(nz, "sigma", "noise.", raw.sigma);
    read_opt(nz, "zero_noise", "noise.", raw.zero_noise);
    cfg.noise = raw;
  }
  if (doc.contains("run")) {
    const json& r = doc.at("run");
    reject_unknown(r, "run", {"T", "seed", "method", "z0"});
    read_opt(r, "T", "run.", cfg.run.T);
    read_opt(r, "seed", "run.", cfg.run.seed);
    read_opt(r, "method", "run.", cfg.run.method);
    read_opt(r, "z0", "run.", cfg.run.z0);
  }
  if (doc.contains("output")) {
    const json& o = doc.at("output");
    reject_unknown(o, "output", {"path", "format", "precision"});
    read_opt(o, "path", "output.", cfg.output.path);
    read_opt(o, "format", "output.", cfg.output.format);
    read_opt(o, "precision", "output.", cfg.output.precision);
  }
  if (doc.contains("moments")) {
    const json& m = doc.at("moments");
    reject_unknown(m, "moments",
                   {"t_grid", "tau_grid", "g_scale", "mc_reps", "mc_seed", "tail_tol"});
    read_opt(m, "t_grid", "moments.", cfg.moments.t_grid);
    read_opt(m, "tau_grid", "moments.", cfg.moments.tau_grid);
    read_opt(m, "g_scale", "moments.", cfg.moments.g_scale);
    read_opt(m, "mc_reps", "moments.", cfg.moments.mc_reps);
    read_opt(m, "mc_seed", "moments.", cfg.moments.mc_seed);
    read_opt(m, "tail_tol", "moments.", cfg.moments.tail_tol);
  }
  if (doc.contains("cycle")) {
    const json& c = doc.at("cycle");
    reject_unknown(c, "cycle", {"eps_sd", "eta_sd", "x0", "x1", "analyze"});
    read_opt(c, "eps_sd", "cycle.", cfg.cycle.eps_sd);
    read_opt(c, "eta_sd", "cycle.", cfg.cycle.eta_sd);
    read_opt(c, "x0", "cycle.", cfg.cycle.x0);
    read_opt(c, "x1", "cycle.", cfg.cycle.x1);
    read_opt(c, "analyze", "cycle.", cfg.cycle.analyze);
  }

  const auto& method = cfg.run.method;
  if (method != "recursive" && method != "explicit" && method != "both") {
    config_error("run.method must be recursive, explicit or both, got '" + method + "'");
  }
  if (cfg.run.z0 != "zeros" && cfg.run.z0.rfind("csv:", 0) != 0) {
    config_error("run.z0 must be 'zeros' or 'csv:<path>'");
  }
  if (cfg.output.format != "json" && cfg.output.format != "csv") {
    config_error("output.format must be json or csv");
  }
  if (cfg.output.precision != "shortest") {
    config_error("output.precision supports only 'shortest'");
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    config_error("config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

json to_json(const RunConfig& cfg) {
  const RawParams model = resolved_model(cfg);
  json doc;
  doc["n"] = model.n;
  doc["alpha"] = model.alpha;
  doc["beta"] = model.beta;
  doc["a"] = model.a;
  doc["b"] = model.b;
  if (cfg.noise) {
    doc["noise"] = {{"mu", cfg.noise->mu},
                    {"sigma", cfg.noise->sigma},
                    {"zero_noise", cfg.noise->zero_noise}};
  }
  doc["run"] = {{"T", cfg.run.T},
                {"seed", cfg.run.seed},
                {"method", cfg.run.method},
                {"z0", cfg.run.z0}};
  doc["output"] = {{"path", cfg.output.path},
                   {"format", cfg.output.format},
                   {"precision", cfg.output.precision}};
  doc["moments"] = {{"t_grid", cfg.moments.t_grid},
                    {"tau_grid", cfg.moments.tau_grid},
                    {"g_scale", cfg.moments.g_scale},
                    {"mc_reps", cfg.moments.mc_reps},
                    {"mc_seed", cfg.moments.mc_seed},
                    {"tail_tol", cfg.moments.tail_tol}};
  doc["cycle"] = {{"eps_sd", cfg.cycle.eps_sd},
                  {"eta_sd", cfg.cycle.eta_sd},
                  {"x0", cfg.cycle.x0},
                  {"x1", cfg.cycle.x1},
                  {"analyze", cfg.cycle.analyze}};
  return doc;
}

RawParams resolved_model(const RunConfig& cfg) {
  RawParams p = cfg.model;
  if (p.n > 0 && p.n <= (1 << 20)) {
    const auto n = static_cast<std::size_t>(p.n);
    if (p.a.empty()) p.a.assign(n, 1.0 / static_cast<double>(n));
    if (p.b.empty()) p.b.assign(n, 1.0 / static_cast<double>(n));
  }
  return p;
}

}  // namespace avm::cli
