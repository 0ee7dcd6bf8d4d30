#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "avm/model.hpp"

namespace avm::cli {

using json = nlohmann::ordered_json;

struct RunSection {
  long T = 200;
  std::uint64_t seed = 42;
  std::string method = "recursive";  // recursive | explicit | both
  std::string z0 = "zeros";          // zeros | csv:<path>
};

struct OutputSection {
  std::string path;           // empty: stdout for reports, no file for series
  std::string format = "json";
  std::string precision = "shortest";
};

struct MomentsSection {
  std::vector<long> t_grid{2, 5, 10};
  std::vector<long> tau_grid{0, 1};
  double g_scale = 0.0;  // Cov(z_0) = g_scale * I
  long mc_reps = 0;
  std::uint64_t mc_seed = 7;
  double tail_tol = 1e-12;
};

struct CycleSection {
  double eps_sd = 1.0;
  double eta_sd = 1.6;
  double x0 = 0.0;
  double x1 = 0.0;
  bool analyze = false;
};

/// Everything a run depends on. Unknown keys are rejected at every level.
struct RunConfig {
  RawParams model;
  std::optional<RawNoise> noise;  // absent: standard normal on all 2n
  RunSection run;
  OutputSection output;
  MomentsSection moments;
  CycleSection cycle;
};

/// Throws avm::Error(ConfigError) naming the offending key.
RunConfig parse_config(const json& doc);
RunConfig load_config(const std::string& path);
json to_json(const RunConfig& cfg);

/// Uniform weights when a or b are missing.
RawParams resolved_model(const RunConfig& cfg);

/// Shortest decimal that parses back to the same double.
std::string format_double(double x);

/// Writes to a sibling temporary file, then renames over path.
void write_atomic(const std::string& path, const std::string& content);

/// Row-major CSV, no header.
std::string matrix_csv(const Mat& m);

/// Full command line; returns the process exit status.
/// 0 success, 1 computation failure, 2 invalid input.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace avm::cli
