#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "hdsgd/model.hpp"
#include "hdsgd/schedule.hpp"

namespace hdsgd {

enum class Solver { ode, volterra, sgd, hsgd };
Solver parse_solver(const std::string& s);
const char* solver_name(Solver s);

struct RunConfig {
  std::string model = "least_squares";
  ModelParams model_params;
  std::string spectrum = "identity";
  std::optional<double> spectrum_avg;
  std::string init_x0 = "ones_scaled:1";
  std::string init_xstar = "gauss:1";
  int d = 1000;
  Schedule gamma{1.0};
  double delta = 0.0;
  double T = 10.0;
  double dt = 0.0;  // solver step; 0 = solver default
  std::uint64_t seed = 0;          // SGD / HSGD noise
  std::uint64_t problem_seed = 0;  // spectrum and initial conditions
  double record_dt = 0.01;
  Solver solver = Solver::ode;
  std::string out;
  double n_max = 1e6;
  bool gradient_flow = false;  // drop the gamma^2 terms / diffusion
};

// INI-style text: "key = value" lines, '#' or ';' comments, and [section]
// headers that prefix following keys with "section.".
RunConfig parse_config(const std::string& text);
RunConfig parse_config_file(const std::string& path);

// Apply one key/value (same names as in the file). Throws ConfigError.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

std::string to_text(const RunConfig& cfg);

}  // namespace hdsgd
