#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hdsgd/config.hpp"
#include "hdsgd/model.hpp"
#include "hdsgd/sampler.hpp"
#include "hdsgd/spectrum.hpp"
#include "hdsgd/trajectory.hpp"

namespace hdsgd {

struct Problem {
  ModelPtr model;
  SpectrumK spectrum;
  RowMat x0;     // d x ell, eigenbasis
  RowMat xstar;  // d x ell_star
};

// ones_scaled:c | gauss:norm | mix:a,b | file:path | zero | same_as_star (x0 only).
// Each column is built independently; seeded from (problem_seed, stream).
RowMat make_init(const std::string& spec, int d, int cols, std::uint64_t seed, Stream stream,
                 const RowMat* xstar = nullptr);

Problem build_problem(const RunConfig& cfg);

Trajectory run_solver(const Problem& p, const RunConfig& cfg);

struct RunResult {
  Trajectory trajectory;
  int exit_code = 0;  // 0 ok, 2 domain exit / early stop
};

// Builds, solves and writes cfg.out when set.
RunResult run(const RunConfig& cfg);

struct ReplicateRow {
  int d = 0;
  std::uint64_t seed = 0;
  double sup_dev = 0.0;
  double final_risk = 0.0;
};

struct SweepDResult {
  std::vector<ReplicateRow> rows;
  std::vector<int> d_list;
  std::vector<double> median_sup_dev;  // per d
  std::vector<double> reference_risk0;  // ODE risk at t=0, per d
};

// For each d: ODE reference and cfg.solver (sgd if cfg.solver is ode) on each
// seed; deviation is the sup over recorded times of |stat - stat_ODE|.
SweepDResult sweep_d(const RunConfig& cfg, const std::vector<int>& d_list, const std::vector<std::uint64_t>& seeds,
                     Stat stat = Stat::risk);

struct GammaRow {
  double gamma = 0.0;
  double d2_initial = 0.0;
  double d2_final = 0.0;
  bool diverged = false;  // non-finite or N_max stop
};

struct SweepGammaResult {
  std::vector<GammaRow> rows;
  std::optional<double> crossing;  // smallest gamma with final D^2 > initial
};

GammaRow gamma_point(const Problem& p, const RunConfig& cfg, double gamma);
SweepGammaResult sweep_gamma(const RunConfig& cfg, const std::vector<double>& gammas);

// Bisection of the crossing between a descending lo and an ascending hi.
double refine_crossing(const Problem& p, const RunConfig& cfg, double lo, double hi, double rel_tol);

void write_replicate_csv(const SweepDResult& r, std::ostream& os);
void write_sweep_gamma_csv(const SweepGammaResult& r, std::ostream& os);

double median(std::vector<double> v);

}  // namespace hdsgd
