#pragma once

#include <cstdint>
#include <vector>

#include "hdsgd/kernels.hpp"
#include "hdsgd/model.hpp"
#include "hdsgd/schedule.hpp"
#include "hdsgd/spectrum.hpp"
#include "hdsgd/trajectory.hpp"

namespace hdsgd {

// W = [X | X*] in the eigenbasis of K, one row per eigen-index.
struct ParamState {
  RowMat w;
  int ell = 0;
  std::vector<double> lambda;  // per row
  double t = 0.0;

  int d() const { return static_cast<int>(w.rows()); }
  int ell_star() const { return static_cast<int>(w.cols()) - ell; }
};

ParamState make_param_state(const SpectrumK& spectrum, const RowMat& x0, const RowMat& xstar);

struct SimOptions {
  Schedule schedule{1.0};
  double delta = 0.0;
  double T = 1.0;
  std::uint64_t seed = 0;
  double record_dt = 0.01;  // SGD: stride = record_dt * d iterations
  double dt = 0.0;          // HSGD step; 0 selects 1/d
  bool diffusion = true;    // HSGD noise term
  Exec exec = default_exec();
};

// Row of statistics from the current parameters (overlap recomputed in full).
TrajectoryRow param_row(const Model& model, const ParamState& ps, double gamma, double delta, Exec ex);

Trajectory run_sgd(const Model& model, const SpectrumK& spectrum, const RowMat& x0, const RowMat& xstar,
                   const SimOptions& opt, ParamState* final_state = nullptr);

// Gradient of the population risk, row i = lambda_i (2 H1 x_i + 2 H2 x*_i).
RowMat grad_risk(const Model& model, const ParamState& ps, Exec ex = Exec::parallel);

Trajectory run_hsgd(const Model& model, const SpectrumK& spectrum, const RowMat& x0, const RowMat& xstar,
                    const SimOptions& opt, ParamState* final_state = nullptr);

// Reference SGD in ambient coordinates with a dense covariance: a = L v with
// K = L L^T. Serial and O(d^2) per step; for cross-checks at small d.
Trajectory run_sgd_ambient(const Model& model, const Eigen::MatrixXd& k, const RowMat& x0, const RowMat& xstar,
                           const SimOptions& opt);

}  // namespace hdsgd
