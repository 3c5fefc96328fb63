#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "hdsgd/kernels.hpp"
#include "hdsgd/model.hpp"
#include "hdsgd/schedule.hpp"
#include "hdsgd/spectrum.hpp"
#include "hdsgd/trajectory.hpp"

namespace hdsgd {

// Per-group overlap blocks. Group g stores the sum over its eigen-indices i
// of B_i; the ODE is affine in each B_i with coefficients depending only on
// lambda_i and the average, so the group sum evolves exactly.
struct OdeState {
  double t = 0.0;
  int ell = 0;
  int ell_star = 0;
  std::vector<double> s;  // groups blocks of p*p, column-major

  int p() const { return ell + ell_star; }
  int groups() const { return p() ? static_cast<int>(s.size()) / (p() * p()) : 0; }
  SmallMat block(int g) const;
  void set_block(int g, const SmallMat& m);
};

// rows: d rows (one per eigen-index) or one representative row per group,
// each of length ell + ell_star (x_i then x*_i), in eigen-index order.
OdeState init_overlaps(const RowMat& rows, int ell, const SpectrumK& spectrum);

// Every B_i equal to C with (1/d) sum lambda_i C = b_avg.
OdeState uniform_state(const SpectrumK& spectrum, const OverlapMatrix& b_avg);

OverlapMatrix average_overlap(const OdeState& st, const SpectrumK& spectrum);

struct OdeStats {
  OverlapMatrix b;
  double n = 0.0;
  double d2 = 0.0;  // NaN when ell != ell_star
  double norm_x = 0.0;
  double norm_star = 0.0;
  double risk = 0.0;
};

OdeStats reduce_stats(const Model& model, const OdeState& st, const SpectrumK& spectrum, double delta = 0.0);

struct RhsOptions {
  bool noise = true;  // false drops the gamma^2 term (gradient flow)
  Exec exec = Exec::parallel;
};

std::vector<double> rhs_coupled(const Model& model, const OdeState& st, const SpectrumK& spectrum, double gamma,
                                double delta, const RhsOptions& opt = {});

struct OdeOptions {
  Schedule schedule{1.0};
  double delta = 0.0;
  double T = 1.0;
  double dt = 0.0;         // 0 selects the default step
  double record_dt = 0.01; // time between recorded rows
  double n_max = 1e6;
  bool noise = true;
  bool project_psd = true;
  Exec exec = default_exec();
};

double default_ode_dt(const Model& model, const OdeState& st, const SpectrumK& spectrum, const Schedule& sched);

Trajectory integrate_ode(const Model& model, const SpectrumK& spectrum, const OdeState& init, const OdeOptions& opt);

// One classical RK4 step of size h (h may be negative).
OdeState rk4_step(const Model& model, const SpectrumK& spectrum, const OdeState& st, double h, double gamma,
                  double delta, const RhsOptions& opt = {});

// Autonomous equation for K = I written directly on the average overlap.
Trajectory integrate_identity_autonomous(const Model& model, const OverlapMatrix& b0, const OdeOptions& opt);

// g applied to (1/d) sum_i q(lambda_i) B_i, q given by polynomial coefficients.
double statistic_phi(const OdeState& st, const SpectrumK& spectrum, const std::function<double(const SmallMat&)>& g,
                     const std::vector<double>& q);

// (numerical derivative of D^2, -2 gamma A + gamma^2 (trK/d) tr I) at st.
std::pair<double, double> d2_derivative_check(const Model& model, const OdeState& st, const SpectrumK& spectrum,
                                              double gamma, double delta = 0.0);

TrajectoryRow make_row(const Model& model, const OdeState& st, const SpectrumK& spectrum, double gamma, double delta);

}  // namespace hdsgd
