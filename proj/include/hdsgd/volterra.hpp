#pragma once

#include <vector>

#include "hdsgd/model.hpp"
#include "hdsgd/ode.hpp"
#include "hdsgd/schedule.hpp"
#include "hdsgd/spectrum.hpp"
#include "hdsgd/trajectory.hpp"

namespace hdsgd {

struct VolterraOptions {
  Schedule schedule{1.0};
  double delta = 0.0;
  double T = 1.0;
  double dt = 1e-3;
  double record_dt = 0.01;
  int max_iter = 30;
  double tol = 1e-14;
};

// Per eigenvalue group: log Phi11, psi = Phi21/Phi11 and the memory integral
// int gamma^2 I (Phi11(s)/Phi11(t))^2 ds, all at the current grid time.
struct ResolventTables {
  std::vector<double> log_phi11;
  std::vector<double> psi;
  std::vector<double> memory;
};

// Scalar (ell = ell_star = 1) overlap evolution through the fundamental
// solution, trapezoid in time with a fixed-point corrector at each step.
Trajectory solve_scalar_resolvent(const Model& model, const SpectrumK& spectrum, const OdeState& init,
                                  const VolterraOptions& opt, ResolventTables* final_tables = nullptr);

struct RiskSeries {
  std::vector<double> t;
  std::vector<double> risk;
};

// Least-squares risk from the convolution Volterra equation (constant gamma,
// no ridge), trapezoid forward substitution.
RiskSeries solve_lsq_volterra(const SpectrumK& spectrum, const OdeState& init, double gamma, double eta, double T,
                              double dt);

// Decay exponent r* with (gamma^2/d) sum lambda^2/(2 gamma lambda - r) = 1.
double lsq_malthus_rate(const SpectrumK& spectrum, double gamma);

// Least-squares fit of log(y) against t over [t0, t1]; returns -slope.
double fitted_decay_rate(const std::vector<double>& t, const std::vector<double>& y, double t0, double t1);

}  // namespace hdsgd
