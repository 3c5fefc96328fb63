#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hdsgd/model.hpp"

namespace hdsgd {

struct StableGamma {
  double gamma = 0.0;
  bool degenerate = false;  // A <= 0: no descent direction
  double a = 0.0;
  double tr_i = 0.0;
};

// Largest constant rate with d D^2/dt <= 0 at B: 2A / (avg_eig tr I).
StableGamma gamma_stable(const Model& model, const OverlapMatrix& b, double avg_eig);

// 2q / avg_eig.
double descent_threshold_q(double q, double avg_eig);

enum class RateRegime { descent_only, global_rsi, local_rsi };
const char* regime_name(RateRegime r);

struct RateCertificate {
  double gamma = 0.0;
  double rate_a = 0.0;
  RateRegime regime = RateRegime::descent_only;
  bool feasible = true;
  bool certified = true;
  // inputs
  double mu_hat = 0.0, l_hat = 0.0, avg_eig = 0.0, lambda_min = 0.0, zeta = 0.0;
  double zeta0 = 0.0, theta_hat = 0.0;
};

RateCertificate rate_rsi_global(double mu_hat, double l_hat, double avg_eig, double lambda_min, double zeta);

// Local version; infeasible certificates have feasible = false and rate_a = 0.
RateCertificate rate_rsi_local(double mu_hat, double theta_hat, double l_hat, double avg_eig, double lambda_min,
                               double opnorm_k, double norm_x0_minus_star, double norm_star, double zeta);

// Logistic local rate shape with the absolute constant set to 1 (not certified).
RateCertificate logistic_local_rate(int ell, double avg_eig, double lambda_min, double opnorm_k, double norm_xhat,
                                    double norm_x0);

double nonexplosion_envelope(double c, double n0, double t);

// Smallest C with log(1+N(t)) - log(1+N(s)) <= C (t - s) over consecutive samples.
double fit_nonexplosion_c(const std::vector<double>& t, const std::vector<double>& n);

// Roots of pi sqrt(B22/B11) = 2 - beta +- sqrt(beta^2 - (pi^2-4)(1-beta)),
// (plus, minus); nullopt when the discriminant is negative.
std::optional<std::pair<double, double>> pr_saddle_ratio(double beta);

// beta for a given constant rate on unit-average covariance.
double pr_saddle_beta(double gamma);

bool pr_escape_ok(const OverlapMatrix& b);

}  // namespace hdsgd
