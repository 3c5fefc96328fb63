#include "hdsgd/thresholds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hdsgd {

StableGamma gamma_stable(const Model& model, const OverlapMatrix& b, double avg_eig) {
  if (!(avg_eig > 0.0)) throw ConfigError("gamma_stable: avg_eig must be positive");
  StableGamma s;
  s.a = model.alignment(b);
  s.tr_i = model.fisher(b).trace();
  const double scale = 1e-14 * (1.0 + b.full().norm());
  if (s.a <= scale || s.tr_i <= scale) {
    s.degenerate = true;
    return s;
  }
  s.gamma = 2.0 * s.a / (avg_eig * s.tr_i);
  return s;
}

double descent_threshold_q(double q, double avg_eig) {
  if (!(q > 0.0)) throw ConfigError("descent_threshold_q: q must be positive");
  if (!(avg_eig > 0.0)) throw ConfigError("descent_threshold_q: avg_eig must be positive");
  return 2.0 * q / avg_eig;
}

const char* regime_name(RateRegime r) {
  switch (r) {
    case RateRegime::descent_only: return "descent_only";
    case RateRegime::global_rsi: return "global_rsi";
    case RateRegime::local_rsi: return "local_rsi";
  }
  return "?";
}

namespace {
void check_rsi_inputs(double mu_hat, double l_hat, double avg_eig, double lambda_min) {
  if (!(mu_hat > 0.0) || !(l_hat > 0.0)) throw ConfigError("rate: mu_hat and l_hat must be positive");
  if (mu_hat > l_hat * (1.0 + 1e-12)) throw ConfigError("rate: mu_hat must not exceed l_hat");
  if (!(avg_eig > 0.0)) throw ConfigError("rate: avg_eig must be positive");
  if (!(lambda_min > 0.0)) throw ConfigError("rate: lambda_min must be positive");
}
}  // namespace

RateCertificate rate_rsi_global(double mu_hat, double l_hat, double avg_eig, double lambda_min, double zeta) {
  check_rsi_inputs(mu_hat, l_hat, avg_eig, lambda_min);
  if (!(zeta > 0.0 && zeta < 1.0)) throw ConfigError("rate_rsi_global: zeta must lie in (0,1)");
  RateCertificate c;
  c.regime = RateRegime::global_rsi;
  c.mu_hat = mu_hat;
  c.l_hat = l_hat;
  c.avg_eig = avg_eig;
  c.lambda_min = lambda_min;
  c.zeta = zeta;
  c.theta_hat = INFINITY;
  c.gamma = 2.0 * mu_hat * zeta / (l_hat * l_hat * avg_eig);
  c.rate_a = c.gamma * (1.0 - zeta) * mu_hat * lambda_min;
  return c;
}

RateCertificate rate_rsi_local(double mu_hat, double theta_hat, double l_hat, double avg_eig, double lambda_min,
                               double opnorm_k, double norm_x0_minus_star, double norm_star, double zeta) {
  check_rsi_inputs(mu_hat, l_hat, avg_eig, lambda_min);
  if (!(theta_hat > 0.0) || !(opnorm_k > 0.0)) throw ConfigError("rate_rsi_local: theta_hat and |K| must be positive");
  if (!(zeta > 0.0 && zeta < 1.0)) throw ConfigError("rate_rsi_local: zeta must lie in (0,1)");
  RateCertificate c;
  c.regime = RateRegime::local_rsi;
  c.mu_hat = mu_hat;
  c.l_hat = l_hat;
  c.avg_eig = avg_eig;
  c.lambda_min = lambda_min;
  c.zeta = zeta;
  c.theta_hat = theta_hat;
  const double r2 = std::max(norm_x0_minus_star * norm_x0_minus_star, norm_star * norm_star);
  c.zeta0 = r2 > 0.0 ? 10.0 * std::exp(-theta_hat / (8.0 * opnorm_k * opnorm_k * r2)) : 0.0;
  c.gamma = 2.0 * mu_hat * zeta / (l_hat * l_hat * avg_eig);
  if (c.zeta0 >= 1.0 || zeta >= 1.0 - c.zeta0) {
    c.feasible = false;
    c.rate_a = 0.0;
    return c;
  }
  c.rate_a = c.gamma * (1.0 - c.zeta0 - zeta) * mu_hat * lambda_min;
  return c;
}

RateCertificate logistic_local_rate(int ell, double avg_eig, double lambda_min, double opnorm_k, double norm_xhat,
                                    double norm_x0) {
  if (ell < 1 || !(avg_eig > 0.0) || !(lambda_min > 0.0) || !(opnorm_k > 0.0))
    throw ConfigError("logistic_local_rate: inputs must be positive");
  RateCertificate c;
  c.regime = RateRegime::local_rsi;
  c.certified = false;
  c.avg_eig = avg_eig;
  c.lambda_min = lambda_min;
  c.theta_hat = 64.0 * opnorm_k * opnorm_k * std::max(norm_xhat * norm_xhat, norm_x0 * norm_x0);
  c.gamma = std::exp(-std::sqrt(4.0 * c.theta_hat)) / (ell * avg_eig);
  c.rate_a = std::exp(-4.0 * std::sqrt(c.theta_hat)) / (double(ell) * ell * avg_eig) * lambda_min;
  return c;
}

double nonexplosion_envelope(double c, double n0, double t) { return (1.0 + n0) * std::exp(c * t); }

double fit_nonexplosion_c(const std::vector<double>& t, const std::vector<double>& n) {
  if (t.size() != n.size()) throw ConfigError("fit_nonexplosion_c: size mismatch");
  double c = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) {
    const double dt = t[i] - t[i - 1];
    if (dt <= 0.0) continue;
    c = std::max(c, (std::log1p(n[i]) - std::log1p(n[i - 1])) / dt);
  }
  return c;
}

std::optional<std::pair<double, double>> pr_saddle_ratio(double beta) {
  constexpr double pi = std::numbers::pi;
  const double disc = beta * beta - (pi * pi - 4.0) * (1.0 - beta);
  if (disc < 0.0) return std::nullopt;
  const double r = std::sqrt(disc);
  return std::make_pair(2.0 - beta + r, 2.0 - beta - r);
}

double pr_saddle_beta(double gamma) {
  if (!(gamma > 0.0)) throw ConfigError("pr_saddle_beta: gamma must be positive");
  return 2.0 / gamma;
}

bool pr_escape_ok(const OverlapMatrix& b) {
  const double b11 = b(0, 0), b22 = b(1, 1);
  if (!(b11 > 0.0)) return true;
  return std::sqrt(b22 / b11) > std::numbers::pi / 4.0;
}

}  // namespace hdsgd
