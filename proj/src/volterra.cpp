#include "hdsgd/volterra.hpp"

#include <cmath>

namespace hdsgd {

namespace {

struct Coeffs {
  double h11 = 0.0;
  double h21 = 0.0;
  double q = 0.0;  // gamma^2 I
  double gamma = 0.0;
};

Coeffs coeffs_at(const Model& model, const OverlapMatrix& b, double gamma) {
  Coeffs c;
  c.gamma = gamma;
  if (gamma == 0.0) return c;
  if (!model.in_domain(b)) throw DomainExit("resolvent: overlap left the model domain: " + b.describe(), b.full());
  const Moments m = model.moments(b);
  c.h11 = m.grad.full(0, 0);
  c.h21 = m.grad.full(0, 1);
  c.q = gamma * gamma * m.fisher(0, 0);
  return c;
}

}  // namespace

Trajectory solve_scalar_resolvent(const Model& model, const SpectrumK& spectrum, const OdeState& init,
                                  const VolterraOptions& opt, ResolventTables* final_tables) {
  if (model.ell() != 1 || model.ell_star() != 1) throw UnsupportedError("solve_scalar_resolvent needs ell = ell_star = 1");
  if (init.groups() != spectrum.groups()) throw ConfigError("solve_scalar_resolvent: state does not match spectrum");
  if (!(opt.dt > 0.0) || !(opt.T > 0.0)) throw ConfigError("solve_scalar_resolvent: T and dt must be positive");
  const int G = spectrum.groups();
  const double inv_d = 1.0 / spectrum.d();
  const long nsteps = std::max(1L, static_cast<long>(std::ceil(opt.T / opt.dt - 1e-9)));
  const double h = opt.T / nsteps;
  const long stride = std::max(1L, std::lround(opt.record_dt / h));

  std::vector<double> lam(G), mult(G), s11(G), s12(G), s22(G);
  for (int g = 0; g < G; ++g) {
    lam[g] = spectrum.atoms()[g].lambda;
    mult[g] = spectrum.atoms()[g].mult;
    const SmallMat m = init.block(g);
    s11[g] = m(0, 0), s12[g] = m(0, 1), s22[g] = m(1, 1);
  }
  ResolventTables cur{std::vector<double>(G, 0.0), std::vector<double>(G, 0.0), std::vector<double>(G, 0.0)};
  ResolventTables nxt = cur;

  OdeState st = init;
  auto assemble = [&](const ResolventTables& tb) {
    double b11 = 0.0, b12 = 0.0, b22 = 0.0;
    for (int g = 0; g < G; ++g) {
      const double e = std::exp(-tb.log_phi11[g]);
      const double ps = tb.psi[g];
      const double x11 = e * e * s11[g] - 2.0 * ps * e * s12[g] + ps * ps * s22[g] + mult[g] * lam[g] * tb.memory[g];
      const double x12 = e * s12[g] - ps * s22[g];
      b11 += lam[g] * x11;
      b12 += lam[g] * x12;
      b22 += lam[g] * s22[g];
    }
    SmallMat b(2, 2);
    b << b11 * inv_d, b12 * inv_d, b12 * inv_d, b22 * inv_d;
    return OverlapMatrix(1, 1, b);
  };
  auto to_state = [&](const ResolventTables& tb, double t) {
    for (int g = 0; g < G; ++g) {
      const double e = std::exp(-tb.log_phi11[g]);
      const double ps = tb.psi[g];
      SmallMat m(2, 2);
      const double x11 = e * e * s11[g] - 2.0 * ps * e * s12[g] + ps * ps * s22[g] + mult[g] * lam[g] * tb.memory[g];
      const double x12 = e * s12[g] - ps * s22[g];
      m << x11, x12, x12, s22[g];
      st.set_block(g, m);
    }
    st.t = t;
    return st;
  };

  Trajectory tr;
  OverlapMatrix b = assemble(cur);
  Coeffs c0;
  try {
    c0 = coeffs_at(model, b, opt.schedule(0.0));
  } catch (const DomainExit&) {
    TrajectoryRow r = make_row(model, to_state(cur, 0.0), spectrum, opt.schedule(0.0), opt.delta);
    tr.rows.push_back(r);
    tr.stopped_early = true;
    tr.stop_reason = "initial overlap outside the model domain";
    return tr;
  }
  tr.rows.push_back(make_row(model, to_state(cur, 0.0), spectrum, c0.gamma, opt.delta));

  for (long k = 1; k <= nsteps; ++k) {
    const double t1 = k * h;
    const double g1 = opt.schedule(t1);
    Coeffs c1 = c0;
    c1.gamma = g1;
    c1.q = c0.gamma > 0.0 ? c0.q * (g1 * g1) / (c0.gamma * c0.gamma) : 0.0;
    OverlapMatrix b1 = b;
    bool converged = false;
    try {
      for (int it = 0; it < opt.max_iter; ++it) {
        for (int g = 0; g < G; ++g) {
          const double a0 = c0.gamma * (2.0 * lam[g] * c0.h11 + opt.delta);
          const double a1 = c1.gamma * (2.0 * lam[g] * c1.h11 + opt.delta);
          const double de = 0.5 * h * (a0 + a1);
          const double f = std::exp(-de);
          nxt.log_phi11[g] = cur.log_phi11[g] + de;
          nxt.psi[g] = cur.psi[g] * f + 0.5 * h * (2.0 * c0.gamma * lam[g] * c0.h21 * f + 2.0 * c1.gamma * lam[g] * c1.h21);
          nxt.memory[g] = cur.memory[g] * f * f + 0.5 * h * (c0.q * f * f + c1.q);
        }
        const OverlapMatrix bn = assemble(nxt);
        const double change = (bn.full() - b1.full()).cwiseAbs().maxCoeff();
        b1 = bn;
        c1 = coeffs_at(model, b1, g1);
        if (change <= opt.tol * (1.0 + b1.full().cwiseAbs().maxCoeff())) {
          converged = true;
          break;
        }
      }
    } catch (const DomainExit& e) {
      TrajectoryRow r = make_row(model, to_state(cur, (k - 1) * h), spectrum, c0.gamma, opt.delta);
      r.in_domain = false;
      if (r.t > tr.rows.back().t) tr.rows.push_back(r);
      else tr.rows.back().in_domain = false;
      tr.stopped_early = true;
      tr.stop_reason = std::string("domain exit: ") + e.what();
      return tr;
    }
    if (!converged && !(b1.full().allFinite())) throw NumericError("solve_scalar_resolvent: non-finite overlap", (k - 1) * h);
    std::swap(cur, nxt);
    b = b1;
    c0 = c1;
    if (k % stride == 0 || k == nsteps) tr.rows.push_back(make_row(model, to_state(cur, t1), spectrum, g1, opt.delta));
  }
  if (final_tables) *final_tables = cur;
  return tr;
}

RiskSeries solve_lsq_volterra(const SpectrumK& spectrum, const OdeState& init, double gamma, double eta, double T,
                              double dt) {
  if (init.ell != init.ell_star) throw ConfigError("solve_lsq_volterra needs ell == ell_star");
  if (!(dt > 0.0) || !(T > 0.0)) throw ConfigError("solve_lsq_volterra: T and dt must be positive");
  const int G = spectrum.groups(), l = init.ell;
  const double inv_d = 1.0 / spectrum.d();
  const long n = std::max(1L, static_cast<long>(std::ceil(T / dt - 1e-9)));
  const double h = T / n;
  std::vector<double> gap(G);
  for (int g = 0; g < G; ++g) {
    const SmallMat m = init.block(g);
    gap[g] = m.topLeftCorner(l, l).trace() - 2.0 * m.topRightCorner(l, l).trace() + m.bottomRightCorner(l, l).trace();
  }
  std::vector<double> f(n + 1), ker(n + 1);
  for (long j = 0; j <= n; ++j) {
    const double t = j * h;
    double fj = 0.0, kj = 0.0;
    for (int g = 0; g < G; ++g) {
      const auto& a = spectrum.atoms()[g];
      const double e = std::exp(-2.0 * gamma * a.lambda * t);
      fj += a.lambda * e * gap[g];
      kj += a.mult * a.lambda * a.lambda * e;
    }
    f[j] = 0.5 * fj * inv_d + 0.5 * l * eta * eta;
    ker[j] = gamma * gamma * inv_d * kj;
  }
  RiskSeries out;
  out.t.resize(n + 1);
  out.risk.resize(n + 1);
  out.t[0] = 0.0;
  out.risk[0] = f[0];
  const double denom = 1.0 - 0.5 * h * ker[0];
  for (long j = 1; j <= n; ++j) {
    double conv = 0.5 * ker[j] * out.risk[0];
    for (long i = 1; i < j; ++i) conv += ker[j - i] * out.risk[i];
    out.t[j] = j * h;
    out.risk[j] = (f[j] + h * conv) / denom;
  }
  return out;
}

double lsq_malthus_rate(const SpectrumK& spectrum, double gamma) {
  if (!(gamma > 0.0)) throw ConfigError("lsq_malthus_rate: gamma must be positive");
  const double thr = 2.0 * spectrum.d() / spectrum.trace();
  if (gamma >= thr) throw ConfigError("lsq_malthus_rate: gamma above the threshold 2d/trK = " + std::to_string(thr));
  const double inv_d = 1.0 / spectrum.d();
  auto balance = [&](double r) {
    double s = 0.0;
    for (const auto& a : spectrum.atoms()) s += a.mult * a.lambda * a.lambda / (2.0 * gamma * a.lambda - r);
    return gamma * gamma * inv_d * s - 1.0;
  };
  const double cap = 2.0 * gamma * spectrum.lambda_min();
  double lo = 0.0, hi = cap;
  // balance(lo) < 0 below the threshold; it blows up approaching cap.
  const double probe = cap * (1.0 - 1e-15);
  if (balance(probe) < 0.0) return cap;
  for (int it = 0; it < 200 && hi - lo > 1e-10 * (1.0 + cap); ++it) {
    const double mid = 0.5 * (lo + hi);
    (balance(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double fitted_decay_rate(const std::vector<double>& t, const std::vector<double>& y, double t0, double t1) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t0 || t[i] > t1 || !(y[i] > 0.0)) continue;
    const double ly = std::log(y[i]);
    sx += t[i], sy += ly, sxx += t[i] * t[i], sxy += t[i] * ly;
    ++n;
  }
  if (n < 2) throw Error("fitted_decay_rate: fewer than two usable points");
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return -slope;
}

}  // namespace hdsgd
