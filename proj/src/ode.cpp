#include "hdsgd/ode.hpp"

#include <cmath>
#include <limits>

namespace hdsgd {

SmallMat OdeState::block(int g) const {
  const int n = p();
  return Eigen::Map<const Eigen::MatrixXd>(s.data() + std::size_t(g) * n * n, n, n);
}

void OdeState::set_block(int g, const SmallMat& m) {
  const int n = p();
  Eigen::Map<Eigen::MatrixXd>(s.data() + std::size_t(g) * n * n, n, n) = m;
}

namespace {

double trace12(const SmallMat& m, int ell, int ell_star) {
  double t = 0.0;
  for (int k = 0; k < std::min(ell, ell_star); ++k) t += m(k, ell + k);
  return t;
}

OdeState empty_state(int ell, int ell_star, int groups) {
  OdeState st;
  st.ell = ell;
  st.ell_star = ell_star;
  st.s.assign(std::size_t(groups) * (ell + ell_star) * (ell + ell_star), 0.0);
  return st;
}

}  // namespace

OdeState init_overlaps(const RowMat& rows, int ell, const SpectrumK& spectrum) {
  const int p = static_cast<int>(rows.cols());
  const int ls = p - ell;
  if (ell < 1 || ls < 1 || p > kMaxDim) throw ConfigError("init_overlaps: bad row width");
  const int d = spectrum.d(), G = spectrum.groups();
  OdeState st = empty_state(ell, ls, G);
  if (rows.rows() == d) {
    for (int g = 0; g < G; ++g) {
      SmallMat acc = SmallMat::Zero(p, p);
      const int lo = spectrum.offset(g), hi = lo + spectrum.atoms()[g].mult;
      for (int i = lo; i < hi; ++i) {
        const SmallVec w = rows.row(i).transpose();
        acc.noalias() += w * w.transpose();
      }
      st.set_block(g, double(d) * acc);
    }
  } else if (rows.rows() == G) {
    for (int g = 0; g < G; ++g) {
      const SmallVec w = rows.row(g).transpose();
      st.set_block(g, double(d) * spectrum.atoms()[g].mult * (w * w.transpose()));
    }
  } else {
    throw ConfigError("init_overlaps: got " + std::to_string(rows.rows()) + " rows, expected d=" + std::to_string(d) +
                      " or one per eigenvalue group (" + std::to_string(G) + ")");
  }
  return st;
}

OdeState uniform_state(const SpectrumK& spectrum, const OverlapMatrix& b_avg) {
  OdeState st = empty_state(b_avg.ell(), b_avg.ell_star(), spectrum.groups());
  const SmallMat c = b_avg.full() / spectrum.avg();
  for (int g = 0; g < spectrum.groups(); ++g) st.set_block(g, double(spectrum.atoms()[g].mult) * c);
  return st;
}

OverlapMatrix average_overlap(const OdeState& st, const SpectrumK& spectrum) {
  const int p = st.p();
  SmallMat acc = SmallMat::Zero(p, p);
  for (int g = 0; g < st.groups(); ++g) acc += spectrum.atoms()[g].lambda * st.block(g);
  return OverlapMatrix(st.ell, st.ell_star, acc / double(spectrum.d()));
}

OdeStats reduce_stats(const Model& model, const OdeState& st, const SpectrumK& spectrum, double delta) {
  OdeStats out;
  out.b = average_overlap(st, spectrum);
  const int l = st.ell, ls = st.ell_star;
  double tr = 0.0, tx = 0.0, ts = 0.0, tc = 0.0;
  for (int g = 0; g < st.groups(); ++g) {
    const SmallMat m = st.block(g);
    tr += m.trace();
    tx += m.topLeftCorner(l, l).trace();
    ts += m.bottomRightCorner(ls, ls).trace();
    tc += trace12(m, l, ls);
  }
  const double inv_d = 1.0 / spectrum.d();
  out.n = tr * inv_d;
  out.norm_x = tx * inv_d;
  out.norm_star = ts * inv_d;
  out.d2 = l == ls ? (tx - 2.0 * tc + ts) * inv_d : std::numeric_limits<double>::quiet_NaN();
  out.risk = model.in_domain(out.b) ? model.risk(out.b) + 0.5 * delta * out.norm_x
                                    : std::numeric_limits<double>::quiet_NaN();
  return out;
}

TrajectoryRow make_row(const Model& model, const OdeState& st, const SpectrumK& spectrum, double gamma, double delta) {
  const OdeStats s = reduce_stats(model, st, spectrum, delta);
  TrajectoryRow r;
  r.t = st.t;
  r.risk = s.risk;
  r.d2 = s.d2;
  r.n = s.n;
  const int l = st.ell, ls = st.ell_star;
  r.tr_b11 = s.b.full().topLeftCorner(l, l).trace();
  r.tr_b12 = trace12(s.b.full(), l, ls);
  r.tr_b22 = s.b.full().bottomRightCorner(ls, ls).trace();
  r.gamma = gamma;
  r.in_domain = model.in_domain(s.b);
  r.b = s.b.full();
  return r;
}

namespace {

struct SpectrumArrays {
  std::vector<double> lambda, mult;
  explicit SpectrumArrays(const SpectrumK& k) {
    for (const auto& a : k.atoms()) {
      lambda.push_back(a.lambda);
      mult.push_back(a.mult);
    }
  }
};

void rhs_into(const Model& model, const OdeState& st, const SpectrumK& spectrum, const SpectrumArrays& arr,
              double gamma, double delta, const RhsOptions& opt, std::vector<double>& out) {
  const int p = st.p(), l = st.ell;
  out.resize(st.s.size());
  if (gamma == 0.0) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  const OverlapMatrix b = average_overlap(st, spectrum);
  const Moments mom = model.moments(b);
  kernels::GroupRhsArgs args{};
  args.groups = st.groups();
  args.p = p;
  args.ell = l;
  args.lambda = arr.lambda.data();
  args.mult = arr.mult.data();
  args.mmat = SmallMat::Zero(p, p);
  args.mmat.topRows(l) = mom.grad.full.topRows(l);
  args.fisher = mom.fisher;
  args.gamma = gamma;
  args.delta = delta;
  args.noise = opt.noise;
  kernels::group_rhs(args, st.s, out, opt.exec);
}

// RK4 with stage learning rates g0 (t), gm (t+h/2), g1 (t+h).
struct Rk4 {
  const Model& model;
  const SpectrumK& spectrum;
  SpectrumArrays arr;
  std::vector<double> k1, k2, k3, k4;
  OdeState tmp;

  Rk4(const Model& m, const SpectrumK& k) : model(m), spectrum(k), arr(k) {}

  void step(OdeState& st, double h, double g0, double gm, double g1, double delta, const RhsOptions& opt) {
    tmp = st;
    const std::size_t n = st.s.size();
    rhs_into(model, st, spectrum, arr, g0, delta, opt, k1);
    for (std::size_t i = 0; i < n; ++i) tmp.s[i] = st.s[i] + 0.5 * h * k1[i];
    rhs_into(model, tmp, spectrum, arr, gm, delta, opt, k2);
    for (std::size_t i = 0; i < n; ++i) tmp.s[i] = st.s[i] + 0.5 * h * k2[i];
    rhs_into(model, tmp, spectrum, arr, gm, delta, opt, k3);
    for (std::size_t i = 0; i < n; ++i) tmp.s[i] = st.s[i] + h * k3[i];
    rhs_into(model, tmp, spectrum, arr, g1, delta, opt, k4);
    for (std::size_t i = 0; i < n; ++i) st.s[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    st.t += h;
  }
};

bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

void project_groups(OdeState& st) {
  const int l = st.ell;
  for (int g = 0; g < st.groups(); ++g) {
    SmallMat m = st.block(g);
    SmallMat b11 = sym_part(m.topLeftCorner(l, l));
    project_psd(b11, psd_tol(m));
    m.topLeftCorner(l, l) = b11;
    st.set_block(g, m);
  }
}

}  // namespace

std::vector<double> rhs_coupled(const Model& model, const OdeState& st, const SpectrumK& spectrum, double gamma,
                                double delta, const RhsOptions& opt) {
  std::vector<double> out;
  rhs_into(model, st, spectrum, SpectrumArrays(spectrum), gamma, delta, opt, out);
  return out;
}

OdeState rk4_step(const Model& model, const SpectrumK& spectrum, const OdeState& st, double h, double gamma,
                  double delta, const RhsOptions& opt) {
  Rk4 rk(model, spectrum);
  OdeState out = st;
  rk.step(out, h, gamma, gamma, gamma, delta, opt);
  return out;
}

double default_ode_dt(const Model& model, const OdeState& st, const SpectrumK& spectrum, const Schedule& sched) {
  const double gbar = sched.max();
  if (gbar <= 0.0) return 1e-3;
  double gnorm = 1.0;
  const OverlapMatrix b = average_overlap(st, spectrum);
  if (model.in_domain(b)) gnorm = model.grad(b).full.norm();
  return std::min(1e-3, 0.05 / (gbar * spectrum.lambda_max() * (1.0 + gnorm)));
}

Trajectory integrate_ode(const Model& model, const SpectrumK& spectrum, const OdeState& init, const OdeOptions& opt) {
  if (!(opt.T > 0.0)) throw ConfigError("integrate_ode: T must be positive");
  if (opt.dt < 0.0) throw ConfigError("integrate_ode: dt must be positive");
  if (init.groups() != spectrum.groups()) throw ConfigError("integrate_ode: state does not match spectrum");
  const double dt0 = opt.dt > 0.0 ? opt.dt : default_ode_dt(model, init, spectrum, opt.schedule);
  const long nsteps = std::max(1L, static_cast<long>(std::ceil(opt.T / dt0 - 1e-9)));
  const double h = opt.T / nsteps;
  const long stride = std::max(1L, std::lround(opt.record_dt / h));
  const RhsOptions ropt{opt.noise, opt.exec};

  Trajectory tr;
  OdeState st = init;
  st.t = 0.0;
  tr.rows.push_back(make_row(model, st, spectrum, opt.schedule(0.0), opt.delta));
  if (!tr.rows.back().in_domain) {
    tr.stopped_early = true;
    tr.stop_reason = "initial overlap outside the model domain";
    return tr;
  }
  Rk4 rk(model, spectrum);
  for (long k = 1; k <= nsteps; ++k) {
    const double t0 = (k - 1) * h;
    const OdeState prev = st;
    try {
      rk.step(st, h, opt.schedule(t0), opt.schedule(t0 + 0.5 * h), opt.schedule(t0 + h), opt.delta, ropt);
    } catch (const DomainExit& e) {
      // A stage left the domain: report the last accepted state.
      st = prev;
      TrajectoryRow r = make_row(model, st, spectrum, opt.schedule(t0), opt.delta);
      r.in_domain = false;
      if (r.t > tr.rows.back().t) {
        tr.rows.push_back(r);
      } else {
        tr.rows.back().in_domain = false;
      }
      tr.stopped_early = true;
      tr.stop_reason = std::string("domain exit: ") + e.what();
      return tr;
    }
    st.t = k * h;
    if (!all_finite(st.s)) throw NumericError("integrate_ode: non-finite state", t0);
    if (opt.project_psd) project_groups(st);
    const bool last = k == nsteps;
    TrajectoryRow row;
    const bool need = last || k % stride == 0;
    const OverlapMatrix b = average_overlap(st, spectrum);
    const bool inside = model.in_domain(b);
    if (need || !inside) row = make_row(model, st, spectrum, opt.schedule(st.t), opt.delta);
    if (!inside) {
      tr.rows.push_back(row);
      tr.stopped_early = true;
      tr.stop_reason = "domain exit at t=" + std::to_string(st.t);
      return tr;
    }
    double n = 0.0;
    for (int g = 0; g < st.groups(); ++g) n += st.block(g).trace();
    n /= spectrum.d();
    if (n > opt.n_max) {
      tr.rows.push_back(make_row(model, st, spectrum, opt.schedule(st.t), opt.delta));
      tr.stopped_early = true;
      tr.stop_reason = "norm statistic exceeded N_max at t=" + std::to_string(st.t);
      return tr;
    }
    if (need) tr.rows.push_back(row);
  }
  return tr;
}

Trajectory integrate_identity_autonomous(const Model& model, const OverlapMatrix& b0, const OdeOptions& opt) {
  const int l = b0.ell(), p = b0.dim();
  const double dt0 = opt.dt > 0.0 ? opt.dt : 1e-3;
  const long nsteps = std::max(1L, static_cast<long>(std::ceil(opt.T / dt0 - 1e-9)));
  const double h = opt.T / nsteps;
  const long stride = std::max(1L, std::lround(opt.record_dt / h));
  auto f = [&](const SmallMat& b, double gamma) -> SmallMat {
    const Moments mom = model.moments(OverlapMatrix(l, b0.ell_star(), b));
    SmallMat m = SmallMat::Zero(p, p);
    m.topRows(l) = mom.grad.full.topRows(l);
    const SmallMat mb = m * b;
    SmallMat d = -2.0 * gamma * (mb + mb.transpose());
    SmallMat dd = SmallMat::Zero(p, p);
    dd.topLeftCorner(l, l) = 2.0 * b.topLeftCorner(l, l);
    dd.topRightCorner(l, p - l) = b.topRightCorner(l, p - l);
    dd.bottomLeftCorner(p - l, l) = b.bottomLeftCorner(p - l, l);
    d -= opt.delta * gamma * dd;
    if (opt.noise) d.topLeftCorner(l, l) += gamma * gamma * mom.fisher;
    return d;
  };
  const SpectrumK k1 = identity_spectrum(1);
  OdeState st = uniform_state(k1, b0);
  Trajectory tr;
  tr.rows.push_back(make_row(model, st, k1, opt.schedule(0.0), opt.delta));
  SmallMat b = b0.full();
  for (long k = 1; k <= nsteps; ++k) {
    const double t0 = (k - 1) * h;
    const double g0 = opt.schedule(t0), gm = opt.schedule(t0 + 0.5 * h), g1 = opt.schedule(t0 + h);
    const SmallMat a1 = f(b, g0);
    const SmallMat a2 = f(b + 0.5 * h * a1, gm);
    const SmallMat a3 = f(b + 0.5 * h * a2, gm);
    const SmallMat a4 = f(b + h * a3, g1);
    b += h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
    if (k % stride == 0 || k == nsteps) {
      st.set_block(0, b);
      st.t = k * h;
      tr.rows.push_back(make_row(model, st, k1, opt.schedule(st.t), opt.delta));
    }
  }
  return tr;
}

double statistic_phi(const OdeState& st, const SpectrumK& spectrum, const std::function<double(const SmallMat&)>& g,
                     const std::vector<double>& q) {
  const int p = st.p();
  SmallMat acc = SmallMat::Zero(p, p);
  for (int gi = 0; gi < st.groups(); ++gi) {
    const double lam = spectrum.atoms()[gi].lambda;
    double qv = 0.0, pw = 1.0;
    for (double c : q) {
      qv += c * pw;
      pw *= lam;
    }
    acc += qv * st.block(gi);
  }
  return g(acc / double(spectrum.d()));
}

std::pair<double, double> d2_derivative_check(const Model& model, const OdeState& st, const SpectrumK& spectrum,
                                              double gamma, double delta) {
  if (st.ell != st.ell_star) throw UnsupportedError("d2_derivative_check needs ell == ell_star");
  auto d2_of = [&](const OdeState& s) { return reduce_stats(model, s, spectrum, delta).d2; };
  const OverlapMatrix b = average_overlap(st, spectrum);
  const double scale = 1.0 + std::abs(gamma) * spectrum.lambda_max() * (1.0 + model.grad(b).full.norm());
  const double h = 2e-3 / scale;
  const double fp1 = d2_of(rk4_step(model, spectrum, st, h, gamma, delta));
  const double fm1 = d2_of(rk4_step(model, spectrum, st, -h, gamma, delta));
  const double fp2 = d2_of(rk4_step(model, spectrum, st, 2 * h, gamma, delta));
  const double fm2 = d2_of(rk4_step(model, spectrum, st, -2 * h, gamma, delta));
  const double lhs = (-fp2 + 8.0 * fp1 - 8.0 * fm1 + fm2) / (12.0 * h);

  const double a = model.alignment(b);
  const double tr_i = model.fisher(b).trace();
  double rhs = -2.0 * gamma * a + gamma * gamma * spectrum.avg() * tr_i;
  if (delta != 0.0) {
    const OdeStats s = reduce_stats(model, st, spectrum, delta);
    const double cross = 0.5 * (s.norm_x + s.norm_star - s.d2);
    rhs -= 2.0 * delta * gamma * (s.norm_x - cross);
  }
  return {lhs, rhs};
}

}  // namespace hdsgd
