#include "hdsgd/simulate.hpp"

#include <cmath>
#include <limits>

#include "hdsgd/sampler.hpp"

namespace hdsgd {

ParamState make_param_state(const SpectrumK& spectrum, const RowMat& x0, const RowMat& xstar) {
  const int d = spectrum.d();
  if (x0.rows() != d || xstar.rows() != d)
    throw ConfigError("parameter rows (" + std::to_string(x0.rows()) + ", " + std::to_string(xstar.rows()) +
                      ") do not match d=" + std::to_string(d));
  ParamState ps;
  ps.ell = static_cast<int>(x0.cols());
  ps.w.resize(d, x0.cols() + xstar.cols());
  ps.w.leftCols(x0.cols()) = x0;
  ps.w.rightCols(xstar.cols()) = xstar;
  ps.lambda = spectrum.expand();
  return ps;
}

namespace {

struct Norms {
  double x = 0.0, star = 0.0, cross = 0.0;
};

Norms norms(const ParamState& ps) {
  const int l = ps.ell, ls = ps.ell_star(), m = std::min(l, ls);
  Norms n;
  for (int i = 0; i < ps.d(); ++i) {
    const double* row = ps.w.data() + std::size_t(i) * (l + ls);
    for (int k = 0; k < l; ++k) n.x += row[k] * row[k];
    for (int k = 0; k < ls; ++k) n.star += row[l + k] * row[l + k];
    for (int k = 0; k < m; ++k) n.cross += row[k] * row[l + k];
  }
  return n;
}

TrajectoryRow row_from(const Model& model, const OverlapMatrix& b, const Norms& n, double t, double gamma,
                       double delta) {
  TrajectoryRow r;
  const int l = b.ell(), ls = b.ell_star();
  r.t = t;
  r.risk = model.risk_closure(b) + 0.5 * delta * n.x;
  r.d2 = l == ls ? n.x - 2.0 * n.cross + n.star : std::numeric_limits<double>::quiet_NaN();
  r.n = n.x + n.star;
  r.tr_b11 = b.full().topLeftCorner(l, l).trace();
  double c = 0.0;
  for (int k = 0; k < std::min(l, ls); ++k) c += b(k, l + k);
  r.tr_b12 = c;
  r.tr_b22 = b.full().bottomRightCorner(ls, ls).trace();
  r.gamma = gamma;
  r.in_domain = model.in_domain(b);
  r.b = b.full();
  return r;
}

void push_sticky(Trajectory& tr, TrajectoryRow r) {
  if (!tr.rows.empty() && !tr.rows.back().in_domain) r.in_domain = false;
  tr.rows.push_back(std::move(r));
}

}  // namespace

TrajectoryRow param_row(const Model& model, const ParamState& ps, double gamma, double delta, Exec ex) {
  const OverlapMatrix b(ps.ell, ps.ell_star(), kernels::overlap(ps.w, ps.lambda, ex));
  return row_from(model, b, norms(ps), ps.t, gamma, delta);
}

Trajectory run_sgd(const Model& model, const SpectrumK& spectrum, const RowMat& x0, const RowMat& xstar,
                   const SimOptions& opt, ParamState* final_state) {
  ParamState ps = make_param_state(spectrum, x0, xstar);
  if (ps.ell != model.ell() || ps.ell_star() != model.ell_star()) throw ConfigError("run_sgd: row widths do not match model");
  const int d = ps.d(), l = ps.ell, ls = ps.ell_star();
  const long total = static_cast<long>(std::floor(opt.T * d + 1e-9));
  const long stride = std::max(1L, std::lround(opt.record_dt * d));

  std::vector<double> sqrt_l(d), a(d);
  for (int i = 0; i < d; ++i) sqrt_l[i] = std::sqrt(ps.lambda[i]);
  Sampler rng(opt.seed, Stream::sgd);
  SmallVec eps(ls);

  Trajectory tr;
  push_sticky(tr, param_row(model, ps, opt.schedule(0.0), opt.delta, opt.exec));
  for (long k = 0; k < total; ++k) {
    const double gamma = opt.schedule(double(k) / d);
    rng.fill_normal(a);
    for (int i = 0; i < d; ++i) a[i] *= sqrt_l[i];
    for (int j = 0; j < ls; ++j) eps(j) = rng.normal();
    const SmallVec r = kernels::project(ps.w, a, opt.exec);
    const SmallVec g = model.grad_f(r, eps);
    if (!g.allFinite()) throw NumericError("run_sgd: non-finite gradient at k=" + std::to_string(k), double(k) / d);
    kernels::sgd_update(ps.w, l, a, g, gamma / d, opt.delta, opt.exec);
    ps.t = double(k + 1) / d;
    if ((k + 1) % stride == 0 || k + 1 == total) {
      TrajectoryRow row = param_row(model, ps, opt.schedule(ps.t), opt.delta, opt.exec);
      if (!std::isfinite(row.n)) throw NumericError("run_sgd: non-finite parameters", double(k) / d);
      push_sticky(tr, row);
    }
  }
  if (final_state) *final_state = std::move(ps);
  return tr;
}

RowMat grad_risk(const Model& model, const ParamState& ps, Exec ex) {
  const int l = ps.ell, ls = ps.ell_star();
  const OverlapMatrix b(l, ls, kernels::overlap(ps.w, ps.lambda, ex));
  const GradH h = model.grad(b);
  const SmallMat h1 = h.h1(), h2 = h.h2();
  RowMat out(ps.d(), l);
  for (int i = 0; i < ps.d(); ++i) {
    const SmallVec x = ps.w.row(i).head(l).transpose();
    const SmallVec xs = ps.w.row(i).tail(ls).transpose();
    out.row(i) = (ps.lambda[i] * ((h1 + h1.transpose()) * x + 2.0 * h2 * xs)).transpose();
  }
  return out;
}

Trajectory run_hsgd(const Model& model, const SpectrumK& spectrum, const RowMat& x0, const RowMat& xstar,
                    const SimOptions& opt, ParamState* final_state) {
  ParamState ps = make_param_state(spectrum, x0, xstar);
  if (ps.ell != model.ell() || ps.ell_star() != model.ell_star()) throw ConfigError("run_hsgd: row widths do not match model");
  const int d = ps.d(), l = ps.ell, ls = ps.ell_star();
  const double dt = opt.dt > 0.0 ? opt.dt : 1.0 / d;
  const long total = std::max(1L, static_cast<long>(std::ceil(opt.T / dt - 1e-9)));
  const double h = opt.T / total;
  const long stride = std::max(1L, std::lround(opt.record_dt / h));
  Sampler rng(opt.seed, Stream::hsgd);
  RowMat xi(d, l);

  Trajectory tr;
  push_sticky(tr, param_row(model, ps, opt.schedule(0.0), opt.delta, opt.exec));
  for (long k = 0; k < total; ++k) {
    const double t = k * h;
    const double gamma = opt.schedule(t);
    const OverlapMatrix b(l, ls, kernels::overlap(ps.w, ps.lambda, opt.exec));
    if (!model.in_domain(b)) {
      tr.rows.back().in_domain = false;
      tr.stopped_early = true;
      tr.stop_reason = "domain exit at t=" + std::to_string(t);
      break;
    }
    const Moments mom = model.moments(b);
    kernels::HsgdArgs args;
    args.ell = l;
    args.h1 = sym_part(mom.grad.h1());
    args.h2 = mom.grad.h2();
    args.noise_root = opt.diffusion ? psd_sqrt(mom.fisher) : SmallMat(SmallMat::Zero(l, l));
    args.dt = h;
    args.gamma = gamma;
    args.delta = opt.delta;
    args.inv_d = 1.0 / d;
    if (opt.diffusion) rng.fill_normal(std::span<double>(xi.data(), xi.size()));
    kernels::hsgd_update(ps.w, ps.lambda, xi, args, opt.exec);
    ps.t = (k + 1) * h;
    if ((k + 1) % stride == 0 || k + 1 == total) {
      TrajectoryRow row = param_row(model, ps, opt.schedule(ps.t), opt.delta, opt.exec);
      if (!std::isfinite(row.n)) throw NumericError("run_hsgd: non-finite parameters", t);
      push_sticky(tr, row);
    }
  }
  if (final_state) *final_state = std::move(ps);
  return tr;
}

Trajectory run_sgd_ambient(const Model& model, const Eigen::MatrixXd& k, const RowMat& x0, const RowMat& xstar,
                           const SimOptions& opt) {
  const int d = static_cast<int>(k.rows());
  const int l = static_cast<int>(x0.cols()), ls = static_cast<int>(xstar.cols());
  if (k.cols() != d || x0.rows() != d || xstar.rows() != d) throw ConfigError("run_sgd_ambient: shape mismatch");
  const Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) throw FactorizationError("run_sgd_ambient: covariance not positive definite");
  const Eigen::MatrixXd lmat = llt.matrixL();
  RowMat w(d, l + ls);
  w.leftCols(l) = x0;
  w.rightCols(ls) = xstar;
  const long total = static_cast<long>(std::floor(opt.T * d + 1e-9));
  const long stride = std::max(1L, std::lround(opt.record_dt * d));
  Sampler rng(opt.seed, Stream::sgd);
  std::vector<double> v(d), a(d);
  SmallVec eps(ls);

  auto row = [&](double t, double gamma) {
    const Eigen::MatrixXd kw = k * w;
    const SmallMat b = w.transpose() * kw;
    Norms n;
    for (int i = 0; i < d; ++i) {
      for (int c = 0; c < l; ++c) n.x += w(i, c) * w(i, c);
      for (int c = 0; c < ls; ++c) n.star += w(i, l + c) * w(i, l + c);
      for (int c = 0; c < std::min(l, ls); ++c) n.cross += w(i, c) * w(i, l + c);
    }
    return row_from(model, OverlapMatrix(l, ls, sym_part(b)), n, t, gamma, opt.delta);
  };

  Trajectory tr;
  push_sticky(tr, row(0.0, opt.schedule(0.0)));
  for (long it = 0; it < total; ++it) {
    const double gamma = opt.schedule(double(it) / d);
    rng.fill_normal(v);
    for (int j = 0; j < ls; ++j) eps(j) = rng.normal();
    for (int i = 0; i < d; ++i) {
      double s = 0.0;
      for (int j = 0; j <= i; ++j) s += lmat(i, j) * v[j];
      a[i] = s;
    }
    const SmallVec r = kernels::project(w, a, Exec::serial);
    const SmallVec g = model.grad_f(r, eps);
    kernels::sgd_update(w, l, a, g, gamma / d, opt.delta, Exec::serial);
    if ((it + 1) % stride == 0 || it + 1 == total) push_sticky(tr, row(double(it + 1) / d, opt.schedule(double(it + 1) / d)));
  }
  return tr;
}

}  // namespace hdsgd
