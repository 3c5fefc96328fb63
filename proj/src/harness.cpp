#include "hdsgd/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "hdsgd/ode.hpp"
#include "hdsgd/sampler.hpp"
#include "hdsgd/simulate.hpp"
#include "hdsgd/volterra.hpp"

namespace hdsgd {

namespace {

std::pair<std::string, std::string> split_spec(const std::string& spec) {
  const auto c = spec.find(':');
  if (c == std::string::npos) return {spec, ""};
  return {spec.substr(0, c), spec.substr(c + 1)};
}

double spec_number(const std::string& spec, const std::string& s) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("bad number '" + s + "' in init spec '" + spec + "'");
}

RowMat read_matrix_file(const std::string& path, int d, int cols) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open init file '" + path + "'");
  std::vector<double> vals;
  std::string tok;
  while (in >> tok) {
    for (auto& ch : tok)
      if (ch == ',') ch = ' ';
    std::istringstream ts(tok);
    double v;
    while (ts >> v) vals.push_back(v);
  }
  if (vals.size() != std::size_t(d) * cols)
    throw ConfigError("init file '" + path + "' has " + std::to_string(vals.size()) + " values, expected " +
                      std::to_string(std::size_t(d) * cols));
  RowMat m(d, cols);
  std::copy(vals.begin(), vals.end(), m.data());
  return m;
}

}  // namespace

RowMat make_init(const std::string& spec, int d, int cols, std::uint64_t seed, Stream stream, const RowMat* xstar) {
  const auto [kind, arg] = split_spec(spec);
  RowMat m = RowMat::Zero(d, cols);
  const double inv_sqrt_d = 1.0 / std::sqrt(double(d));
  auto gauss_cols = [&]() {
    Sampler rng(seed, stream);
    RowMat g(d, cols);
    for (int j = 0; j < cols; ++j)
      for (int i = 0; i < d; ++i) g(i, j) = rng.normal();
    return g;
  };
  if (kind == "zero") {
    return m;
  } else if (kind == "ones_scaled") {
    m.setConstant(spec_number(spec, arg) * inv_sqrt_d);
  } else if (kind == "gauss") {
    const double norm = spec_number(spec, arg);
    m = gauss_cols();
    for (int j = 0; j < cols; ++j) m.col(j) *= norm / m.col(j).norm();
  } else if (kind == "mix") {
    const auto c = arg.find(',');
    if (c == std::string::npos) throw ConfigError("init spec '" + spec + "' expects mix:a,b");
    const double a = spec_number(spec, arg.substr(0, c)), b = spec_number(spec, arg.substr(c + 1));
    m = gauss_cols() * (a * inv_sqrt_d);
    m.array() += b * inv_sqrt_d;
  } else if (kind == "file") {
    m = read_matrix_file(arg, d, cols);
  } else if (kind == "same_as_star") {
    if (!xstar) throw ConfigError("same_as_star is only valid for init.x0");
    if (xstar->cols() != cols) throw ConfigError("same_as_star needs ell == ell_star");
    m = *xstar;
  } else {
    throw ConfigError("unknown init spec '" + spec + "'");
  }
  return m;
}

Problem build_problem(const RunConfig& cfg) {
  Problem p;
  p.model = make_model(cfg.model, cfg.model_params);
  p.spectrum = make_spectrum(cfg.spectrum, cfg.d, cfg.problem_seed, cfg.spectrum_avg);
  p.xstar = make_init(cfg.init_xstar, cfg.d, p.model->ell_star(), cfg.problem_seed, Stream::init_xstar);
  p.x0 = make_init(cfg.init_x0, cfg.d, p.model->ell(), cfg.problem_seed, Stream::init_x0, &p.xstar);
  return p;
}

Trajectory run_solver(const Problem& p, const RunConfig& cfg) {
  const Model& m = *p.model;
  RowMat rows(cfg.d, m.dim());
  rows.leftCols(m.ell()) = p.x0;
  rows.rightCols(m.ell_star()) = p.xstar;
  switch (cfg.solver) {
    case Solver::ode: {
      OdeOptions o;
      o.schedule = cfg.gamma;
      o.delta = cfg.delta;
      o.T = cfg.T;
      o.dt = cfg.dt;
      o.record_dt = cfg.record_dt;
      o.n_max = cfg.n_max;
      o.noise = !cfg.gradient_flow;
      return integrate_ode(m, p.spectrum, init_overlaps(rows, m.ell(), p.spectrum), o);
    }
    case Solver::volterra: {
      if (cfg.gradient_flow) throw UnsupportedError("volterra solver has no gradient-flow mode");
      VolterraOptions o;
      o.schedule = cfg.gamma;
      o.delta = cfg.delta;
      o.T = cfg.T;
      if (cfg.dt > 0.0) o.dt = cfg.dt;
      o.record_dt = cfg.record_dt;
      return solve_scalar_resolvent(m, p.spectrum, init_overlaps(rows, m.ell(), p.spectrum), o);
    }
    case Solver::sgd:
    case Solver::hsgd: {
      SimOptions o;
      o.schedule = cfg.gamma;
      o.delta = cfg.delta;
      o.T = cfg.T;
      o.seed = cfg.seed;
      o.record_dt = cfg.record_dt;
      o.dt = cfg.dt;
      o.diffusion = !cfg.gradient_flow;
      if (cfg.solver == Solver::sgd) {
        if (cfg.gradient_flow) throw UnsupportedError("sgd has no gradient-flow mode");
        return run_sgd(m, p.spectrum, p.x0, p.xstar, o);
      }
      return run_hsgd(m, p.spectrum, p.x0, p.xstar, o);
    }
  }
  throw ConfigError("unknown solver");
}

RunResult run(const RunConfig& cfg) {
  RunResult r;
  r.trajectory = run_solver(build_problem(cfg), cfg);
  if (!cfg.out.empty()) write_csv(r.trajectory, cfg.out);
  const bool exited = r.trajectory.stopped_early || (!r.trajectory.empty() && !r.trajectory.back().in_domain);
  r.exit_code = exited ? 2 : 0;
  return r;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

SweepDResult sweep_d(const RunConfig& cfg, const std::vector<int>& d_list, const std::vector<std::uint64_t>& seeds,
                     Stat stat) {
  SweepDResult out;
  out.d_list = d_list;
  for (int d : d_list) {
    RunConfig c = cfg;
    c.d = d;
    const Problem p = build_problem(c);
    RunConfig ref_cfg = c;
    ref_cfg.solver = Solver::ode;
    ref_cfg.dt = 0.0;
    const Trajectory ref = run_solver(p, ref_cfg);
    out.reference_risk0.push_back(ref.rows.front().risk);

    RunConfig sim_cfg = c;
    if (sim_cfg.solver == Solver::ode || sim_cfg.solver == Solver::volterra) sim_cfg.solver = Solver::sgd;
    std::vector<ReplicateRow> rows(seeds.size());
    // replicates are independent; nested kernel regions run single-threaded
#pragma omp parallel for schedule(dynamic, 1)
    for (std::size_t k = 0; k < seeds.size(); ++k) {
      RunConfig rc = sim_cfg;
      rc.seed = seeds[k];
      const Trajectory tr = run_solver(p, rc);
      rows[k] = {d, seeds[k], sup_deviation(ref, tr, stat), tr.back().risk};
    }
    std::vector<double> devs;
    for (const auto& r : rows) {
      devs.push_back(r.sup_dev);
      out.rows.push_back(r);
    }
    out.median_sup_dev.push_back(median(devs));
  }
  return out;
}

GammaRow gamma_point(const Problem& p, const RunConfig& cfg, double gamma) {
  RunConfig c = cfg;
  c.gamma = Schedule(gamma);
  GammaRow row;
  row.gamma = gamma;
  try {
    const Trajectory tr = run_solver(p, c);
    row.d2_initial = tr.rows.front().d2;
    row.d2_final = tr.back().d2;
    row.diverged = tr.stopped_early || !std::isfinite(row.d2_final);
  } catch (const NumericError&) {
    row.diverged = true;
  }
  if (row.diverged) row.d2_final = std::numeric_limits<double>::infinity();
  return row;
}

SweepGammaResult sweep_gamma(const RunConfig& cfg, const std::vector<double>& gammas) {
  SweepGammaResult out;
  if (gammas.empty()) return out;
  const Problem p = build_problem(cfg);
  for (double g : gammas) out.rows.push_back(gamma_point(p, cfg, g));
  std::vector<GammaRow> sorted = out.rows;
  std::sort(sorted.begin(), sorted.end(), [](const GammaRow& a, const GammaRow& b) { return a.gamma < b.gamma; });
  for (const auto& r : sorted)
    if (r.d2_final > r.d2_initial) {
      out.crossing = r.gamma;
      break;
    }
  return out;
}

double refine_crossing(const Problem& p, const RunConfig& cfg, double lo, double hi, double rel_tol) {
  if (!(lo < hi)) throw ConfigError("refine_crossing: need lo < hi");
  auto up = [&](double g) {
    const GammaRow r = gamma_point(p, cfg, g);
    return r.d2_final > r.d2_initial;
  };
  while ((hi - lo) > rel_tol * hi) {
    const double mid = std::sqrt(lo * hi);
    (up(mid) ? hi : lo) = mid;
  }
  return std::sqrt(lo * hi);
}

void write_replicate_csv(const SweepDResult& r, std::ostream& os) {
  char buf[160];
  os << "d,seed,sup_dev,final_risk\n";
  for (const auto& row : r.rows) {
    std::snprintf(buf, sizeof buf, "%d,%llu,%.17g,%.17g\n", row.d, static_cast<unsigned long long>(row.seed),
                  row.sup_dev, row.final_risk);
    os << buf;
  }
}

void write_sweep_gamma_csv(const SweepGammaResult& r, std::ostream& os) {
  char buf[160];
  os << "gamma,D2_initial,D2_final,diverged\n";
  for (const auto& row : r.rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%d\n", row.gamma, row.d2_initial, row.d2_final,
                  row.diverged ? 1 : 0);
    os << buf;
  }
}

}  // namespace hdsgd
