#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "hdsgd/harness.hpp"
#include "hdsgd/moments.hpp"
#include "hdsgd/ode.hpp"
#include "hdsgd/sampler.hpp"
#include "hdsgd/thresholds.hpp"

using namespace hdsgd;
using nlohmann::json;

namespace {

struct ConfigFlags {
  std::string file;
  std::vector<std::string> sets;
  std::string solver, gamma, out;
  std::optional<int> d;
  std::optional<std::uint64_t> seed;
  std::optional<double> T;
};

void add_config_flags(CLI::App* app, ConfigFlags& f) {
  app->add_option("-c,--config", f.file, "config file (key = value)");
  app->add_option("--set", f.sets, "override key=value (repeatable)");
  app->add_option("--solver", f.solver, "ode | volterra | sgd | hsgd");
  app->add_option("--gamma", f.gamma, "learning rate or schedule t0:g0,t1:g1");
  app->add_option("--d", f.d, "dimension");
  app->add_option("--seed", f.seed, "noise seed");
  app->add_option("--T", f.T, "horizon");
  app->add_option("-o,--out", f.out, "output path");
}

RunConfig resolve(const ConfigFlags& f) {
  RunConfig cfg = f.file.empty() ? RunConfig{} : parse_config_file(f.file);
  for (const auto& kv : f.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!f.solver.empty()) cfg.solver = parse_solver(f.solver);
  if (!f.gamma.empty()) cfg.gamma = Schedule::parse(f.gamma);
  if (f.d) set_config_value(cfg, "d", std::to_string(*f.d));
  if (f.seed) cfg.seed = *f.seed;
  if (f.T) set_config_value(cfg, "T", std::to_string(*f.T));
  if (!f.out.empty()) cfg.out = f.out;
  return cfg;
}

template <class T>
std::vector<T> parse_list(const std::string& s) {
  std::vector<T> v;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    std::istringstream ts(tok);
    T x;
    if (!(ts >> x) || !ts.eof()) throw ConfigError("bad list entry '" + tok + "'");
    v.push_back(x);
  }
  return v;
}

json report_json(const ComparisonReport& rep) {
  json j = json::object();
  for (const auto& s : rep.stats) j[s.stat] = {{"sup_dev", s.sup_dev}, {"mean_dev", s.mean_dev}, {"points", s.points}};
  return j;
}

int selftest() {
  int fails = 0;
  auto check = [&](bool ok, const char* what) {
    std::printf("%s %s\n", ok ? "ok  " : "FAIL", what);
    fails += !ok;
  };
  const auto blk = philox4x32({0, 0, 0, 0}, {0, 0});
  check(blk[0] == 0x6627e8d5u && blk[3] == 0x9b00dbd8u, "philox known answer");
  const auto& q = quadrature(32);
  double s = 0.0;
  for (std::size_t i = 0; i < q.nodes().size(); ++i) s += q.weights()[i] * q.nodes()[i] * q.nodes()[i];
  check(std::abs(s - 1.0) < 1e-13, "gauss-hermite second moment");
  const auto pr = make_model("phase_retrieval");
  check(std::abs(pr->risk(OverlapMatrix::from_blocks(SmallMat::Ones(1, 1), SmallMat::Zero(1, 1),
                                                      SmallMat::Ones(1, 1))) -
                 (1.0 - 2.0 / std::numbers::pi)) < 1e-12,
        "phase retrieval risk at orthogonal unit overlap");
  const auto ls = make_model("least_squares");
  const auto g = gamma_stable(*ls, OverlapMatrix::from_blocks(SmallMat::Constant(1, 1, 2.0), SmallMat::Zero(1, 1),
                                                              SmallMat::Ones(1, 1)),
                              1.0);
  check(std::abs(g.gamma - 2.0) < 1e-12, "least squares stable rate");
  return fails ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic equivalents and simulators for streaming SGD"};
  app.require_subcommand(1);

  ConfigFlags run_f;
  auto* run_cmd = app.add_subcommand("run", "solve or simulate one configuration, write the trajectory CSV");
  add_config_flags(run_cmd, run_f);

  std::string ref_csv, report_path, against;
  std::vector<std::string> other_csv;
  ConfigFlags cmp_f;
  auto* cmp = app.add_subcommand("compare", "deviation of trajectories from a reference");
  cmp->add_option("--reference", ref_csv, "reference trajectory CSV");
  cmp->add_option("--other", other_csv, "trajectory CSVs to compare");
  cmp->add_option("--against", against, "with --config: solver compared to the ODE reference");
  cmp->add_option("--report", report_path, "write stat,sup_dev,mean_dev CSV");
  add_config_flags(cmp, cmp_f);

  ConfigFlags sd_f;
  std::string d_list = "200,400,800,1600", seeds_s = "10", stat_s = "risk";
  auto* sd = app.add_subcommand("sweep-d", "per-d deviation of simulated runs from the ODE");
  add_config_flags(sd, sd_f);
  sd->add_option("--d-list", d_list, "comma separated dimensions");
  sd->add_option("--seeds", seeds_s, "number of seeds, or comma separated seeds");
  sd->add_option("--stat", stat_s, "risk | D2 | N | tr_B11 | tr_B12 | tr_B22");

  ConfigFlags sg_f;
  std::string gammas_s, grid_s;
  bool refine = false;
  auto* sg = app.add_subcommand("sweep-gamma", "final D2 against the learning rate");
  add_config_flags(sg, sg_f);
  sg->add_option("--gammas", gammas_s, "comma separated rates");
  sg->add_option("--log-grid", grid_s, "lo,hi,n");
  sg->add_flag("--refine", refine, "bisect the crossing between grid points");

  std::string th_kind = "descent_q";
  double q = 0.5, avg = 1.0, mu = 1.0, lhat = 1.0, lmin = 1.0, zeta = 0.5, gam = 1.0, theta = 1.0, knorm = 1.0,
         r0 = 1.0, rs = 1.0;
  ConfigFlags th_f;
  auto* th = app.add_subcommand("threshold", "closed-form rates and thresholds (JSON)");
  th->add_option("--kind", th_kind, "descent_q | rsi_global | rsi_local | stable | pr_saddle");
  th->add_option("--q", q);
  th->add_option("--avg", avg, "average eigenvalue trK/d");
  th->add_option("--mu", mu);
  th->add_option("--L", lhat);
  th->add_option("--lambda-min", lmin);
  th->add_option("--zeta", zeta);
  th->add_option("--theta", theta);
  th->add_option("--knorm", knorm, "operator norm of K");
  th->add_option("--init-dist", r0, "|X0 - X*|");
  th->add_option("--star-norm", rs, "|X*|");
  th->add_option("--rate", gam, "learning rate (pr_saddle)");
  add_config_flags(th, th_f);

  app.add_subcommand("selftest", "quick internal consistency checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      const RunConfig cfg = resolve(run_f);
      const RunResult r = run(cfg);
      if (cfg.out.empty()) write_csv(r.trajectory, std::cout);
      if (r.exit_code == 2) std::cerr << "early stop: " << r.trajectory.stop_reason << "\n";
      return r.exit_code;
    }
    if (*cmp) {
      Trajectory ref;
      std::vector<std::pair<std::string, Trajectory>> others;
      if (!against.empty()) {
        RunConfig cfg = resolve(cmp_f);
        const Problem p = build_problem(cfg);
        RunConfig rc = cfg;
        rc.solver = Solver::ode;
        ref = run_solver(p, rc);
        rc.solver = parse_solver(against);
        others.emplace_back(against, run_solver(p, rc));
      } else {
        if (ref_csv.empty() || other_csv.empty()) throw ConfigError("compare needs --reference and --other, or --config and --against");
        ref = read_csv_file(ref_csv);
        for (const auto& f : other_csv) others.emplace_back(f, read_csv_file(f));
      }
      json summary = json::object();
      for (const auto& [name, tr] : others) {
        if (tr.back().t + 1e-9 < ref.back().t && !tr.stopped_early)
          std::cerr << "warning: " << name << " ends before the reference\n";
        const ComparisonReport rep = compare_trajectories(ref, tr);
        summary[name] = report_json(rep);
        if (!report_path.empty()) {
          std::ofstream os(others.size() == 1 ? report_path : report_path + "." + std::to_string(summary.size()));
          write_report_csv(rep, os);
        }
      }
      std::cout << summary.dump(2) << "\n";
      return 0;
    }
    if (*sd) {
      const RunConfig cfg = resolve(sd_f);
      std::vector<std::uint64_t> seeds;
      if (seeds_s.find(',') == std::string::npos) {
        const auto n = std::stoull(seeds_s);
        for (std::uint64_t s = 0; s < n; ++s) seeds.push_back(cfg.seed + s);
      } else {
        seeds = parse_list<std::uint64_t>(seeds_s);
      }
      Stat stat = Stat::risk;
      bool found = false;
      for (Stat s : kAllStats)
        if (stat_s == stat_name(s)) stat = s, found = true;
      if (!found) throw ConfigError("unknown statistic '" + stat_s + "'");
      const SweepDResult r = sweep_d(cfg, parse_list<int>(d_list), seeds, stat);
      if (!cfg.out.empty()) {
        std::ofstream os(cfg.out);
        write_replicate_csv(r, os);
      }
      json j = json::array();
      for (std::size_t i = 0; i < r.d_list.size(); ++i)
        j.push_back({{"d", r.d_list[i]}, {"median_sup_dev", r.median_sup_dev[i]}, {"ode_initial", r.reference_risk0[i]}});
      std::cout << j.dump(2) << "\n";
      return 0;
    }
    if (*sg) {
      const RunConfig cfg = resolve(sg_f);
      std::vector<double> gammas;
      if (!grid_s.empty()) {
        const auto g = parse_list<double>(grid_s);
        if (g.size() != 3 || g[0] <= 0 || g[1] <= g[0] || g[2] < 2) throw ConfigError("--log-grid expects lo,hi,n");
        for (int i = 0; i < int(g[2]); ++i) gammas.push_back(g[0] * std::pow(g[1] / g[0], i / (g[2] - 1)));
      } else if (!gammas_s.empty()) {
        gammas = parse_list<double>(gammas_s);
      }
      const SweepGammaResult r = sweep_gamma(cfg, gammas);
      if (!cfg.out.empty()) {
        std::ofstream os(cfg.out);
        write_sweep_gamma_csv(r, os);
      } else {
        write_sweep_gamma_csv(r, std::cout);
      }
      json j = {{"crossing", r.crossing ? json(*r.crossing) : json(nullptr)}};
      if (refine && r.crossing) {
        double lo = 0.0;
        for (const auto& row : r.rows)
          if (row.gamma < *r.crossing) lo = std::max(lo, row.gamma);
        if (lo > 0.0) j["refined"] = refine_crossing(build_problem(cfg), cfg, lo, *r.crossing, 1e-3);
      }
      std::cerr << j.dump() << "\n";
      return 0;
    }
    if (*th) {
      json j;
      if (th_kind == "descent_q") {
        j = {{"gamma", descent_threshold_q(q, avg)}};
      } else if (th_kind == "rsi_global" || th_kind == "rsi_local") {
        const RateCertificate c = th_kind == "rsi_global"
                                      ? rate_rsi_global(mu, lhat, avg, lmin, zeta)
                                      : rate_rsi_local(mu, theta, lhat, avg, lmin, knorm, r0, rs, zeta);
        j = {{"gamma", c.gamma}, {"rate_a", c.rate_a}, {"regime", regime_name(c.regime)},
             {"feasible", c.feasible}, {"zeta0", c.zeta0}};
      } else if (th_kind == "stable") {
        const RunConfig cfg = resolve(th_f);
        const Problem p = build_problem(cfg);
        RowMat rows(cfg.d, p.model->dim());
        rows << p.x0, p.xstar;
        const OdeState st = init_overlaps(rows, p.model->ell(), p.spectrum);
        const StableGamma s = gamma_stable(*p.model, average_overlap(st, p.spectrum), p.spectrum.avg());
        j = {{"gamma", s.gamma}, {"degenerate", s.degenerate}, {"A", s.a}, {"trI", s.tr_i}};
      } else if (th_kind == "pr_saddle") {
        const double beta = pr_saddle_beta(gam);
        const auto roots = pr_saddle_ratio(beta);
        j = {{"beta", beta}};
        if (roots) {
          j["root_plus"] = roots->first;
          j["root_minus"] = roots->second;
          j["sqrt_ratio"] = roots->first / std::numbers::pi;
          j["escape"] = roots->first / std::numbers::pi > std::numbers::pi / 4.0;
        } else {
          j["no_real_saddle"] = true;
        }
      } else {
        throw ConfigError("unknown threshold kind '" + th_kind + "'");
      }
      std::cout << j.dump(2) << "\n";
      return 0;
    }
    return selftest();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
