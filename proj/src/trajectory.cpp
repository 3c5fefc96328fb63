#include "hdsgd/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "hdsgd/errors.hpp"

namespace hdsgd {

const char* stat_name(Stat s) {
  switch (s) {
    case Stat::risk: return "risk";
    case Stat::d2: return "D2";
    case Stat::n: return "N";
    case Stat::tr_b11: return "tr_B11";
    case Stat::tr_b12: return "tr_B12";
    case Stat::tr_b22: return "tr_B22";
  }
  return "?";
}

double stat_value(const TrajectoryRow& r, Stat s) {
  switch (s) {
    case Stat::risk: return r.risk;
    case Stat::d2: return r.d2;
    case Stat::n: return r.n;
    case Stat::tr_b11: return r.tr_b11;
    case Stat::tr_b12: return r.tr_b12;
    case Stat::tr_b22: return r.tr_b22;
  }
  return 0.0;
}

double interpolate(const Trajectory& tr, double t, Stat s) {
  const auto& rows = tr.rows;
  if (rows.empty()) throw Error("interpolate: empty trajectory");
  const double eps = 1e-9 * (1.0 + std::abs(t));
  if (t < rows.front().t - eps || t > rows.back().t + eps) throw Error("interpolate: t outside trajectory range");
  auto it = std::lower_bound(rows.begin(), rows.end(), t, [](const TrajectoryRow& r, double v) { return r.t < v; });
  if (it == rows.begin()) return stat_value(*it, s);
  if (it == rows.end()) return stat_value(rows.back(), s);
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double w = (t - lo.t) / (hi.t - lo.t);
  return (1.0 - w) * stat_value(lo, s) + w * stat_value(hi, s);
}

namespace {

void put(std::ostream& os, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  os << buf;
}

}  // namespace

void write_csv(const Trajectory& tr, std::ostream& os) {
  os << kTrajectoryHeader << '\n';
  for (const auto& r : tr.rows) {
    const double v[] = {r.t, r.risk, r.d2, r.n, r.tr_b11, r.tr_b12, r.tr_b22, r.gamma};
    for (double x : v) {
      put(os, x);
      os << ',';
    }
    os << (r.in_domain ? 1 : 0) << '\n';
  }
}

void write_csv(const Trajectory& tr, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write '" + path + "'");
  write_csv(tr, os);
}

Trajectory read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error("trajectory CSV is empty");
  if (line != kTrajectoryHeader) throw Error("trajectory CSV header mismatch: '" + line + "'");
  Trajectory tr;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    std::vector<double> v;
    while (std::getline(ss, tok, ',')) v.push_back(std::strtod(tok.c_str(), nullptr));
    if (v.size() != 9) throw Error("trajectory CSV line " + std::to_string(lineno) + ": expected 9 fields");
    TrajectoryRow r;
    r.t = v[0], r.risk = v[1], r.d2 = v[2], r.n = v[3];
    r.tr_b11 = v[4], r.tr_b12 = v[5], r.tr_b22 = v[6], r.gamma = v[7];
    r.in_domain = v[8] != 0.0;
    tr.rows.push_back(r);
  }
  if (!tr.rows.empty() && !tr.rows.back().in_domain) tr.stopped_early = true;
  return tr;
}

Trajectory read_csv_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open '" + path + "'");
  return read_csv(is);
}

const StatDeviation* ComparisonReport::find(const std::string& name) const {
  for (const auto& s : stats)
    if (s.stat == name) return &s;
  return nullptr;
}

double sup_deviation(const Trajectory& reference, const Trajectory& other, Stat s) {
  if (reference.rows.empty()) throw Error("compare: empty reference");
  double sup = 0.0;
  const double t0 = reference.rows.front().t, t1 = reference.rows.back().t;
  for (const auto& r : other.rows) {
    if (r.t < t0 - 1e-9 || r.t > t1 + 1e-9) continue;
    const double a = stat_value(r, s), b = interpolate(reference, r.t, s);
    if (std::isnan(a) && std::isnan(b)) continue;
    sup = std::max(sup, std::abs(a - b));
  }
  return sup;
}

ComparisonReport compare_trajectories(const Trajectory& reference, const Trajectory& other) {
  if (reference.rows.empty() || other.rows.empty()) throw Error("compare: empty trajectory");
  ComparisonReport rep;
  const double t0 = reference.rows.front().t, t1 = reference.rows.back().t;
  for (Stat s : kAllStats) {
    StatDeviation dev;
    dev.stat = stat_name(s);
    double sum = 0.0;
    for (const auto& r : other.rows) {
      if (r.t < t0 - 1e-9 || r.t > t1 + 1e-9) continue;
      const double a = stat_value(r, s), b = interpolate(reference, r.t, s);
      if (std::isnan(a) && std::isnan(b)) continue;
      const double e = std::abs(a - b);
      dev.sup_dev = std::max(dev.sup_dev, std::isnan(e) ? std::numeric_limits<double>::infinity() : e);
      sum += e;
      ++dev.points;
    }
    if (dev.points == 0) continue;
    dev.mean_dev = sum / dev.points;
    rep.stats.push_back(dev);
  }
  return rep;
}

void write_report_csv(const ComparisonReport& rep, std::ostream& os) {
  os << "stat,sup_dev,mean_dev\n";
  for (const auto& s : rep.stats) {
    os << s.stat << ',';
    put(os, s.sup_dev);
    os << ',';
    put(os, s.mean_dev);
    os << '\n';
  }
}

}  // namespace hdsgd
