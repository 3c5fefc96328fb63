#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hdsgd/linalg.hpp"

namespace hdsgd {

inline constexpr const char* kTrajectoryHeader = "t,risk,D2,N,tr_B11,tr_B12,tr_B22,gamma,in_domain";

struct TrajectoryRow {
  double t = 0.0;
  double risk = 0.0;
  double d2 = 0.0;  // NaN when ell != ell_star
  double n = 0.0;
  double tr_b11 = 0.0;
  double tr_b12 = 0.0;
  double tr_b22 = 0.0;
  double gamma = 0.0;
  bool in_domain = true;
  SmallMat b;  // averaged overlap; not part of the CSV
};

struct Trajectory {
  std::vector<TrajectoryRow> rows;
  bool stopped_early = false;
  std::string stop_reason;

  bool empty() const { return rows.empty(); }
  const TrajectoryRow& back() const { return rows.back(); }
};

enum class Stat { risk, d2, n, tr_b11, tr_b12, tr_b22 };
inline constexpr Stat kAllStats[] = {Stat::risk, Stat::d2, Stat::n, Stat::tr_b11, Stat::tr_b12, Stat::tr_b22};

const char* stat_name(Stat s);
double stat_value(const TrajectoryRow& r, Stat s);

// Linear interpolation in t; t must lie inside the trajectory's range.
double interpolate(const Trajectory& tr, double t, Stat s);

void write_csv(const Trajectory& tr, std::ostream& os);
void write_csv(const Trajectory& tr, const std::string& path);
Trajectory read_csv(std::istream& is);
Trajectory read_csv_file(const std::string& path);

struct StatDeviation {
  std::string stat;
  double sup_dev = 0.0;
  double mean_dev = 0.0;
  int points = 0;
};

struct ComparisonReport {
  std::vector<StatDeviation> stats;
  const StatDeviation* find(const std::string& name) const;
};

// Deviations of `other` from `reference`, the latter interpolated at the
// other's record times (times outside the reference range are skipped).
ComparisonReport compare_trajectories(const Trajectory& reference, const Trajectory& other);
double sup_deviation(const Trajectory& reference, const Trajectory& other, Stat s);

void write_report_csv(const ComparisonReport& rep, std::ostream& os);

}  // namespace hdsgd
