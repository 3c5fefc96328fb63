#include <doctest.h>

#include <cmath>

#include "hdsgd/ode.hpp"
#include "hdsgd/sampler.hpp"
#include "hdsgd/volterra.hpp"

using namespace hdsgd;

namespace {
RowMat gauss_rows(int d, std::uint64_t seed, double s0, double s1) {
  Sampler rng(seed, Stream::test);
  RowMat r(d, 2);
  for (int i = 0; i < d; ++i) r(i, 0) = s0 * rng.normal() / std::sqrt(double(d)), r(i, 1) = s1 * rng.normal() / std::sqrt(double(d));
  return r;
}
}  // namespace

TEST_CASE("scalar resolvent matches the ode") {
  const SpectrumK k = make_spectrum("mp:4", 150, 3);
  const OdeState st = init_overlaps(gauss_rows(150, 1, 1.3, 1.0), 1, k);
  for (const char* name : {"least_squares", "binary_logistic", "phase_retrieval"}) {
    const auto m = make_model(name);
    OdeOptions o;
    o.schedule = 0.8;
    o.T = 5;
    o.dt = 1e-3;
    VolterraOptions v;
    v.schedule = 0.8;
    v.T = 5;
    v.dt = 1e-3;
    const Trajectory a = integrate_ode(*m, k, st, o), b = solve_scalar_resolvent(*m, k, st, v);
    CAPTURE(name);
    for (Stat s : {Stat::risk, Stat::tr_b11, Stat::tr_b12}) CHECK(sup_deviation(a, b, s) <= 1e-4);
  }
}

TEST_CASE("zero rate keeps the resolvent state fixed") {
  const SpectrumK k = identity_spectrum(20);
  const OdeState st = init_overlaps(gauss_rows(20, 2, 1.0, 1.0), 1, k);
  VolterraOptions v;
  v.schedule = 0.0;
  v.T = 1;
  const Trajectory tr = solve_scalar_resolvent(*make_model("binary_logistic"), k, st, v);
  for (const auto& r : tr.rows) CHECK(r.risk == tr.rows.front().risk);
}

TEST_CASE("least squares convolution equation") {
  const SpectrumK k = make_spectrum("atoms:0.5,1.5", 20, 0);
  const OdeState st = init_overlaps(gauss_rows(20, 3, 1.2, 1.0), 1, k);
  const RiskSeries r = solve_lsq_volterra(k, st, 0.6, 0.0, 5, 1e-3);
  VolterraOptions v;
  v.schedule = 0.6;
  v.T = 5;
  v.dt = 1e-3;
  const Trajectory tr = solve_scalar_resolvent(*make_model("least_squares"), k, st, v);
  double worst = 0.0;
  for (const auto& row : tr.rows) {
    const std::size_t i = static_cast<std::size_t>(std::lround(row.t / 1e-3));
    worst = std::max(worst, std::abs(r.risk[i] - row.risk));
  }
  CHECK(worst <= 1e-6);

  RowMat same = gauss_rows(20, 3, 1.0, 1.0);
  same.col(0) = same.col(1);
  const RiskSeries zero = solve_lsq_volterra(k, init_overlaps(same, 1, k), 0.6, 0.0, 2, 1e-2);
  for (double x : zero.risk) CHECK(x == 0.0);
}

TEST_CASE("malthus exponent") {
  CHECK(lsq_malthus_rate(identity_spectrum(10), 1.0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(lsq_malthus_rate(identity_spectrum(10), 1e-3) == doctest::Approx(2e-3).epsilon(1e-3));
  CHECK(lsq_malthus_rate(identity_spectrum(10), 1.999) < 0.01);
  CHECK_THROWS_AS(lsq_malthus_rate(identity_spectrum(10), 2.0), ConfigError);

  const SpectrumK k = make_spectrum("atoms:0.5,1.5", 20, 0);
  const OdeState st = init_overlaps(gauss_rows(20, 4, 1.2, 1.0), 1, k);
  const RiskSeries r = solve_lsq_volterra(k, st, 0.8, 0.0, 30, 1e-2);
  const double fitted = fitted_decay_rate(r.t, r.risk, 15, 30);
  CHECK(fitted == doctest::Approx(lsq_malthus_rate(k, 0.8)).epsilon(0.02));
}
