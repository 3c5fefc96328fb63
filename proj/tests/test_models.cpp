#include <doctest.h>

#include <cmath>
#include <numbers>

#include "hdsgd/model.hpp"
#include "hdsgd/moments.hpp"
#include "test_support.hpp"

using namespace hdsgd;
using hdsgd::testing::fd_grad_error;
using hdsgd::testing::random_overlap;

namespace {
constexpr double pi = std::numbers::pi;

OverlapMatrix scalar_b(double b11, double b12, double b22) {
  return OverlapMatrix::from_blocks(SmallMat::Constant(1, 1, b11), SmallMat::Constant(1, 1, b12),
                                    SmallMat::Constant(1, 1, b22));
}

SmallVec vec(std::initializer_list<double> v) {
  SmallVec r(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) r(i++) = x;
  return r;
}

std::vector<ModelPtr> zoo() {
  return {make_model("least_squares", {{"eta", "0.3"}}),
          make_model("least_squares", {{"ell", "2"}}),
          make_model("binary_logistic"),
          make_model("multiclass_logistic", {{"classes", "3"}}),
          make_model("phase_retrieval"),
          make_model("phase_chase"),
          make_model("single_index_activation", {{"activation", "relu"}}),
          make_model("single_index_activation", {{"activation", "erf"}}),
          make_model("single_index_activation", {{"activation", "cos"}}),
          make_model("single_index_activation", {{"activation", "sin"}}),
          make_model("single_index_activation", {{"activation", "linear"}})};
}
}  // namespace

TEST_CASE("factory validation") {
  CHECK_THROWS_AS(make_model("single_index_activation", {{"activation", "tanhlike"}}), ConfigError);
  CHECK_THROWS_AS(make_model("nope"), ConfigError);
  CHECK_THROWS_AS(make_model("least_squares", {{"gamma", "1"}}), ConfigError);
  const auto pr = make_model("phase_retrieval");
  CHECK(pr->ell() == 1);
  CHECK(pr->ell_star() == 1);
  const auto pc = make_model("phase_chase");
  CHECK(pc->ell() == 2);
  CHECK(pc->ell_star() == 1);
}

TEST_CASE("least squares closed forms") {
  const auto m = make_model("least_squares");
  CHECK(m->risk(scalar_b(1, 0, 1)) == doctest::Approx(1.0));
  const GradH g = m->grad(scalar_b(1.7, 0.3, 0.9));
  CHECK(g.h1()(0, 0) == 0.5);
  CHECK(g.h2()(0, 0) == -0.5);
  CHECK(g.h3()(0, 0) == 0.5);
  CHECK(m->fisher(scalar_b(0.8, 0.8, 0.8)).norm() < 1e-15);
  CHECK(m->alignment(scalar_b(0.8, 0.8, 0.8)) == doctest::Approx(0.0));
  CHECK(m->alignment(scalar_b(2, 0.5, 1)) == doctest::Approx(2.0));
  CHECK(m->grad_f(vec({1.0, 0.25}), vec({2.0}))(0) == doctest::Approx(0.75));

  // h affine in B
  const auto mn = make_model("least_squares", {{"eta", "0.4"}});
  const OverlapMatrix b = scalar_b(1.2, 0.1, 0.7);
  OverlapMatrix b3 = b;
  b3.full() *= 3.0;
  CHECK(mn->risk(b3) == doctest::Approx(3.0 * mn->risk(b) - 2.0 * 0.5 * 0.16));
  CHECK(mn->grad_f(vec({1.0, 0.25}), vec({2.0}))(0) == doctest::Approx(0.75 - 0.8));
}

TEST_CASE("phase retrieval closed forms") {
  const auto m = make_model("phase_retrieval");
  const OverlapMatrix b = scalar_b(1, 0, 1);
  CHECK(m->risk(b) == doctest::Approx(1.0 - 2.0 / pi).epsilon(1e-14));
  const GradH g = m->grad(b);
  CHECK(g.h1()(0, 0) == doctest::Approx(0.5 - 1.0 / pi));
  CHECK(std::abs(g.h2()(0, 0)) < 1e-15);
  Sampler rng(5, Stream::test);
  for (int i = 0; i < 10; ++i) {
    const OverlapMatrix r = random_overlap(1, 1, rng);
    CHECK(m->fisher(r)(0, 0) == 2.0 * m->risk(r));
  }
  CHECK(m->in_domain(b));
  CHECK_FALSE(m->in_domain(scalar_b(1, 1, 1)));
  CHECK_THROWS_AS(m->risk(scalar_b(1, 1, 1)), DomainExit);
  CHECK(m->grad_f(vec({-0.7, 0.7}), vec({0.0}))(0) == 0.0);
  CHECK(make_model("least_squares")->in_domain(scalar_b(1, 1, 1)));
}

TEST_CASE("phase chase closed forms") {
  const auto m = make_model("phase_chase");
  SmallMat q(2, 2);
  q << 1, 0, 0, 1;
  const OverlapMatrix b = OverlapMatrix::from_blocks(q, SmallMat::Zero(2, 1), SmallMat::Zero(1, 1));
  CHECK(m->risk(b) == doctest::Approx(4.0));
  const SmallMat i = m->fisher(b);
  CHECK(i(0, 0) == doctest::Approx(192.0));
  CHECK(i(1, 1) == doctest::Approx(192.0));
  CHECK(std::abs(i(0, 1)) < 1e-12);
}

TEST_CASE("logistic pointwise gradient") {
  const auto m = make_model("binary_logistic");
  const double x = 0.4, xs = -1.1;
  const double expect = std::exp(x) / (1 + std::exp(x)) - std::exp(xs) / (1 + std::exp(xs));
  CHECK(m->grad_f(vec({x, xs}), vec({0.0}))(0) == doctest::Approx(expect).epsilon(1e-14));
  Sampler rng(9, Stream::test);
  for (int k = 0; k < 5; ++k) CHECK(m->alignment(random_overlap(1, 1, rng)) >= 0.0);
}

TEST_CASE("erf risk against the defining expectation") {
  const auto m = make_model("single_index_activation", {{"activation", "erf"}});
  const OverlapMatrix b = scalar_b(1.0, 0.5, 1.0);
  const double direct = gauss_expect(
      [](const SmallVec& z) {
        const double d = std::erf(z(0)) - std::erf(z(1));
        return 0.5 * d * d;
      },
      b.full(), quadrature(128));
  CHECK(m->risk(b) == doctest::Approx(direct).epsilon(1e-10));
}

TEST_CASE("erf fisher against direct integration") {
  const auto m = make_model("single_index_activation", {{"activation", "erf"}});
  const auto g2 = [](const SmallVec& r) {
    const double g = 2.0 / std::sqrt(pi) * std::exp(-r(0) * r(0)) * (std::erf(r(0)) - std::erf(r(1)));
    return g * g;
  };
  for (const auto& b : {scalar_b(0.4, -0.1, 0.7), scalar_b(2.99, 1.70, 1.05), scalar_b(1.2, -1.0, 2.0)})
    CHECK(m->fisher(b)(0, 0) == doctest::Approx(gauss_expect(g2, b.full(), quadrature(256))).epsilon(1e-8));
  // wide overlaps where the product rule is unreliable
  for (const auto& b : {scalar_b(8.0, -2.0, 1.0), scalar_b(0.3, 0.2, 100.0)}) {
    const auto est = mc_expect(
        [&](const SmallVec& r) {
          SmallMat v(1, 1);
          v(0, 0) = g2(r);
          return v;
        },
        b.full(), 1000000, 9);
    CHECK(std::abs(m->fisher(b)(0, 0) - est.mean(0, 0)) <= 4.0 * est.stderr_(0, 0));
  }
}

TEST_CASE("gradients match finite differences") {
  Sampler rng(21, Stream::test);
  for (const auto& m : zoo()) {
    CAPTURE(m->name());
    CAPTURE(m->params().size());
    for (int k = 0; k < 5; ++k) {
      const OverlapMatrix b = random_overlap(m->ell(), m->ell_star(), rng);
      CHECK(fd_grad_error(*m, b) <= 1e-5);
    }
  }
}

TEST_CASE("fisher is positive semidefinite") {
  Sampler rng(22, Stream::test);
  for (const auto& m : zoo())
    for (int k = 0; k < 5; ++k) {
      const OverlapMatrix b = random_overlap(m->ell(), m->ell_star(), rng);
      CHECK(min_eigenvalue(m->fisher(b)) >= -1e-10);
    }
}

TEST_CASE("moments agree with the monte carlo oracle") {
  Sampler rng(23, Stream::test);
  for (const auto& m : zoo()) {
    const OverlapMatrix b = random_overlap(m->ell(), m->ell_star(), rng);
    for (const auto& c : hdsgd::testing::mc_oracle(*m, b, 200000, 3)) {
      CAPTURE(m->name());
      CAPTURE(c.what);
      CHECK(c.z() <= 4.0);
    }
  }
}

TEST_CASE("alignment needs square overlaps") {
  const auto m = make_model("phase_chase");
  Sampler rng(4, Stream::test);
  CHECK_THROWS_AS(m->alignment(random_overlap(2, 1, rng)), UnsupportedError);
}
