#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "hdsgd/model.hpp"
#include "hdsgd/moments.hpp"
#include "hdsgd/sampler.hpp"

namespace hdsgd::testing {

// Wishart-like interior overlap: L L^T / p + floor * I, scaled by s.
inline OverlapMatrix random_overlap(int ell, int ell_star, Sampler& rng, double s = 1.0, double floor = 0.05) {
  const int p = ell + ell_star;
  SmallMat l(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) l(i, j) = rng.normal();
  SmallMat b = s * (l * l.transpose() / p + floor * SmallMat::Identity(p, p));
  return OverlapMatrix(ell, ell_star, sym_part(b));
}

// Max over entries of |fd - analytic|, relative to the largest analytic entry.
// Off-diagonal perturbations move B_ij and B_ji together, so the central
// difference estimates 2 G_ij.
inline double fd_grad_error(const Model& m, const OverlapMatrix& b, double step_rel = 1e-5) {
  const SmallMat g = m.grad(b).full;
  const int p = b.dim();
  const double h = step_rel * (1.0 + b.full().norm());
  double worst = 0.0;
  const double scale = std::max(g.cwiseAbs().maxCoeff(), 1e-8);
  for (int i = 0; i < p; ++i)
    for (int j = i; j < p; ++j) {
      OverlapMatrix bp = b, bm = b;
      bp(i, j) += h, bm(i, j) -= h;
      if (i != j) bp(j, i) += h, bm(j, i) -= h;
      const double fd = (m.risk(bp) - m.risk(bm)) / (2.0 * h);
      const double an = i == j ? g(i, j) : 2.0 * g(i, j);
      worst = std::max(worst, std::abs(fd - an) / scale);
    }
  return worst;
}

struct OracleCheck {
  std::string what;
  double analytic;
  double mc;
  double stderr_;
  double z() const { return stderr_ > 0 ? std::abs(analytic - mc) / stderr_ : (analytic == mc ? 0.0 : INFINITY); }
};

// Monte-Carlo oracle over (x, x*, eps) ~ N(0, B) x N(0, I) for risk, fisher
// entries (upper triangle), A (when ell == ell_star) and A0.
inline std::vector<OracleCheck> mc_oracle(const Model& m, const OverlapMatrix& b, std::int64_t n, std::uint64_t seed) {
  const int l = m.ell(), ls = m.ell_star(), p = l + ls;
  const bool has_a = l == ls;
  SmallMat cov = SmallMat::Zero(p + ls, p + ls);
  cov.topLeftCorner(p, p) = b.full();
  cov.bottomRightCorner(ls, ls).setIdentity();
  const int k = 1 + l * (l + 1) / 2 + (has_a ? 1 : 0) + 1;
  auto f = [&](const SmallVec& z) {
    const SmallVec r = z.head(p), eps = z.tail(ls);
    const SmallVec g = m.grad_f(r, eps);
    SmallMat v(k, 1);
    int c = 0;
    v(c++, 0) = m.loss(r, eps);
    for (int i = 0; i < l; ++i)
      for (int j = i; j < l; ++j) v(c++, 0) = g(i) * g(j);
    if (has_a) v(c++, 0) = (r.head(l) - r.tail(ls)).dot(g);
    v(c++, 0) = r.head(l).dot(g);
    return v;
  };
  const auto est = mc_expect(f, cov, n, seed);
  std::vector<OracleCheck> out;
  int c = 0;
  out.push_back({"risk", m.risk(b), est.mean(c, 0), est.stderr_(c, 0)});
  ++c;
  const SmallMat fi = m.fisher(b);
  for (int i = 0; i < l; ++i)
    for (int j = i; j < l; ++j, ++c)
      out.push_back({"fisher(" + std::to_string(i) + "," + std::to_string(j) + ")", fi(i, j), est.mean(c, 0),
                     est.stderr_(c, 0)});
  if (has_a) {
    out.push_back({"A", m.alignment(b), est.mean(c, 0), est.stderr_(c, 0)});
    ++c;
  }
  out.push_back({"A0", m.alignment0(b), est.mean(c, 0), est.stderr_(c, 0)});
  return out;
}

}  // namespace hdsgd::testing
