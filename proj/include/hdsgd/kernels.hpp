#pragma once

#include <span>
#include <vector>

#include "hdsgd/linalg.hpp"

namespace hdsgd {

// Parallel kernels use fixed-size blocks, so results do not depend on the
// thread count. Serial variants are plain loops kept as a reference.
enum class Exec { serial, parallel };

// HDSGD_EXEC=serial in the environment selects the reference kernels.
Exec default_exec();

namespace kernels {

inline constexpr int kBlock = 1024;

// r = sum_i a_i w_i over the rows of w.
SmallVec project(const RowMat& w, std::span<const double> a, Exec ex);

// Rows i: x_i -= scale * (a_i g + decay x_i) on the first ell columns of w.
void sgd_update(RowMat& w, int ell, std::span<const double> a, const SmallVec& g, double scale, double decay,
                Exec ex);

// sum_i lambda_i w_i w_i^T.
SmallMat overlap(const RowMat& w, std::span<const double> lambda, Exec ex);

// Per-group overlap ODE right-hand side. s and ds hold groups blocks of p*p
// (column-major); lambda/mult per group. mmat = [[H1,H2],[0,0]].
struct GroupRhsArgs {
  int groups;
  int p;
  int ell;
  const double* lambda;
  const double* mult;
  SmallMat mmat;
  SmallMat fisher;
  double gamma;
  double delta;
  bool noise;
};
void group_rhs(const GroupRhsArgs& args, std::span<const double> s, std::span<double> ds, Exec ex);

// Euler-Maruyama row step for homogenized SGD.
// x_i -= dt*gamma*(lambda_i (2 H1 x_i + 2 H2 x*_i) + delta x_i) + gamma sqrt(lambda_i dt / d) S xi_i.
struct HsgdArgs {
  int ell;
  SmallMat h1;
  SmallMat h2;
  SmallMat noise_root;
  double dt;
  double gamma;
  double delta;
  double inv_d;
};
void hsgd_update(RowMat& w, std::span<const double> lambda, const RowMat& xi, const HsgdArgs& args, Exec ex);

}  // namespace kernels
}  // namespace hdsgd
