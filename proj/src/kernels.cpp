#include "hdsgd/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>

namespace hdsgd {

Exec default_exec() {
  const char* e = std::getenv("HDSGD_EXEC");
  return (e && std::strcmp(e, "serial") == 0) ? Exec::serial : Exec::parallel;
}

namespace kernels {

namespace {

int num_blocks(Eigen::Index n) { return static_cast<int>((n + kBlock - 1) / kBlock); }

// Parallel region only pays off for large row counts.
constexpr Eigen::Index kParallelMin = 4 * kBlock;

}  // namespace

SmallVec project(const RowMat& w, std::span<const double> a, Exec ex) {
  const Eigen::Index d = w.rows();
  const int p = static_cast<int>(w.cols());
  if (ex == Exec::serial) {
    SmallVec r = SmallVec::Zero(p);
    for (Eigen::Index i = 0; i < d; ++i)
      for (int k = 0; k < p; ++k) r(k) += a[i] * w(i, k);
    return r;
  }
  const int nb = num_blocks(d);
  std::vector<double> part(static_cast<std::size_t>(nb) * p, 0.0);
#pragma omp parallel for schedule(static) if (d >= kParallelMin)
  for (int b = 0; b < nb; ++b) {
    const Eigen::Index lo = Eigen::Index(b) * kBlock, hi = std::min<Eigen::Index>(d, lo + kBlock);
    double acc[kMaxDim] = {};
    for (Eigen::Index i = lo; i < hi; ++i) {
      const double* row = w.data() + i * p;
      for (int k = 0; k < p; ++k) acc[k] += a[i] * row[k];
    }
    for (int k = 0; k < p; ++k) part[std::size_t(b) * p + k] = acc[k];
  }
  SmallVec r = SmallVec::Zero(p);
  for (int b = 0; b < nb; ++b)
    for (int k = 0; k < p; ++k) r(k) += part[std::size_t(b) * p + k];
  return r;
}

void sgd_update(RowMat& w, int ell, std::span<const double> a, const SmallVec& g, double scale, double decay,
                Exec ex) {
  const Eigen::Index d = w.rows();
  const int p = static_cast<int>(w.cols());
  if (ex == Exec::serial) {
    for (Eigen::Index i = 0; i < d; ++i)
      for (int k = 0; k < ell; ++k) w(i, k) -= scale * (a[i] * g(k) + decay * w(i, k));
    return;
  }
  double* data = w.data();
#pragma omp parallel for schedule(static) if (d >= kParallelMin)
  for (Eigen::Index i = 0; i < d; ++i) {
    double* row = data + i * p;
    for (int k = 0; k < ell; ++k) row[k] -= scale * (a[i] * g(k) + decay * row[k]);
  }
}

SmallMat overlap(const RowMat& w, std::span<const double> lambda, Exec ex) {
  const Eigen::Index d = w.rows();
  const int p = static_cast<int>(w.cols());
  if (ex == Exec::serial) {
    SmallMat b = SmallMat::Zero(p, p);
    for (Eigen::Index i = 0; i < d; ++i)
      for (int j = 0; j < p; ++j)
        for (int k = 0; k < p; ++k) b(j, k) += lambda[i] * w(i, j) * w(i, k);
    return b;
  }
  const int nb = num_blocks(d);
  const int pp = p * p;
  std::vector<double> part(static_cast<std::size_t>(nb) * pp, 0.0);
#pragma omp parallel for schedule(static) if (d >= kParallelMin)
  for (int b = 0; b < nb; ++b) {
    const Eigen::Index lo = Eigen::Index(b) * kBlock, hi = std::min<Eigen::Index>(d, lo + kBlock);
    double acc[kMaxDim * kMaxDim] = {};
    for (Eigen::Index i = lo; i < hi; ++i) {
      const double* row = w.data() + i * p;
      for (int j = 0; j < p; ++j) {
        const double lj = lambda[i] * row[j];
        for (int k = j; k < p; ++k) acc[j * p + k] += lj * row[k];
      }
    }
    std::memcpy(part.data() + std::size_t(b) * pp, acc, sizeof(double) * pp);
  }
  SmallMat out = SmallMat::Zero(p, p);
  for (int b = 0; b < nb; ++b)
    for (int j = 0; j < p; ++j)
      for (int k = j; k < p; ++k) out(j, k) += part[std::size_t(b) * pp + j * p + k];
  for (int j = 0; j < p; ++j)
    for (int k = 0; k < j; ++k) out(j, k) = out(k, j);
  return out;
}

namespace {

inline void group_rhs_one(const GroupRhsArgs& a, int g, const double* s_in, double* ds_out) {
  const int p = a.p, l = a.ell;
  SmallMat s = Eigen::Map<const Eigen::MatrixXd>(s_in, p, p);
  const double lam = a.lambda[g];
  // A + A^T is exactly symmetric in floating point.
  const SmallMat ms = a.mmat * s;
  SmallMat d = (-2.0 * lam * a.gamma) * (ms + ms.transpose());
  if (a.delta != 0.0) {
    const double dg = a.delta * a.gamma;
    d.topLeftCorner(l, l) -= 2.0 * dg * s.topLeftCorner(l, l);
    d.topRightCorner(l, p - l) -= dg * s.topRightCorner(l, p - l);
    d.bottomLeftCorner(p - l, l) -= dg * s.bottomLeftCorner(p - l, l);
  }
  if (a.noise) d.topLeftCorner(l, l) += (a.mult[g] * lam * a.gamma * a.gamma) * a.fisher;
  Eigen::Map<Eigen::MatrixXd>(ds_out, p, p) = d;
}

}  // namespace

void group_rhs(const GroupRhsArgs& args, std::span<const double> s, std::span<double> ds, Exec ex) {
  const int pp = args.p * args.p;
  if (ex == Exec::serial) {
    for (int g = 0; g < args.groups; ++g) group_rhs_one(args, g, s.data() + std::size_t(g) * pp, ds.data() + std::size_t(g) * pp);
    return;
  }
#pragma omp parallel for schedule(static) if (args.groups >= 256)
  for (int g = 0; g < args.groups; ++g)
    group_rhs_one(args, g, s.data() + std::size_t(g) * pp, ds.data() + std::size_t(g) * pp);
}

namespace {

inline void hsgd_row(double* row, const double* xi_row, double lam, const HsgdArgs& a, int p) {
  const int l = a.ell, ls = p - l;
  SmallVec x = Eigen::Map<const Eigen::VectorXd>(row, l);
  SmallVec xs = Eigen::Map<const Eigen::VectorXd>(row + l, ls);
  SmallVec xi = Eigen::Map<const Eigen::VectorXd>(xi_row, l);
  const SmallVec drift = lam * (2.0 * a.h1 * x + 2.0 * a.h2 * xs) + a.delta * x;
  const SmallVec next = x - (a.dt * a.gamma) * drift + (a.gamma * std::sqrt(lam * a.dt * a.inv_d)) * (a.noise_root * xi);
  for (int k = 0; k < l; ++k) row[k] = next(k);
}

}  // namespace

void hsgd_update(RowMat& w, std::span<const double> lambda, const RowMat& xi, const HsgdArgs& args, Exec ex) {
  const Eigen::Index d = w.rows();
  const int p = static_cast<int>(w.cols());
  const int l = args.ell;
  double* data = w.data();
  if (ex == Exec::serial) {
    for (Eigen::Index i = 0; i < d; ++i) hsgd_row(data + i * p, xi.data() + i * l, lambda[i], args, p);
    return;
  }
#pragma omp parallel for schedule(static) if (d >= kParallelMin)
  for (Eigen::Index i = 0; i < d; ++i) hsgd_row(data + i * p, xi.data() + i * l, lambda[i], args, p);
}

}  // namespace kernels
}  // namespace hdsgd
