#pragma once

#include <Eigen/Dense>

namespace hdsgd {

// Overlap blocks never exceed 6x6; fixed capacity keeps products off the heap.
inline constexpr int kMaxDim = 6;

using SmallMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;
using SmallVec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;

inline SmallMat sym_part(const SmallMat& a) { return 0.5 * (a + a.transpose()); }

inline double min_eigenvalue(const SmallMat& a) {
  if (a.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<SmallMat> es(sym_part(a), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// Symmetric square root with negative eigenvalues clamped to zero.
inline SmallMat psd_sqrt(const SmallMat& a) {
  Eigen::SelfAdjointEigenSolver<SmallMat> es(sym_part(a));
  SmallVec ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

// Raise eigenvalues below -tol to zero; leaves others untouched.
inline bool project_psd(SmallMat& a, double tol) {
  Eigen::SelfAdjointEigenSolver<SmallMat> es(sym_part(a));
  if (es.eigenvalues().minCoeff() >= -tol) return false;
  SmallVec ev = es.eigenvalues();
  for (int i = 0; i < ev.size(); ++i)
    if (ev(i) < -tol) ev(i) = 0.0;
  a = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  return true;
}

inline double psd_tol(const SmallMat& a) { return 1e-10 * (1.0 + a.norm()); }

}  // namespace hdsgd
