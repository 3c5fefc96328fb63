#pragma once

#include <string>

#include "hdsgd/linalg.hpp"

namespace hdsgd {

// Symmetric (l+ls)x(l+ls) block matrix [[B11,B12],[B12^T,B22]].
class OverlapMatrix {
 public:
  OverlapMatrix() = default;
  OverlapMatrix(int ell, int ell_star);
  OverlapMatrix(int ell, int ell_star, const SmallMat& full);
  static OverlapMatrix from_blocks(const SmallMat& b11, const SmallMat& b12, const SmallMat& b22);

  int ell() const { return ell_; }
  int ell_star() const { return ell_star_; }
  int dim() const { return ell_ + ell_star_; }

  const SmallMat& full() const { return m_; }
  SmallMat& full() { return m_; }

  SmallMat b11() const { return m_.topLeftCorner(ell_, ell_); }
  SmallMat b12() const { return m_.topRightCorner(ell_, ell_star_); }
  SmallMat b22() const { return m_.bottomRightCorner(ell_star_, ell_star_); }

  double operator()(int i, int j) const { return m_(i, j); }
  double& operator()(int i, int j) { return m_(i, j); }

  bool is_symmetric(double tol) const;
  bool is_psd(double tol) const;
  std::string describe() const;

 private:
  int ell_ = 0;
  int ell_star_ = 0;
  SmallMat m_;
};

// Blocks of grad h in the symmetric convention: d h / d B12 = 2 H2.
struct GradH {
  SmallMat full;
  int ell = 0;
  int ell_star = 0;

  SmallMat h1() const { return full.topLeftCorner(ell, ell); }
  SmallMat h2() const { return full.topRightCorner(ell, ell_star); }
  SmallMat h3() const { return full.bottomRightCorner(ell_star, ell_star); }
};

GradH make_grad(const SmallMat& h1, const SmallMat& h2, const SmallMat& h3);

}  // namespace hdsgd
