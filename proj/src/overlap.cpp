#include "hdsgd/overlap.hpp"

#include <sstream>

#include "hdsgd/errors.hpp"

namespace hdsgd {

OverlapMatrix::OverlapMatrix(int ell, int ell_star) : ell_(ell), ell_star_(ell_star) {
  if (ell < 1 || ell_star < 1 || ell + ell_star > kMaxDim)
    throw ConfigError("overlap dimensions out of range: ell=" + std::to_string(ell) +
                      " ell_star=" + std::to_string(ell_star));
  m_ = SmallMat::Zero(ell + ell_star, ell + ell_star);
}

OverlapMatrix::OverlapMatrix(int ell, int ell_star, const SmallMat& full) : OverlapMatrix(ell, ell_star) {
  if (full.rows() != dim() || full.cols() != dim()) throw ConfigError("overlap matrix has wrong shape");
  m_ = full;
}

OverlapMatrix OverlapMatrix::from_blocks(const SmallMat& b11, const SmallMat& b12, const SmallMat& b22) {
  const int l = static_cast<int>(b11.rows());
  const int ls = static_cast<int>(b22.rows());
  OverlapMatrix b(l, ls);
  b.m_.topLeftCorner(l, l) = b11;
  b.m_.topRightCorner(l, ls) = b12;
  b.m_.bottomLeftCorner(ls, l) = b12.transpose();
  b.m_.bottomRightCorner(ls, ls) = b22;
  return b;
}

bool OverlapMatrix::is_symmetric(double tol) const { return (m_ - m_.transpose()).cwiseAbs().maxCoeff() <= tol; }

bool OverlapMatrix::is_psd(double tol) const { return min_eigenvalue(m_) >= -tol; }

std::string OverlapMatrix::describe() const {
  std::ostringstream os;
  os.precision(10);
  os << "[";
  for (int i = 0; i < dim(); ++i) {
    os << (i ? "; " : "");
    for (int j = 0; j < dim(); ++j) os << (j ? " " : "") << m_(i, j);
  }
  os << "]";
  return os.str();
}

GradH make_grad(const SmallMat& h1, const SmallMat& h2, const SmallMat& h3) {
  GradH g;
  g.ell = static_cast<int>(h1.rows());
  g.ell_star = static_cast<int>(h3.rows());
  const int n = g.ell + g.ell_star;
  g.full = SmallMat::Zero(n, n);
  g.full.topLeftCorner(g.ell, g.ell) = h1;
  g.full.topRightCorner(g.ell, g.ell_star) = h2;
  g.full.bottomLeftCorner(g.ell_star, g.ell) = h2.transpose();
  g.full.bottomRightCorner(g.ell_star, g.ell_star) = h3;
  return g;
}

}  // namespace hdsgd
