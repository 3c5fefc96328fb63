#include "hdsgd/moments.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <numbers>

namespace hdsgd {

QuadratureScheme::QuadratureScheme(int n) {
  if (n < 8 || n > 256) throw ConfigError("nodes_per_axis must lie in [8,256], got " + std::to_string(n));

  // Golub-Welsch on the Jacobi matrix of the physicists' Hermite weight.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd off(n - 1);
  for (int k = 1; k < n; ++k) off(k - 1) = std::sqrt(0.5 * k);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, off, Eigen::EigenvaluesOnly);

  nodes_.resize(n);
  weights_.resize(n);
  for (int i = 0; i < n; ++i) {
    // Newton polish with the orthonormal recurrence; weight = 1/sum p_k^2
    // recovered via 2/(p_n')^2 form.
    double x = es.eigenvalues()(i);
    double dp = 1.0;
    for (int it = 0; it < 6; ++it) {
      double p1 = std::pow(std::numbers::pi, -0.25), p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = x * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
      }
      dp = std::sqrt(2.0 * n) * p2;
      const double step = p1 / dp;
      x -= step;
      if (std::abs(step) < 1e-15 * (1.0 + std::abs(x))) break;
    }
    nodes_[i] = std::numbers::sqrt2 * x;
    weights_[i] = 2.0 / (dp * dp) / std::sqrt(std::numbers::pi);
  }
  // Symmetrize against round-off so odd moments vanish exactly.
  for (int i = 0; i < n / 2; ++i) {
    const int j = n - 1 - i;
    const double x = 0.5 * (nodes_[j] - nodes_[i]);
    const double w = 0.5 * (weights_[i] + weights_[j]);
    nodes_[i] = -x;
    nodes_[j] = x;
    weights_[i] = weights_[j] = w;
  }
  if (n % 2 == 1) nodes_[n / 2] = 0.0;
}

const QuadratureScheme& quadrature(int n) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<QuadratureScheme>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<QuadratureScheme>(n);
  return *slot;
}

double default_jitter(const SmallMat& b) { return 1e-12 * (1.0 + b.norm()); }

SmallMat psd_factor(const SmallMat& b, double jitter) {
  const int n = static_cast<int>(b.rows());
  if (b.cols() != n) throw FactorizationError("psd_factor: matrix not square");
  SmallMat l = SmallMat::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    double s = b(j, j) + jitter;
    for (int k = 0; k < j; ++k) s -= l(j, k) * l(j, k);
    if (!(s >= 0.0)) {
      // Tolerate round-off level negatives; anything larger is indefinite.
      if (s > -1e-14 * (1.0 + b.norm())) {
        s = 0.0;
      } else {
        throw FactorizationError("psd_factor: matrix indefinite beyond jitter (pivot " + std::to_string(s) + ")");
      }
    }
    const double d = std::sqrt(s);
    l(j, j) = d;
    for (int i = j + 1; i < n; ++i) {
      double t = 0.5 * (b(i, j) + b(j, i));
      for (int k = 0; k < j; ++k) t -= l(i, k) * l(j, k);
      l(i, j) = d > 0.0 ? t / d : 0.0;
      if (d == 0.0 && std::abs(t) > 1e-12 * (1.0 + b.norm()))
        throw FactorizationError("psd_factor: matrix indefinite beyond jitter");
    }
  }
  return l;
}

}  // namespace hdsgd
