#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <type_traits>
#include <vector>

#include "hdsgd/errors.hpp"
#include "hdsgd/linalg.hpp"
#include "hdsgd/sampler.hpp"

namespace hdsgd {

inline constexpr int kMaxQuadratureDim = 4;

// Tensor Gauss-Hermite rule, stored already mapped to the standard normal:
// E[f(g)] ~ sum_i w_i f(x_i) for g ~ N(0,1).
class QuadratureScheme {
 public:
  explicit QuadratureScheme(int nodes_per_axis = 64);

  int nodes_per_axis() const { return static_cast<int>(nodes_.size()); }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

// Shared read-only rule; built once per node count.
const QuadratureScheme& quadrature(int nodes_per_axis);

double default_jitter(const SmallMat& b);

// Lower-triangular L with b + jitter*I = L L^T.
SmallMat psd_factor(const SmallMat& b, double jitter);

namespace detail {

template <class R>
inline R zero_like(const R& r) {
  if constexpr (std::is_arithmetic_v<R>) {
    return R{0};
  } else {
    return R::Zero(r.rows(), r.cols());
  }
}

}  // namespace detail

// E_{z~N(0,cov)} f(z) by tensor Gauss-Hermite. f takes a SmallVec and returns
// a double or a small Eigen matrix.
template <class F>
auto gauss_expect(F&& f, const SmallMat& cov, const QuadratureScheme& scheme) {
  const int dim = static_cast<int>(cov.rows());
  if (dim < 1 || dim > kMaxQuadratureDim)
    throw UnsupportedError("gauss_expect: dimension " + std::to_string(dim) +
                           " outside [1,4]; use mc_expect instead");
  const SmallMat l = psd_factor(cov, default_jitter(cov));
  const auto& x = scheme.nodes();
  const auto& w = scheme.weights();
  const int n = scheme.nodes_per_axis();

  std::array<int, kMaxQuadratureDim> idx{};
  SmallVec g(dim), z(dim);
  using R = std::decay_t<decltype(f(z))>;
  R acc{};
  bool first = true;
  while (true) {
    double wt = 1.0;
    for (int k = 0; k < dim; ++k) {
      g(k) = x[idx[k]];
      wt *= w[idx[k]];
    }
    z.noalias() = l.template triangularView<Eigen::Lower>() * g;
    const R v = f(z);
    if (first) {
      acc = wt * v;
      first = false;
    } else {
      acc += wt * v;
    }
    int k = 0;
    while (k < dim && ++idx[k] == n) idx[k++] = 0;
    if (k == dim) break;
  }
  return acc;
}

template <class R>
struct McEstimate {
  R mean;
  R stderr_;
};

// Plain Monte Carlo over z = L g with g from the seeded sampler.
template <class F>
auto mc_expect(F&& f, const SmallMat& cov, std::int64_t n, std::uint64_t seed) {
  const int dim = static_cast<int>(cov.rows());
  const SmallMat l = psd_factor(cov, default_jitter(cov));
  Sampler rng(seed, Stream::monte_carlo);
  SmallVec g(dim), z(dim);
  using R = std::decay_t<decltype(f(z))>;
  R mean{}, m2{};
  for (std::int64_t i = 0; i < n; ++i) {
    for (int k = 0; k < dim; ++k) g(k) = rng.normal();
    z.noalias() = l.template triangularView<Eigen::Lower>() * g;
    const R v = f(z);
    if (i == 0) {
      mean = detail::zero_like(v);
      m2 = detail::zero_like(v);
    }
    // Welford, entrywise for matrices.
    const R delta = v - mean;
    mean += delta / static_cast<double>(i + 1);
    if constexpr (std::is_arithmetic_v<R>) {
      m2 += delta * (v - mean);
    } else {
      m2 += delta.cwiseProduct(v - mean);
    }
  }
  McEstimate<R> out{mean, m2};
  const double nn = static_cast<double>(n);
  if constexpr (std::is_arithmetic_v<R>) {
    out.stderr_ = n > 1 ? std::sqrt(m2 / (nn - 1.0) / nn) : 0.0;
  } else {
    out.stderr_ = n > 1 ? R((m2 / (nn - 1.0) / nn).cwiseSqrt()) : detail::zero_like(m2);
  }
  return out;
}

}  // namespace hdsgd
