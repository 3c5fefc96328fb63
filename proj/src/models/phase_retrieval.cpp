#include <algorithm>
#include <cmath>
#include <numbers>

#include "hdsgd/model.hpp"

namespace hdsgd {

namespace {

constexpr double kTolDomain = 1e-8;

// f = 1/2 (|x| - |x*|)^2, ell = ell_star = 1.
class PhaseRetrieval final : public Model {
 public:
  explicit PhaseRetrieval(ModelParams p) : Model(ModelKind::phase_retrieval, "phase_retrieval", 1, 1, 0.0, std::move(p)) {}

  bool in_domain(const OverlapMatrix& b) const override {
    const double b11 = b(0, 0), b12 = b(0, 1), b22 = b(1, 1);
    return b11 > kTolDomain && b22 > kTolDomain && b12 * b12 < (1.0 - kTolDomain) * b11 * b22;
  }

  double loss(const SmallVec& r, const SmallVec&) const override {
    const double d = std::abs(r(0)) - std::abs(r(1));
    return 0.5 * d * d;
  }

  SmallVec grad_f(const SmallVec& r, const SmallVec&) const override {
    SmallVec g(1);
    const double s = r(0) > 0.0 ? 1.0 : (r(0) < 0.0 ? -1.0 : 0.0);
    g(0) = r(0) - s * std::abs(r(1));
    return g;
  }

 private:
  double risk_impl(const OverlapMatrix& b) const override {
    const double b11 = b(0, 0), b12 = b(0, 1), b22 = b(1, 1);
    const double s = std::sqrt(b11 * b22);
    const double rho = s > 0.0 ? std::clamp(b12 / s, -1.0, 1.0) : 0.0;
    return 0.5 * b11 + 0.5 * b22 - (2.0 / std::numbers::pi) * (b12 * std::asin(rho) + std::sqrt(std::max(0.0, b11 * b22 - b12 * b12)));
  }

  GradH grad_impl(const OverlapMatrix& b) const override {
    const double b11 = b(0, 0), b12 = b(0, 1), b22 = b(1, 1);
    const double s = std::sqrt(b11 * b22 - b12 * b12);
    SmallMat h1(1, 1), h2(1, 1), h3(1, 1);
    h1(0, 0) = 0.5 - s / (std::numbers::pi * b11);
    h2(0, 0) = -std::asin(b12 / std::sqrt(b11 * b22)) / std::numbers::pi;
    h3(0, 0) = 0.5 - s / (std::numbers::pi * b22);
    return make_grad(h1, h2, h3);
  }

  // I = E (x - sign(x)|x*|)^2 = 2h.
  SmallMat fisher_impl(const OverlapMatrix& b) const override {
    SmallMat i(1, 1);
    i(0, 0) = 2.0 * risk_impl(b);
    return i;
  }
};

}  // namespace

ModelPtr make_phase_retrieval(const ModelParams& p) {
  reject_unknown_params(p, {}, "phase_retrieval");
  return std::make_shared<PhaseRetrieval>(p);
}

}  // namespace hdsgd
