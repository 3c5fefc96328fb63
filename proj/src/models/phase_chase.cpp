#include "hdsgd/model.hpp"

namespace hdsgd {

namespace {

// f = (x1^2 - x2^2)^2 with a trivial target: ell = 2, ell_star = 1, X* = 0.
class PhaseChase final : public Model {
 public:
  explicit PhaseChase(ModelParams p) : Model(ModelKind::phase_chase, "phase_chase", 2, 1, 0.0, std::move(p)) {}

  double loss(const SmallVec& r, const SmallVec&) const override {
    const double u = r(0) * r(0) - r(1) * r(1);
    return u * u;
  }

  SmallVec grad_f(const SmallVec& r, const SmallVec&) const override {
    const double u = 4.0 * (r(0) * r(0) - r(1) * r(1));
    SmallVec g(2);
    g << u * r(0), -u * r(1);
    return g;
  }

 private:
  double risk_impl(const OverlapMatrix& b) const override {
    const double q11 = b(0, 0), q12 = b(0, 1), q22 = b(1, 1);
    return 3.0 * (q11 * q11 + q22 * q22) - 2.0 * q11 * q22 - 4.0 * q12 * q12;
  }

  GradH grad_impl(const OverlapMatrix& b) const override {
    const double q11 = b(0, 0), q12 = b(0, 1), q22 = b(1, 1);
    SmallMat h1(2, 2);
    h1 << 6.0 * q11 - 2.0 * q22, -4.0 * q12, -4.0 * q12, 6.0 * q22 - 2.0 * q11;
    return make_grad(h1, SmallMat::Zero(2, 1), SmallMat::Zero(1, 1));
  }

  SmallMat fisher_impl(const OverlapMatrix& b) const override {
    const double q11 = b(0, 0), q12 = b(0, 1), q22 = b(1, 1);
    const double s = q12 * q12;
    const double g11 = 15 * q11 * q11 * q11 - 6 * q11 * q11 * q22 - 24 * q11 * s + 3 * q11 * q22 * q22 + 12 * s * q22;
    const double g22 = 15 * q22 * q22 * q22 - 6 * q22 * q22 * q11 - 24 * q22 * s + 3 * q22 * q11 * q11 + 12 * s * q11;
    const double g12 = -(15 * q12 * q22 * q22 + 15 * q12 * q11 * q11 - 18 * q11 * q12 * q22 - 12 * s * q12);
    SmallMat i(2, 2);
    i << g11, g12, g12, g22;
    return 16.0 * i;
  }
};

}  // namespace

ModelPtr make_phase_chase(const ModelParams& p) {
  reject_unknown_params(p, {}, "phase_chase");
  return std::make_shared<PhaseChase>(p);
}

}  // namespace hdsgd
