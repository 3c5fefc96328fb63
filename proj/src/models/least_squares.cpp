#include "hdsgd/model.hpp"

namespace hdsgd {

namespace {

// f = 1/2 |x - x* - eta eps|^2 with ell == ell_star.
class LeastSquares final : public Model {
 public:
  LeastSquares(int ell, double eta, ModelParams p)
      : Model(ModelKind::least_squares, "least_squares", ell, ell, eta, std::move(p)) {
    mu_hat_ = 1.0;
    l_hat_ = 1.0;
  }

  double loss(const SmallVec& r, const SmallVec& eps) const override {
    return 0.5 * residual(r, eps).squaredNorm();
  }

  SmallVec grad_f(const SmallVec& r, const SmallVec& eps) const override { return residual(r, eps); }

 private:
  SmallVec residual(const SmallVec& r, const SmallVec& eps) const {
    const int l = ell();
    SmallVec out = r.head(l) - r.tail(l);
    if (noise_level() != 0.0) out -= noise_level() * eps.head(l);
    return out;
  }

  SmallMat gap(const OverlapMatrix& b) const {
    const SmallMat b12 = b.b12();
    return b.b11() - b12 - b12.transpose() + b.b22();
  }

  double risk_impl(const OverlapMatrix& b) const override {
    const double eta = noise_level();
    return 0.5 * gap(b).trace() + 0.5 * ell() * eta * eta;
  }

  GradH grad_impl(const OverlapMatrix&) const override {
    const SmallMat i = SmallMat::Identity(ell(), ell());
    return make_grad(0.5 * i, -0.5 * i, 0.5 * i);
  }

  SmallMat fisher_impl(const OverlapMatrix& b) const override {
    const double eta = noise_level();
    SmallMat g = sym_part(gap(b));
    g.diagonal().array() += eta * eta;
    return g;
  }

  double alignment_impl(const OverlapMatrix& b) const override { return gap(b).trace(); }
  double alignment0_impl(const OverlapMatrix& b) const override { return (b.b11() - b.b12()).trace(); }
};

}  // namespace

ModelPtr make_least_squares(const ModelParams& p) {
  reject_unknown_params(p, {"eta", "ell"}, "least_squares");
  const int ell = param_int(p, "ell", 1);
  const double eta = param_double(p, "eta", 0.0);
  if (ell < 1 || 2 * ell > kMaxDim) throw ConfigError("least_squares: ell must lie in [1,3]");
  return std::make_shared<LeastSquares>(ell, eta, p);
}

}  // namespace hdsgd
