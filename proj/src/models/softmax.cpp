#include <cmath>

#include "hdsgd/model.hpp"
#include "hdsgd/moments.hpp"

namespace hdsgd {

namespace {

// Softmax regression with the last logit pinned to zero, so ell = classes - 1.
// f(x, x*) = lse(x, 0) - <p(x*), x>; grad_f = p(x) - p(x*).
class SoftmaxPinned final : public Model {
 public:
  SoftmaxPinned(ModelKind kind, int classes, int nodes, int nodes_4d, ModelParams p)
      : Model(kind, to_string(kind), classes - 1, classes - 1, 0.0, std::move(p)),
        m_(classes - 1),
        low_(quadrature(nodes)),
        high_(quadrature(m_ == 1 ? nodes : nodes_4d)) {
    l_hat_ = kind == ModelKind::binary_logistic ? 0.25 : 1.0;
  }

  double loss(const SmallVec& r, const SmallVec&) const override {
    const SmallVec x = r.head(m_);
    return lse(x) - probs(r.tail(m_)).dot(x);
  }

  SmallVec grad_f(const SmallVec& r, const SmallVec&) const override {
    return probs(r.head(m_)) - probs(r.tail(m_));
  }

 private:
  int m_;
  const QuadratureScheme& low_;
  const QuadratureScheme& high_;

  static SmallVec probs(const SmallVec& x) {
    const double mx = std::max(0.0, x.maxCoeff());
    SmallVec e = (x.array() - mx).exp();
    const double s = std::exp(-mx) + e.sum();
    return e / s;
  }

  static double lse(const SmallVec& x) {
    const double mx = std::max(0.0, x.maxCoeff());
    return mx + std::log(std::exp(-mx) + (x.array() - mx).exp().sum());
  }

  static SmallMat jac(const SmallVec& p) {
    SmallMat j = -p * p.transpose();
    j.diagonal() += p;
    return j;
  }

  // Hessian of psi(y) = sum_j M_jj p_j - p^T M p.
  static SmallMat hess_psi(const SmallVec& p, const SmallMat& ms, const SmallVec& c) {
    const SmallVec v = c - 2.0 * ms * p;
    const SmallVec w = v.array() - p.dot(v);
    const SmallVec pw = p.cwiseProduct(w);
    const SmallMat j = jac(p);
    SmallMat h = -pw * p.transpose() - p * pw.transpose() - 2.0 * j * ms * j;
    h.diagonal() += pw;
    return h;
  }

  // Returns [E J(y) | E Hess psi(y)] stacked horizontally.
  SmallMat target_terms(const OverlapMatrix& b) const {
    const SmallMat b12 = b.b12();
    const SmallMat ms = sym_part(b12);
    const SmallVec c = b12.diagonal();
    const int m = m_;
    return gauss_expect(
        [&](const SmallVec& y) {
          const SmallVec p = probs(y);
          SmallMat out(m, 2 * m);
          out.leftCols(m) = jac(p);
          out.rightCols(m) = hess_psi(p, ms, c);
          return out;
        },
        b.b22(), low_);
  }

  double risk_impl(const OverlapMatrix& b) const override {
    const double e_lse = gauss_expect([](const SmallVec& x) { return lse(x); }, b.b11(), low_);
    const SmallMat ej = gauss_expect([](const SmallVec& y) { return jac(probs(y)); }, b.b22(), low_);
    return e_lse - b.b12().cwiseProduct(ej).sum();
  }

  GradH grad_impl(const OverlapMatrix& b) const override {
    const SmallMat h1 = 0.5 * gauss_expect([](const SmallVec& x) { return jac(probs(x)); }, b.b11(), low_);
    const SmallMat t = target_terms(b);
    return make_grad(h1, -0.5 * t.leftCols(m_), sym_part(-0.5 * t.rightCols(m_)));
  }

  SmallMat fisher_impl(const OverlapMatrix& b) const override {
    const int m = m_;
    auto outer = [](const SmallVec& z) {
      const SmallVec p = probs(z);
      return SmallMat(p * p.transpose());
    };
    const SmallMat exx = gauss_expect(outer, b.b11(), low_);
    const SmallMat eyy = gauss_expect(outer, b.b22(), low_);
    const SmallMat exy = gauss_expect(
        [m](const SmallVec& r) { return SmallMat(probs(r.head(m)) * probs(r.tail(m)).transpose()); }, b.full(),
        high_);
    return sym_part(exx + eyy - exy - exy.transpose());
  }
};

}  // namespace

ModelPtr make_softmax(ModelKind kind, const ModelParams& p) {
  const std::string name = to_string(kind);
  int classes = 2;
  if (kind == ModelKind::multiclass_logistic) {
    reject_unknown_params(p, {"classes", "nodes", "nodes_4d"}, name);
    classes = param_int(p, "classes", 3);
    if (classes < 2 || classes > 3)
      throw ConfigError("multiclass_logistic: classes must be 2 or 3 (deterministic integrals are limited to 4 dims)");
  } else {
    reject_unknown_params(p, {"nodes"}, name);
  }
  const int nodes = param_int(p, "nodes", 64);
  const int nodes_4d = param_int(p, "nodes_4d", 24);
  return std::make_shared<SoftmaxPinned>(kind, classes, nodes, nodes_4d, p);
}

}  // namespace hdsgd
