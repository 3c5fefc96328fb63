#include <algorithm>
#include <cmath>
#include <numbers>

#include "hdsgd/model.hpp"
#include "hdsgd/moments.hpp"

namespace hdsgd {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTolDomain = 1e-8;

enum class Act { linear, relu, erf, sign, cos, sin };

Act parse_act(const std::string& s) {
  if (s == "linear") return Act::linear;
  if (s == "relu") return Act::relu;
  if (s == "erf") return Act::erf;
  if (s == "sign") return Act::sign;
  if (s == "cos") return Act::cos;
  if (s == "sin") return Act::sin;
  throw ConfigError("unknown activation '" + s + "' (expected relu, erf, sign, cos, sin, linear)");
}

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

double act(Act a, double x) {
  switch (a) {
    case Act::linear: return x;
    case Act::relu: return x > 0.0 ? x : 0.0;
    case Act::erf: return std::erf(x);
    case Act::sign: return sgn(x);
    case Act::cos: return std::cos(x);
    case Act::sin: return std::sin(x);
  }
  return 0.0;
}

// Derivative a.e.; sign has zero derivative pathwise.
double act_prime(Act a, double x) {
  switch (a) {
    case Act::linear: return 1.0;
    case Act::relu: return x > 0.0 ? 1.0 : 0.0;
    case Act::erf: return 2.0 / std::sqrt(kPi) * std::exp(-x * x);
    case Act::sign: return 0.0;
    case Act::cos: return -std::sin(x);
    case Act::sin: return std::cos(x);
  }
  return 0.0;
}

// f = 1/2 (sigma(x) - sigma(x*))^2 with ell = ell_star = 1.
class Activation final : public Model {
 public:
  Activation(Act a, int nodes, ModelParams p)
      : Model(ModelKind::single_index_activation, "single_index_activation", 1, 1, 0.0, std::move(p)),
        a_(a),
        scheme_(quadrature(nodes)) {}

  bool in_domain(const OverlapMatrix& b) const override {
    if (a_ != Act::relu && a_ != Act::sign) return true;
    // The arcsine kernels lose differentiability where |rho| = 1 or B11 = 0.
    const double b11 = b(0, 0), b12 = b(0, 1), b22 = b(1, 1);
    return b11 > kTolDomain && b22 > kTolDomain && b12 * b12 < (1.0 - kTolDomain) * b11 * b22;
  }

  double loss(const SmallVec& r, const SmallVec&) const override {
    const double d = act(a_, r(0)) - act(a_, r(1));
    return 0.5 * d * d;
  }

  SmallVec grad_f(const SmallVec& r, const SmallVec&) const override {
    SmallVec g(1);
    g(0) = act_prime(a_, r(0)) * (act(a_, r(0)) - act(a_, r(1)));
    return g;
  }

 private:
  Act a_;
  const QuadratureScheme& scheme_;

  double risk_impl(const OverlapMatrix& b) const override {
    const double b11 = b(0, 0), b12 = b(0, 1), b22 = b(1, 1);
    switch (a_) {
      case Act::linear:
        return 0.5 * b11 + 0.5 * b22 - b12;
      case Act::relu: {
        const double s = std::sqrt(b11 * b22);
        const double rho = s > 0.0 ? std::clamp(b12 / s, -1.0, 1.0) : 0.0;
        return 0.25 * b11 + 0.25 * b22 - s / (2.0 * kPi) * (rho * std::acos(-rho) + std::sqrt(1.0 - rho * rho));
      }
      case Act::erf: {
        const double u = 1.0 + 2.0 * b11, v = 1.0 + 2.0 * b22;
        return (std::asin(2.0 * b11 / u) + std::asin(2.0 * b22 / v) - 2.0 * std::asin(2.0 * b12 / std::sqrt(u * v))) / kPi;
      }
      case Act::sign:
        return 1.0 - 2.0 / kPi * std::asin(std::clamp(b12 / std::sqrt(b11 * b22), -1.0, 1.0));
      case Act::cos:
        return 0.5 * (std::exp(-b11) * std::cosh(b11) + std::exp(-b22) * std::cosh(b22)) -
               std::exp(-0.5 * (b11 + b22)) * std::cosh(b12);
      case Act::sin:
        return 0.5 * (std::exp(-b11) * std::sinh(b11) + std::exp(-b22) * std::sinh(b22)) -
               std::exp(-0.5 * (b11 + b22)) * std::sinh(b12);
    }
    return 0.0;
  }

  GradH grad_impl(const OverlapMatrix& b) const override {
    const double b11 = b(0, 0), b12 = b(0, 1), b22 = b(1, 1);
    double h1 = 0, h2 = 0, h3 = 0;
    switch (a_) {
      case Act::linear:
        h1 = 0.5, h2 = -0.5, h3 = 0.5;
        break;
      case Act::relu: {
        const double s = std::sqrt(b11 * b22 - b12 * b12);
        h1 = 0.25 - s / (4.0 * kPi * b11);
        h3 = 0.25 - s / (4.0 * kPi * b22);
        h2 = -std::acos(-b12 / std::sqrt(b11 * b22)) / (4.0 * kPi);
        break;
      }
      case Act::erf: {
        const double u = 1.0 + 2.0 * b11, v = 1.0 + 2.0 * b22;
        const double w = 2.0 * b12 / std::sqrt(u * v);
        const double cw = std::sqrt(1.0 - w * w);
        h1 = 2.0 / kPi * (1.0 / (u * std::sqrt(1.0 + 4.0 * b11)) + w / (u * cw));
        h3 = 2.0 / kPi * (1.0 / (v * std::sqrt(1.0 + 4.0 * b22)) + w / (v * cw));
        h2 = -2.0 / kPi / (cw * std::sqrt(u * v));
        break;
      }
      case Act::sign: {
        const double s = std::sqrt(b11 * b22 - b12 * b12);
        h1 = b12 / (kPi * b11 * s);
        h3 = b12 / (kPi * b22 * s);
        h2 = -1.0 / (kPi * s);
        break;
      }
      case Act::cos: {
        const double e = std::exp(-0.5 * (b11 + b22));
        h1 = -0.5 * std::exp(-2.0 * b11) + 0.5 * e * std::cosh(b12);
        h3 = -0.5 * std::exp(-2.0 * b22) + 0.5 * e * std::cosh(b12);
        h2 = -0.5 * e * std::sinh(b12);
        break;
      }
      case Act::sin: {
        const double e = std::exp(-0.5 * (b11 + b22));
        h1 = 0.5 * std::exp(-2.0 * b11) + 0.5 * e * std::sinh(b12);
        h3 = 0.5 * std::exp(-2.0 * b22) + 0.5 * e * std::sinh(b12);
        h2 = -0.5 * e * std::cosh(b12);
        break;
      }
    }
    SmallMat m1(1, 1), m2(1, 1), m3(1, 1);
    m1(0, 0) = h1, m2(0, 0) = h2, m3(0, 0) = h3;
    return make_grad(m1, m2, m3);
  }

  SmallMat fisher_impl(const OverlapMatrix& b) const override {
    const double b11 = b(0, 0), b12 = b(0, 1), b22 = b(1, 1);
    SmallMat i(1, 1);
    switch (a_) {
      case Act::linear:
        i(0, 0) = b11 - 2.0 * b12 + b22;
        break;
      case Act::relu: {
        const double s = std::sqrt(b11 * b22);
        const double rho = b12 / s;
        const double c = std::sqrt(1.0 - rho * rho);
        const double ac = std::acos(-rho);
        i(0, 0) = 0.5 * b11 - s / kPi * (c + rho * ac) + b22 / (2.0 * kPi) * (ac + rho * c);
        break;
      }
      case Act::sign:
        i(0, 0) = 0.0;
        break;
      case Act::erf: {
        // erf'^2 = (4/pi) e^{-2x^2}; folding the exponential into the Gaussian
        // leaves E[(erf x - erf x*)^2] = 2 h under the tilted overlap.
        const double c = 1.0 + 4.0 * b11;
        const SmallVec col = b.full().col(0);
        const OverlapMatrix tilted(1, 1, b.full() - (4.0 / c) * col * col.transpose());
        i(0, 0) = 8.0 / (kPi * std::sqrt(c)) * risk_impl(tilted);
        break;
      }
      default: {
        const Act a = a_;
        i(0, 0) = gauss_expect(
            [a](const SmallVec& r) {
              const double g = act_prime(a, r(0)) * (act(a, r(0)) - act(a, r(1)));
              return g * g;
            },
            b.full(), scheme_);
      }
    }
    return i;
  }

  // Sign has zero gradient pathwise, so the Stein route does not apply.
  double alignment_impl(const OverlapMatrix& b) const override {
    return a_ == Act::sign ? 0.0 : Model::alignment_impl(b);
  }
  double alignment0_impl(const OverlapMatrix& b) const override {
    return a_ == Act::sign ? 0.0 : Model::alignment0_impl(b);
  }
};

}  // namespace

ModelPtr make_activation(const ModelParams& p) {
  reject_unknown_params(p, {"activation", "nodes"}, "single_index_activation");
  const auto it = p.find("activation");
  if (it == p.end()) throw ConfigError("single_index_activation needs an 'activation' parameter");
  return std::make_shared<Activation>(parse_act(it->second), param_int(p, "nodes", 64), p);
}

}  // namespace hdsgd
