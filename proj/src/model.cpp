#include "hdsgd/model.hpp"

#include <algorithm>

namespace hdsgd {

namespace {

struct KindName {
  ModelKind kind;
  const char* name;
};

constexpr KindName kKinds[] = {
    {ModelKind::least_squares, "least_squares"},
    {ModelKind::binary_logistic, "binary_logistic"},
    {ModelKind::multiclass_logistic, "multiclass_logistic"},
    {ModelKind::phase_retrieval, "phase_retrieval"},
    {ModelKind::phase_chase, "phase_chase"},
    {ModelKind::single_index_activation, "single_index_activation"},
};

}  // namespace

ModelKind parse_model_kind(const std::string& s) {
  for (const auto& k : kKinds)
    if (s == k.name) return k.kind;
  throw ConfigError("unknown model kind '" + s + "'");
}

std::string to_string(ModelKind k) {
  for (const auto& e : kKinds)
    if (e.kind == k) return e.name;
  return "?";
}

Model::Model(ModelKind kind, std::string name, int ell, int ell_star, double eta, ModelParams params)
    : kind_(kind), name_(std::move(name)), ell_(ell), ell_star_(ell_star), eta_(eta), params_(std::move(params)) {
  if (ell < 1 || ell_star < 1 || ell + ell_star > kMaxDim) throw ConfigError("model dimensions out of range");
  if (eta < 0.0) throw ConfigError("noise level must be nonnegative");
}

bool Model::in_domain(const OverlapMatrix&) const { return true; }

void Model::check_domain(const OverlapMatrix& b, const char* op) const {
  if (b.ell() != ell_ || b.ell_star() != ell_star_)
    throw ConfigError(std::string(op) + ": overlap shape does not match model " + name_);
  if (!in_domain(b)) throw DomainExit(std::string(op) + ": overlap outside domain of " + name_ + ": " + b.describe(), b.full());
}

double Model::risk(const OverlapMatrix& b) const {
  check_domain(b, "risk_h");
  return risk_impl(b);
}

GradH Model::grad(const OverlapMatrix& b) const {
  check_domain(b, "grad_h");
  return grad_impl(b);
}

SmallMat Model::fisher(const OverlapMatrix& b) const {
  check_domain(b, "fisher_I");
  return fisher_impl(b);
}

Moments Model::moments(const OverlapMatrix& b) const {
  check_domain(b, "moments");
  return moments_impl(b);
}

Moments Model::moments_impl(const OverlapMatrix& b) const { return {grad_impl(b), fisher_impl(b)}; }

double Model::alignment(const OverlapMatrix& b) const {
  if (ell_ != ell_star_) throw UnsupportedError("alignment_A needs ell == ell_star (model " + name_ + ")");
  check_domain(b, "alignment_A");
  return alignment_impl(b);
}

double Model::alignment0(const OverlapMatrix& b) const {
  check_domain(b, "alignment_A0");
  return alignment0_impl(b);
}

double Model::alignment_impl(const OverlapMatrix& b) const {
  const GradH g = grad_impl(b);
  const SmallMat h1 = g.h1(), h2 = g.h2();
  const SmallMat b11 = b.b11(), b12 = b.b12(), b22 = b.b22();
  const SmallMat m = b11 * h1 + b12 * h2.transpose() - b12.transpose() * h1 - b22 * h2.transpose();
  return 2.0 * m.trace();
}

double Model::alignment0_impl(const OverlapMatrix& b) const {
  const GradH g = grad_impl(b);
  return 2.0 * (b.b11() * g.h1() + b.b12() * g.h2().transpose()).trace();
}

double Model::excess_risk(const OverlapMatrix& b) const {
  if (ell_ != ell_star_) throw UnsupportedError("excess_risk needs ell == ell_star");
  const SmallMat b22 = b.b22();
  const OverlapMatrix star = OverlapMatrix::from_blocks(b22, b22, b22);
  return risk(b) - risk_impl(star);
}

ModelPtr make_model(ModelKind kind, const ModelParams& params) {
  switch (kind) {
    case ModelKind::least_squares:
      return make_least_squares(params);
    case ModelKind::binary_logistic:
    case ModelKind::multiclass_logistic:
      return make_softmax(kind, params);
    case ModelKind::phase_retrieval:
      return make_phase_retrieval(params);
    case ModelKind::phase_chase:
      return make_phase_chase(params);
    case ModelKind::single_index_activation:
      return make_activation(params);
  }
  throw ConfigError("unknown model kind");
}

ModelPtr make_model(const std::string& kind, const ModelParams& params) {
  return make_model(parse_model_kind(kind), params);
}

double param_double(const ModelParams& p, const std::string& key, double fallback) {
  const auto it = p.find(key);
  if (it == p.end()) return fallback;
  try {
    std::size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("parameter '" + key + "' is not a number: '" + it->second + "'");
  }
}

int param_int(const ModelParams& p, const std::string& key, int fallback) {
  const double v = param_double(p, key, fallback);
  if (v != static_cast<int>(v)) throw ConfigError("parameter '" + key + "' must be an integer");
  return static_cast<int>(v);
}

void reject_unknown_params(const ModelParams& p, std::initializer_list<const char*> allowed, const std::string& model) {
  for (const auto& [k, v] : p) {
    const bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; });
    if (!ok) throw ConfigError("unknown parameter '" + k + "' for model " + model);
  }
}

}  // namespace hdsgd
