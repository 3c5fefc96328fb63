#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>

#include "hdsgd/errors.hpp"
#include "hdsgd/linalg.hpp"
#include "hdsgd/overlap.hpp"

namespace hdsgd {

enum class ModelKind {
  least_squares,
  binary_logistic,
  multiclass_logistic,
  phase_retrieval,
  phase_chase,
  single_index_activation,
};

ModelKind parse_model_kind(const std::string& s);
std::string to_string(ModelKind k);

using ModelParams = std::map<std::string, std::string>;

// H and I evaluated together; solvers need both at the same overlap.
struct Moments {
  GradH grad;
  SmallMat fisher;
};

// Outer function f(x, x*; eps) together with its Gaussian moment functions
// over (x, x*) ~ N(0, B). Immutable after construction.
class Model {
 public:
  virtual ~Model() = default;

  ModelKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  int ell() const { return ell_; }
  int ell_star() const { return ell_star_; }
  int dim() const { return ell_ + ell_star_; }
  double noise_level() const { return eta_; }
  const ModelParams& params() const { return params_; }

  // Smoothness / restricted-secant constants where the model provides them.
  std::optional<double> mu_hat() const { return mu_hat_; }
  std::optional<double> l_hat() const { return l_hat_; }

  virtual bool in_domain(const OverlapMatrix& b) const;

  double risk(const OverlapMatrix& b) const;
  // Risk on the closure of the domain (simulators record it at the boundary).
  double risk_closure(const OverlapMatrix& b) const { return risk_impl(b); }
  GradH grad(const OverlapMatrix& b) const;
  SmallMat fisher(const OverlapMatrix& b) const;
  Moments moments(const OverlapMatrix& b) const;
  double alignment(const OverlapMatrix& b) const;
  double alignment0(const OverlapMatrix& b) const;

  // Risk at the target: B11 = B12 = B22 (requires ell == ell_star).
  double excess_risk(const OverlapMatrix& b) const;

  // Pointwise outer function and its x-gradient; r = (x, x*).
  virtual double loss(const SmallVec& r, const SmallVec& eps) const = 0;
  virtual SmallVec grad_f(const SmallVec& r, const SmallVec& eps) const = 0;

 protected:
  Model(ModelKind kind, std::string name, int ell, int ell_star, double eta, ModelParams params);

  virtual double risk_impl(const OverlapMatrix& b) const = 0;
  virtual GradH grad_impl(const OverlapMatrix& b) const = 0;
  virtual SmallMat fisher_impl(const OverlapMatrix& b) const = 0;
  virtual Moments moments_impl(const OverlapMatrix& b) const;
  // Default: Stein identity E[x grad_f^T] = 2(B11 H1 + B12 H2^T).
  virtual double alignment_impl(const OverlapMatrix& b) const;
  virtual double alignment0_impl(const OverlapMatrix& b) const;

  void check_domain(const OverlapMatrix& b, const char* op) const;

  std::optional<double> mu_hat_;
  std::optional<double> l_hat_;

 private:
  ModelKind kind_;
  std::string name_;
  int ell_;
  int ell_star_;
  double eta_;
  ModelParams params_;
};

using ModelPtr = std::shared_ptr<const Model>;

ModelPtr make_model(ModelKind kind, const ModelParams& params = {});
ModelPtr make_model(const std::string& kind, const ModelParams& params = {});

inline double risk_h(const Model& m, const OverlapMatrix& b) { return m.risk(b); }
inline GradH grad_h(const Model& m, const OverlapMatrix& b) { return m.grad(b); }
inline SmallMat fisher_I(const Model& m, const OverlapMatrix& b) { return m.fisher(b); }
inline double alignment_A(const Model& m, const OverlapMatrix& b) { return m.alignment(b); }
inline double alignment_A0(const Model& m, const OverlapMatrix& b) { return m.alignment0(b); }
inline bool in_domain_U(const Model& m, const OverlapMatrix& b) { return m.in_domain(b); }
inline SmallVec grad_f_sample(const Model& m, const SmallVec& r, const SmallVec& eps) { return m.grad_f(r, eps); }

// Factories for the concrete families (defined next to each model).
ModelPtr make_least_squares(const ModelParams& p);
ModelPtr make_softmax(ModelKind kind, const ModelParams& p);
ModelPtr make_phase_retrieval(const ModelParams& p);
ModelPtr make_phase_chase(const ModelParams& p);
ModelPtr make_activation(const ModelParams& p);

// Parameter helpers shared by the factories.
double param_double(const ModelParams& p, const std::string& key, double fallback);
int param_int(const ModelParams& p, const std::string& key, int fallback);
void reject_unknown_params(const ModelParams& p, std::initializer_list<const char*> allowed, const std::string& model);

}  // namespace hdsgd
