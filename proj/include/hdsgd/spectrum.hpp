#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hdsgd {

struct Atom {
  double lambda;
  int mult;
};

// Eigenvalues of K with multiplicities, in eigen-index order: atom g covers
// indices [offset(g), offset(g) + mult).
class SpectrumK {
 public:
  SpectrumK() = default;
  explicit SpectrumK(std::vector<Atom> atoms);

  // Group equal consecutive values.
  static SpectrumK from_values(const std::vector<double>& lambdas);

  const std::vector<Atom>& atoms() const { return atoms_; }
  int groups() const { return static_cast<int>(atoms_.size()); }
  int d() const { return d_; }
  int offset(int g) const { return offsets_[g]; }

  double trace() const { return trace_; }
  double avg() const { return trace_ / d_; }
  double lambda_max() const;
  double lambda_min() const;
  double trace_sq() const;  // tr K^2

  std::vector<double> expand() const;
  SpectrumK scaled(double c) const;
  SpectrumK normalized(double target_avg) const { return scaled(target_avg / avg()); }

 private:
  std::vector<Atom> atoms_;
  std::vector<int> offsets_;
  int d_ = 0;
  double trace_ = 0.0;
};

SpectrumK identity_spectrum(int d);

// Marchenko-Pastur law with n/d = ratio >= 1 (aspect d/n), unit scale;
// d i.i.d. draws by rejection, sorted ascending.
SpectrumK sample_mp(double ratio, int d, std::uint64_t seed);

// lambda = sigma^(2q), sigma ~ U(a,b), sorted ascending (not normalized).
SpectrumK sample_powered_uniform(double a, double b, double q, int d, std::uint64_t seed);

SpectrumK spectrum_from_file(const std::string& path, int d);

// Parse identity | mp:<r> | powered_uniform:a,b,q | atoms:l1,l2,... | file:<path>.
// Sampled spectra are rescaled to average eigenvalue `avg` (default 1); the
// others only when `avg` is given.
SpectrumK make_spectrum(const std::string& spec, int d, std::uint64_t seed, std::optional<double> avg = {});

}  // namespace hdsgd
