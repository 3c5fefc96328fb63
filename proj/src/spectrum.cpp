#include "hdsgd/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "hdsgd/errors.hpp"
#include "hdsgd/sampler.hpp"

namespace hdsgd {

SpectrumK::SpectrumK(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw ConfigError("spectrum has no eigenvalues");
  offsets_.reserve(atoms_.size());
  for (const auto& a : atoms_) {
    if (!(a.lambda > 0.0) || !std::isfinite(a.lambda)) throw ConfigError("eigenvalues must be positive and finite");
    if (a.mult < 1) throw ConfigError("eigenvalue multiplicities must be >= 1");
    offsets_.push_back(d_);
    d_ += a.mult;
    trace_ += a.lambda * a.mult;
  }
}

SpectrumK SpectrumK::from_values(const std::vector<double>& lambdas) {
  std::vector<Atom> atoms;
  for (double l : lambdas) {
    if (!atoms.empty() && atoms.back().lambda == l) {
      ++atoms.back().mult;
    } else {
      atoms.push_back({l, 1});
    }
  }
  return SpectrumK(std::move(atoms));
}

double SpectrumK::lambda_max() const {
  double m = 0.0;
  for (const auto& a : atoms_) m = std::max(m, a.lambda);
  return m;
}

double SpectrumK::lambda_min() const {
  double m = atoms_.front().lambda;
  for (const auto& a : atoms_) m = std::min(m, a.lambda);
  return m;
}

double SpectrumK::trace_sq() const {
  double s = 0.0;
  for (const auto& a : atoms_) s += a.lambda * a.lambda * a.mult;
  return s;
}

std::vector<double> SpectrumK::expand() const {
  std::vector<double> out;
  out.reserve(d_);
  for (const auto& a : atoms_) out.insert(out.end(), a.mult, a.lambda);
  return out;
}

SpectrumK SpectrumK::scaled(double c) const {
  if (!(c > 0.0)) throw ConfigError("spectrum scale must be positive");
  std::vector<Atom> atoms = atoms_;
  for (auto& a : atoms) a.lambda *= c;
  return SpectrumK(std::move(atoms));
}

SpectrumK identity_spectrum(int d) {
  if (d < 1) throw ConfigError("d must be positive");
  return SpectrumK({{1.0, d}});
}

SpectrumK sample_mp(double ratio, int d, std::uint64_t seed) {
  if (!(ratio >= 1.0)) throw ConfigError("mp ratio (samples per dimension) must be >= 1");
  const double r = 1.0 / ratio;
  const double lo = std::pow(1.0 - std::sqrt(r), 2), hi = std::pow(1.0 + std::sqrt(r), 2);
  auto density = [&](double x) {
    const double v = (hi - x) * (x - lo);
    return v > 0.0 ? std::sqrt(v) / (2.0 * std::numbers::pi * r * x) : 0.0;
  };
  // Envelope from a fine grid, inflated for safety.
  double pmax = 0.0;
  for (int i = 0; i <= 4096; ++i) pmax = std::max(pmax, density(lo + (hi - lo) * i / 4096.0));
  pmax *= 1.05;
  Sampler rng(seed, Stream::spectrum);
  std::vector<double> vals;
  vals.reserve(d);
  while (static_cast<int>(vals.size()) < d) {
    const double x = lo + (hi - lo) * rng.uniform();
    if (rng.uniform() * pmax < density(x)) vals.push_back(x);
  }
  std::sort(vals.begin(), vals.end());
  return SpectrumK::from_values(vals);
}

SpectrumK sample_powered_uniform(double a, double b, double q, int d, std::uint64_t seed) {
  if (!(a > 0.0) || !(b > a)) throw ConfigError("powered_uniform needs 0 < a < b");
  Sampler rng(seed, Stream::spectrum);
  std::vector<double> vals(d);
  for (auto& v : vals) v = std::pow(a + (b - a) * rng.uniform(), 2.0 * q);
  std::sort(vals.begin(), vals.end());
  return SpectrumK::from_values(vals);
}

SpectrumK spectrum_from_file(const std::string& path, int d) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open spectrum file '" + path + "'");
  std::vector<double> vals;
  double v;
  while (in >> v) vals.push_back(v);
  if (!in.eof()) throw ConfigError("spectrum file '" + path + "' contains a non-numeric token");
  if (d > 0 && static_cast<int>(vals.size()) != d)
    throw ConfigError("spectrum file '" + path + "' has " + std::to_string(vals.size()) + " values, expected d=" +
                      std::to_string(d));
  std::sort(vals.begin(), vals.end());
  return SpectrumK::from_values(vals);
}

namespace {

std::vector<double> parse_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(tok, &pos));
      if (pos != tok.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ConfigError("bad number '" + tok + "' in " + what);
    }
  }
  return out;
}

}  // namespace

SpectrumK make_spectrum(const std::string& spec, int d, std::uint64_t seed, std::optional<double> avg) {
  auto maybe = [&](SpectrumK k) { return avg ? k.normalized(*avg) : k; };
  const auto colon = spec.find(':');
  const std::string head = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (head == "identity") {
    return maybe(identity_spectrum(d));
  }
  if (head == "mp") {
    const auto v = parse_list(arg, "mp spectrum");
    if (v.size() != 1) throw ConfigError("mp spectrum expects one ratio, e.g. mp:4");
    return sample_mp(v[0], d, seed).normalized(avg.value_or(1.0));
  }
  if (head == "powered_uniform") {
    const auto v = parse_list(arg, "powered_uniform spectrum");
    if (v.size() != 3) throw ConfigError("powered_uniform expects a,b,q");
    return sample_powered_uniform(v[0], v[1], v[2], d, seed).normalized(avg.value_or(1.0));
  }
  if (head == "atoms") {
    // Equal multiplicities; d must be divisible by the atom count.
    const auto v = parse_list(arg, "atoms spectrum");
    if (v.empty() || d % static_cast<int>(v.size()) != 0)
      throw ConfigError("atoms spectrum needs a nonempty list whose length divides d");
    std::vector<Atom> atoms;
    for (double l : v) atoms.push_back({l, d / static_cast<int>(v.size())});
    std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.lambda < b.lambda; });
    return maybe(SpectrumK(std::move(atoms)));
  }
  if (head == "file") {
    return maybe(spectrum_from_file(arg, d));
  }
  throw ConfigError("unknown spectrum spec '" + spec + "'");
}

}  // namespace hdsgd
