#pragma once

#include <string>
#include <utility>
#include <vector>

namespace hdsgd {

// Piecewise-constant learning rate gamma(t); pieces are (start time, value)
// with the first start at 0.
class Schedule {
 public:
  Schedule(double gamma = 1.0);  // NOLINT(google-explicit-constructor)
  explicit Schedule(std::vector<std::pair<double, double>> pieces);

  // "0.5" or "0:1.0,5:0.5".
  static Schedule parse(const std::string& text);

  double operator()(double t) const;
  double max() const;
  bool is_constant() const { return pieces_.size() == 1; }
  const std::vector<std::pair<double, double>>& pieces() const { return pieces_; }
  std::string to_string() const;

 private:
  std::vector<std::pair<double, double>> pieces_;
};

}  // namespace hdsgd
