#include "hdsgd/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hdsgd/errors.hpp"

namespace hdsgd {

Schedule::Schedule(double gamma) : pieces_{{0.0, gamma}} {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ConfigError("learning rate must be finite and >= 0");
}

Schedule::Schedule(std::vector<std::pair<double, double>> pieces) : pieces_(std::move(pieces)) {
  if (pieces_.empty() || pieces_.front().first != 0.0) throw ConfigError("schedule must start at t=0");
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    if (!(pieces_[i].second >= 0.0) || !std::isfinite(pieces_[i].second))
      throw ConfigError("learning rate must be finite and >= 0");
    if (i > 0 && !(pieces_[i].first > pieces_[i - 1].first)) throw ConfigError("schedule times must increase");
  }
}

Schedule Schedule::parse(const std::string& text) {
  auto num = [&](const std::string& s) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("bad learning-rate schedule '" + text + "'");
    }
  };
  if (text.find(':') == std::string::npos) return Schedule(num(text));
  std::vector<std::pair<double, double>> pieces;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const auto c = tok.find(':');
    if (c == std::string::npos) throw ConfigError("bad learning-rate schedule '" + text + "'");
    pieces.emplace_back(num(tok.substr(0, c)), num(tok.substr(c + 1)));
  }
  return Schedule(std::move(pieces));
}

double Schedule::operator()(double t) const {
  double g = pieces_.front().second;
  for (const auto& [start, v] : pieces_) {
    if (t + 1e-12 >= start) g = v;
    else break;
  }
  return g;
}

double Schedule::max() const {
  double m = 0.0;
  for (const auto& p : pieces_) m = std::max(m, p.second);
  return m;
}

std::string Schedule::to_string() const {
  std::ostringstream os;
  os.precision(17);
  if (is_constant()) {
    os << pieces_.front().second;
    return os.str();
  }
  for (std::size_t i = 0; i < pieces_.size(); ++i) os << (i ? "," : "") << pieces_[i].first << ':' << pieces_[i].second;
  return os.str();
}

}  // namespace hdsgd
