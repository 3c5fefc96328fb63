#include "hdsgd/config.hpp"

#include <fstream>
#include <sstream>

namespace hdsgd {

Solver parse_solver(const std::string& s) {
  if (s == "ode") return Solver::ode;
  if (s == "volterra") return Solver::volterra;
  if (s == "sgd") return Solver::sgd;
  if (s == "hsgd") return Solver::hsgd;
  throw ConfigError("unknown solver '" + s + "' (ode, volterra, sgd, hsgd)");
}

const char* solver_name(Solver s) {
  switch (s) {
    case Solver::ode: return "ode";
    case Solver::volterra: return "volterra";
    case Solver::sgd: return "sgd";
    case Solver::hsgd: return "hsgd";
  }
  return "?";
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos == v.size()) return x;
  } catch (const std::exception&) {
  }
  throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const unsigned long long x = std::stoull(v, &pos);
    if (pos == v.size() && v.find('-') == std::string::npos) return x;
  } catch (const std::exception&) {
  }
  throw ConfigError("'" + key + "' expects a nonnegative integer, got '" + v + "'");
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("'" + key + "' expects a boolean, got '" + v + "'");
}

double positive(const std::string& key, double x) {
  if (!(x > 0.0)) throw ConfigError("'" + key + "' must be positive");
  return x;
}

}  // namespace

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key.rfind("model.", 0) == 0) {
    const std::string sub = key.substr(6);
    if (sub.empty()) throw ConfigError("empty model parameter name");
    cfg.model_params[sub] = value;
  } else if (key == "model") {
    parse_model_kind(value);
    cfg.model = value;
  } else if (key == "spectrum") {
    cfg.spectrum = value;
  } else if (key == "spectrum.avg") {
    cfg.spectrum_avg = positive(key, to_double(key, value));
  } else if (key == "init.x0") {
    cfg.init_x0 = value;
  } else if (key == "init.xstar") {
    cfg.init_xstar = value;
  } else if (key == "d") {
    const auto d = to_u64(key, value);
    if (d < 1 || d > 100000000) throw ConfigError("'d' out of range");
    cfg.d = static_cast<int>(d);
  } else if (key == "gamma") {
    cfg.gamma = Schedule::parse(value);
  } else if (key == "delta") {
    cfg.delta = to_double(key, value);
    if (cfg.delta < 0.0) throw ConfigError("'delta' must be nonnegative");
  } else if (key == "T") {
    cfg.T = positive(key, to_double(key, value));
  } else if (key == "dt") {
    cfg.dt = to_double(key, value);
    if (cfg.dt < 0.0) throw ConfigError("'dt' must be nonnegative");
  } else if (key == "seed") {
    cfg.seed = to_u64(key, value);
  } else if (key == "problem_seed") {
    cfg.problem_seed = to_u64(key, value);
  } else if (key == "record_dt") {
    cfg.record_dt = positive(key, to_double(key, value));
  } else if (key == "solver") {
    cfg.solver = parse_solver(value);
  } else if (key == "out") {
    cfg.out = value;
  } else if (key == "n_max") {
    cfg.n_max = positive(key, to_double(key, value));
  } else if (key == "gradient_flow") {
    cfg.gradient_flow = to_bool(key, value);
  } else {
    throw ConfigError("unknown key '" + key + "'");
  }
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto c = line.find_first_of("#;");
    if (c != std::string::npos) line.erase(c);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("unterminated section header", lineno);
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError("empty section name", lineno);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", lineno);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("missing key", lineno);
    if (value.empty()) throw ConfigError("missing value for '" + key + "'", lineno);
    try {
      set_config_value(cfg, section.empty() ? key : section + "." + key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(e.what(), lineno);
    }
  }
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_text(const RunConfig& cfg) {
  std::ostringstream os;
  os.precision(17);
  os << "model = " << cfg.model << "\n";
  for (const auto& [k, v] : cfg.model_params) os << "model." << k << " = " << v << "\n";
  os << "spectrum = " << cfg.spectrum << "\n";
  if (cfg.spectrum_avg) os << "spectrum.avg = " << *cfg.spectrum_avg << "\n";
  os << "init.x0 = " << cfg.init_x0 << "\n"
     << "init.xstar = " << cfg.init_xstar << "\n"
     << "d = " << cfg.d << "\n"
     << "gamma = " << cfg.gamma.to_string() << "\n"
     << "delta = " << cfg.delta << "\n"
     << "T = " << cfg.T << "\n"
     << "dt = " << cfg.dt << "\n"
     << "seed = " << cfg.seed << "\n"
     << "problem_seed = " << cfg.problem_seed << "\n"
     << "record_dt = " << cfg.record_dt << "\n"
     << "solver = " << solver_name(cfg.solver) << "\n"
     << "n_max = " << cfg.n_max << "\n"
     << "gradient_flow = " << (cfg.gradient_flow ? "true" : "false") << "\n";
  if (!cfg.out.empty()) os << "out = " << cfg.out << "\n";
  return os.str();
}

}  // namespace hdsgd
