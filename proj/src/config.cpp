#include "nonclip/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace nonclip {

ConfigParseError::ConfigParseError(int line, std::string field, const std::string& message)
    : ConfigError((line > 0 ? "line " + std::to_string(line) + ": " : std::string()) +
                  (field.empty() ? std::string() : field + ": ") + message),
      line_(line),
      field_(std::move(field)) {}

ExperimentConfig::ExperimentConfig() {
  optimizer.alpha = AlphaSchedule::constant(0.1);
  for (int e = 8; e >= 1; --e) sweep_gammas.push_back(std::ldexp(1.0, -e));
  sweep_rhos = {kNoClip, 10.0, 1.0, 0.1};
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& s) {
  if (s == "inf" || s == "+inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ConfigError("expected a number, got '" + s + "'");
  return v;
}

std::int64_t to_int(const std::string& s) {
  std::int64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ConfigError("expected an integer, got '" + s + "'");
  return v;
}

std::uint64_t to_u64(const std::string& s) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError("expected an unsigned integer, got '" + s + "'");
  }
  return v;
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("expected true or false, got '" + s + "'");
}

/// "1,2,3" or "0..9" (inclusive).
std::vector<std::uint64_t> to_seeds(const std::string& s) {
  const auto dots = s.find("..");
  if (dots != std::string::npos) {
    const std::uint64_t lo = to_u64(trim(s.substr(0, dots)));
    const std::uint64_t hi = to_u64(trim(s.substr(dots + 2)));
    if (hi < lo) throw ConfigError("empty seed range '" + s + "'");
    if (hi - lo >= 1000000) throw ConfigError("seed range too large");
    std::vector<std::uint64_t> out;
    for (std::uint64_t v = lo; v <= hi; ++v) out.push_back(v);
    return out;
  }
  std::vector<std::uint64_t> out;
  for (const auto& item : split_list(s)) out.push_back(to_u64(item));
  return out;
}

std::vector<double> to_doubles(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) out.push_back(to_double(item));
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + format_double(v[i]);
  return out;
}

std::string join(const std::vector<std::uint64_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + std::to_string(v[i]);
  return out;
}

const std::map<std::string, StepsizeSchedule::Kind>& schedule_names() {
  static const std::map<std::string, StepsizeSchedule::Kind> m{
      {"constant", StepsizeSchedule::Kind::constant},
      {"linear_decay", StepsizeSchedule::Kind::linear_decay},
      {"warmdown", StepsizeSchedule::Kind::warmdown},
  };
  return m;
}

std::string schedule_name(StepsizeSchedule::Kind k) {
  for (const auto& [name, kind] : schedule_names()) {
    if (kind == k) return name;
  }
  return "constant";
}

/// Parsed alpha before the horizon is known.
struct AlphaText {
  bool horizon = false;
  double value = 0.1;
};

struct Parser {
  ExperimentConfig c;
  AlphaText alpha;

  using Setter = std::function<void(const std::string&)>;
  std::map<std::string, Setter> setters;

  Parser() {
    auto& p = c.problem;
    auto& o = c.optimizer;
    alpha.value = o.alpha.value;
    setters = {
        {"problem.name", [&](const std::string& v) { p.name = v; }},
        {"problem.dim", [&](const std::string& v) { p.dim = to_int(v); }},
        {"problem.sigma", [&](const std::string& v) { p.sigma = to_double(v); }},
        {"problem.mu", [&](const std::string& v) { p.mu = to_double(v); }},
        {"problem.L", [&](const std::string& v) { p.L = to_double(v); }},
        {"problem.samples", [&](const std::string& v) { p.samples = to_int(v); }},
        {"problem.hidden", [&](const std::string& v) { p.hidden = to_int(v); }},
        {"problem.batch", [&](const std::string& v) { p.batch = to_int(v); }},
        {"problem.ridge", [&](const std::string& v) { p.ridge = to_double(v); }},
        {"problem.label_noise", [&](const std::string& v) { p.label_noise = to_double(v); }},
        {"problem.init_scale", [&](const std::string& v) { p.init_scale = to_double(v); }},
        {"problem.data_seed", [&](const std::string& v) { p.data_seed = to_u64(v); }},
        {"optimizer.algorithm", [&](const std::string& v) { o.algorithm = parse_algorithm(v); }},
        {"optimizer.gamma", [&](const std::string& v) { o.gamma.gamma = to_double(v); }},
        {"optimizer.gamma_schedule",
         [&](const std::string& v) {
           const auto it = schedule_names().find(v);
           if (it == schedule_names().end()) {
             throw ConfigError("unknown schedule '" + v + "' (constant, linear_decay, warmdown)");
           }
           o.gamma.kind = it->second;
         }},
        {"optimizer.warmdown_fraction", [&](const std::string& v) { o.gamma.warmdown_fraction = to_double(v); }},
        {"optimizer.rho", [&](const std::string& v) { o.rho = to_double(v); }},
        {"optimizer.beta",
         [&](const std::string& v) {
           if (v == "none") {
             o.beta.reset();
           } else {
             o.beta = to_double(v);
           }
         }},
        {"optimizer.alpha",
         [&](const std::string& v) {
           alpha.horizon = v == "horizon";
           if (!alpha.horizon) alpha.value = to_double(v);
         }},
        {"optimizer.norm",
         [&](const std::string& v) {
           try {
             o.norm = NormSpec::parse(v);
           } catch (const std::invalid_argument& e) {
             throw ConfigError(e.what());
           }
         }},
        {"optimizer.horizon", [&](const std::string& v) { o.horizon = to_int(v); }},
        {"optimizer.deterministic", [&](const std::string& v) { o.deterministic = to_bool(v); }},
        {"run.seeds", [&](const std::string& v) { c.seeds = to_seeds(v); }},
        {"run.output", [&](const std::string& v) { c.output = v; }},
        {"run.store_trajectory", [&](const std::string& v) { c.store_trajectory = to_bool(v); }},
        {"run.paper_literal_momentum", [&](const std::string& v) { c.paper_literal_momentum = to_bool(v); }},
        {"sweep.gammas", [&](const std::string& v) { c.sweep_gammas = to_doubles(v); }},
        {"sweep.rhos", [&](const std::string& v) { c.sweep_rhos = to_doubles(v); }},
    };
  }

  void finish() {
    const bool fso = !c.paper_literal_momentum;
    c.optimizer.alpha = alpha.horizon ? AlphaSchedule::from_horizon(c.optimizer.horizon, fso)
                                      : AlphaSchedule::constant(alpha.value, fso);
  }
};

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  Parser parser;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigParseError(line_no, "", "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = parser.setters.find(key);
    if (it == parser.setters.end()) throw ConfigParseError(line_no, key, "unknown key");
    if (!seen.insert(key).second) throw ConfigParseError(line_no, key, "duplicate key");
    if (value.empty()) throw ConfigParseError(line_no, key, "missing value");
    try {
      it->second(value);
    } catch (const std::invalid_argument& e) {
      throw ConfigParseError(line_no, key, e.what());
    }
  }
  parser.finish();
  return parser.c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigParseError(0, "", "cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  const auto& p = c.problem;
  const auto& o = c.optimizer;
  std::ostringstream out;
  out << "problem.name = " << p.name << '\n'
      << "problem.dim = " << p.dim << '\n'
      << "problem.sigma = " << format_double(p.sigma) << '\n'
      << "problem.mu = " << format_double(p.mu) << '\n'
      << "problem.L = " << format_double(p.L) << '\n'
      << "problem.samples = " << p.samples << '\n'
      << "problem.hidden = " << p.hidden << '\n'
      << "problem.batch = " << p.batch << '\n'
      << "problem.ridge = " << format_double(p.ridge) << '\n'
      << "problem.label_noise = " << format_double(p.label_noise) << '\n'
      << "problem.init_scale = " << format_double(p.init_scale) << '\n'
      << "problem.data_seed = " << p.data_seed << '\n'
      << '\n'
      << "optimizer.algorithm = " << to_string(o.algorithm) << '\n'
      << "optimizer.gamma = " << format_double(o.gamma.gamma) << '\n'
      << "optimizer.gamma_schedule = " << schedule_name(o.gamma.kind) << '\n'
      << "optimizer.warmdown_fraction = " << format_double(o.gamma.warmdown_fraction) << '\n'
      << "optimizer.rho = " << format_double(o.rho) << '\n'
      << "optimizer.beta = " << (o.beta ? format_double(*o.beta) : std::string("none")) << '\n'
      << "optimizer.alpha = "
      << (o.alpha.kind == AlphaSchedule::Kind::horizon ? std::string("horizon") : format_double(o.alpha.value)) << '\n'
      << "optimizer.norm = " << o.norm.to_string() << '\n'
      << "optimizer.horizon = " << o.horizon << '\n'
      << "optimizer.deterministic = " << (o.deterministic ? "true" : "false") << '\n'
      << '\n'
      << "run.seeds = " << join(c.seeds) << '\n'
      << "run.output = " << c.output << '\n'
      << "run.store_trajectory = " << (c.store_trajectory ? "true" : "false") << '\n'
      << "run.paper_literal_momentum = " << (c.paper_literal_momentum ? "true" : "false") << '\n'
      << '\n'
      << "sweep.gammas = " << join(c.sweep_gammas) << '\n'
      << "sweep.rhos = " << join(c.sweep_rhos) << '\n';
  return out.str();
}

void validate_experiment(const ExperimentConfig& c) {
  if (c.seeds.empty()) throw ConfigParseError(0, "run.seeds", "at least one seed is required");
  ProblemPtr problem;
  try {
    problem = make_problem(c.problem);
  } catch (const std::invalid_argument& e) {
    throw ConfigParseError(0, "problem", e.what());
  }
  try {
    c.optimizer.validate(problem->shapes());
  } catch (const std::invalid_argument& e) {
    throw ConfigParseError(0, "optimizer", e.what());
  }
}

OptimizerConfig effective_optimizer(const ExperimentConfig& c) {
  OptimizerConfig o = c.optimizer;
  o.alpha.first_step_override = !c.paper_literal_momentum;
  return o;
}

}  // namespace nonclip
