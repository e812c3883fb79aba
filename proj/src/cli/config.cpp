#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <sstream>

#include "diracloc/cli.h"
#include "diracloc/errors.h"

namespace diracloc::cli {

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"run", {"seed", "out"}},
      {"potential", {"segments", "am", "sc", "el"}},
      {"site", {"kind", "segments", "am", "sc", "el", "bump_lo", "bump_hi", "amplitude"}},
      {"law", {"type", "p", "atoms", "probs", "lo", "hi", "value"}},
      {"bands", {"lo", "hi", "resolution", "points"}},
      {"scatter", {"lambda", "lo", "hi", "points"}},
      {"critical", {"lo", "hi", "resolution"}},
      {"lyapunov", {"lo", "hi", "points", "n", "R", "margin", "resolution"}},
      {"ids", {"lo", "hi", "points", "L", "R"}},
      {"thouless", {"lo", "hi", "points", "n", "R", "ids_lo", "ids_hi", "ids_points", "L", "ids_R", "margin"}},
      {"wegner", {"E", "L", "eta_max", "levels", "R"}},
      {"h1", {"E", "L0", "theta", "R"}},
      {"localize", {"L", "center", "realization", "E1", "E2", "target", "step"}},
      {"kotani", {"re_lo", "re_hi", "points", "im", "R", "X", "h"}},
  };
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

double to_double(const std::string& v, const std::string& where) {
  double x = 0.0;
  const char* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || p != end || v.empty()) {
    throw ConfigError(where + ": not a number: '" + v + "'");
  }
  return x;
}

}  // namespace

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str(), path);
}

Config Config::parse_string(const std::string& text, const std::string& origin) {
  Config c;
  c.origin_ = origin;
  c.text_ = text;
  boost::property_tree::ptree pt;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(origin + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  for (const auto& [sec, body] : pt) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError(origin + ": key '" + sec + "' outside any section");
    }
    auto& m = c.data_[sec];
    for (const auto& [k, v] : body) m[k] = trim(v.data());
  }
  std::istringstream lines(text);
  for (std::string line; std::getline(lines, line);) {
    line = trim(line);
    if (line.size() > 2 && line.front() == '[' && line.back() == ']') c.data_[trim(line.substr(1, line.size() - 2))];
  }
  c.check_schema();
  return c;
}

void Config::check_schema() const {
  for (const auto& [sec, keys] : data_) {
    const auto it = schema().find(sec);
    if (it == schema().end()) throw ConfigError(origin_ + ": unknown section [" + sec + "]");
    for (const auto& [k, v] : keys) {
      if (!it->second.count(k)) throw ConfigError(origin_ + ": unknown key '" + k + "' in [" + sec + "]");
    }
  }
}

bool Config::has(const std::string& s, const std::string& k) const {
  const auto it = data_.find(s);
  return it != data_.end() && it->second.count(k) > 0;
}

std::string Config::get_string(const std::string& s, const std::string& k) const {
  if (!has_section(s)) throw ConfigError(origin_ + ": missing section [" + s + "] (key '" + s + "." + k + "')");
  if (!has(s, k)) throw ConfigError(origin_ + ": missing key '" + s + "." + k + "'");
  return data_.at(s).at(k);
}

std::string Config::get_string(const std::string& s, const std::string& k, const std::string& def) const {
  return has(s, k) ? data_.at(s).at(k) : def;
}

double Config::get_double(const std::string& s, const std::string& k) const {
  return to_double(get_string(s, k), s + "." + k);
}

double Config::get_double(const std::string& s, const std::string& k, double def) const {
  return has(s, k) ? get_double(s, k) : def;
}

long Config::get_long(const std::string& s, const std::string& k) const {
  const std::string v = get_string(s, k);
  long x = 0;
  const char* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || p != end || v.empty()) {
    throw ConfigError(s + "." + k + ": not an integer: '" + v + "'");
  }
  return x;
}

long Config::get_long(const std::string& s, const std::string& k, long def) const {
  return has(s, k) ? get_long(s, k) : def;
}

std::vector<double> Config::get_list(const std::string& s, const std::string& k) const {
  std::istringstream in(get_string(s, k));
  std::vector<double> out;
  std::string tok;
  while (in >> tok) out.push_back(to_double(tok, s + "." + k));
  if (out.empty()) throw ConfigError(s + "." + k + ": empty list");
  return out;
}

namespace {

std::vector<PauliCoeffs> coeff_lists(const Config& cfg, const std::string& sec) {
  const long n = cfg.get_long(sec, "segments", 1);
  if (n < 1 || n > 100000) throw ConfigError(sec + ".segments: must be in [1, 100000]");
  std::vector<PauliCoeffs> c(static_cast<std::size_t>(n));
  for (const char* k : {"am", "sc", "el"}) {
    if (!cfg.has(sec, k)) continue;
    const auto v = cfg.get_list(sec, k);
    if (v.size() != 1 && static_cast<long>(v.size()) != n) {
      throw ConfigError(sec + "." + k + ": expected 1 or " + std::to_string(n) + " values");
    }
    for (long i = 0; i < n; ++i) {
      const double x = v.size() == 1 ? v[0] : v[static_cast<std::size_t>(i)];
      if (std::string(k) == "am") c[static_cast<std::size_t>(i)].am = x;
      else if (std::string(k) == "sc") c[static_cast<std::size_t>(i)].sc = x;
      else c[static_cast<std::size_t>(i)].el = x;
    }
  }
  return c;
}

DisorderModel build_law(const Config& cfg, std::uint64_t seed) {
  const std::string type = cfg.get_string("law", "type");
  if (type == "bernoulli") return DisorderModel::bernoulli(cfg.get_double("law", "p", 0.5), seed);
  if (type == "uniform") return DisorderModel::uniform(cfg.get_double("law", "lo"), cfg.get_double("law", "hi"), seed);
  if (type == "degenerate") return DisorderModel::degenerate(cfg.get_double("law", "value", 0.0), seed);
  if (type == "discrete") {
    return DisorderModel::discrete(cfg.get_list("law", "atoms"), cfg.get_list("law", "probs"), seed);
  }
  throw ConfigError("law.type: unknown law '" + type + "'");
}

SingleSitePotential build_site(const Config& cfg) {
  const std::string kind = cfg.get_string("site", "kind", "normal");
  SingleSitePotential::Kind k;
  if (kind == "normal") k = SingleSitePotential::Kind::NormalForm;
  else if (kind == "electrostatic") k = SingleSitePotential::Kind::Electrostatic;
  else throw ConfigError("site.kind: expected 'normal' or 'electrostatic', got '" + kind + "'");
  if (cfg.has("site", "bump_lo") || cfg.has("site", "bump_hi")) {
    const double lo = cfg.get_double("site", "bump_lo"), hi = cfg.get_double("site", "bump_hi");
    const double a = cfg.get_double("site", "amplitude", 1.0);
    return k == SingleSitePotential::Kind::NormalForm ? SingleSitePotential::mass_bump(lo, hi, a)
                                                      : SingleSitePotential::electrostatic_bump(lo, hi, a);
  }
  return SingleSitePotential(PauliField::uniform_grid(coeff_lists(cfg, "site")), k);
}

}  // namespace

AndersonModel build_model(const Config& cfg, bool need_law, std::uint64_t seed) {
  if (!cfg.has_section("potential")) throw ConfigError("missing section [potential] (key 'potential.segments')");
  const PauliField per = PauliField::uniform_grid(coeff_lists(cfg, "potential"));
  const SingleSitePotential site = cfg.has_section("site") ? build_site(cfg) : SingleSitePotential();
  if (!need_law) return {per, site, DisorderModel::degenerate(0.0, seed)};
  if (!cfg.has_section("law")) throw ConfigError("missing section [law] (key 'law.type')");
  if (!cfg.has_section("site")) throw ConfigError("missing section [site] (key 'site.kind')");
  return {per, site, build_law(cfg, seed)};
}

}  // namespace diracloc::cli
