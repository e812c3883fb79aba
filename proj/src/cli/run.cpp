#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <openssl/evp.h>
#include <sstream>

#include "diracloc/cli.h"
#include "diracloc/dos.h"
#include "diracloc/errors.h"
#include "diracloc/floquet.h"
#include "diracloc/io.h"
#include "diracloc/lyapunov.h"
#include "diracloc/scattering.h"
#include "diracloc/spectrum.h"
#include "json.hpp"

namespace diracloc::cli {

namespace fs = std::filesystem;

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw IoError("sha256 failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

void RunManifest::write_json(const std::string& path) const {
  nlohmann::json files = nlohmann::json::array();
  for (const auto& [f, h] : outputs) files.push_back({{"file", f}, {"sha256", h}});
  nlohmann::json j{{"command", command},
                   {"config_sha256", config_sha256},
                   {"seed", seed},
                   {"version", version},
                   {"wall_clock_seconds", wall_clock_seconds},
                   {"outputs", files}};
  std::ofstream out(path, std::ios::binary);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("cannot write " + path);
}

std::uint64_t resolve_seed(const RunOptions& opt, const Config& cfg) {
  if (opt.seed) return *opt.seed;
  const long s = cfg.get_long("run", "seed", 1);
  if (s < 0) throw ConfigError("run.seed: must be non-negative");
  return static_cast<std::uint64_t>(s);
}

std::string resolve_out_dir(const RunOptions& opt, const Config& cfg) {
  if (opt.out_dir) return *opt.out_dir;
  if (const char* env = std::getenv("DIRACLOC_OUT"); env && *env) return env;
  return cfg.get_string("run", "out", "out");
}

namespace {

class Outputs {
 public:
  Outputs(std::string dir, RunManifest& m) : dir_(std::move(dir)), m_(m) {}

  template <class F>
  void write(const std::string& name, F&& body) {
    std::ostringstream os;
    body(os);
    const std::string s = os.str();
    const fs::path p = fs::path(dir_) / name;
    std::ofstream out(p, std::ios::binary);
    out << s;
    out.close();
    if (!out) throw IoError("cannot write " + p.string());
    m_.outputs.emplace_back(name, sha256_hex(s));
  }

 private:
  std::string dir_;
  RunManifest& m_;
};

std::vector<double> grid_of(const Config& cfg, const std::string& sec, double lo, double hi, long points,
                            const std::string& klo = "lo", const std::string& khi = "hi",
                            const std::string& kpts = "points") {
  lo = cfg.get_double(sec, klo, lo);
  hi = cfg.get_double(sec, khi, hi);
  points = cfg.get_long(sec, kpts, points);
  if (points < 1) throw ConfigError(sec + "." + kpts + ": need at least one point");
  if (points > 1 && !(hi > lo)) throw ConfigError(sec + ": need " + klo + " < " + khi);
  std::vector<double> g;
  for (long i = 0; i < points; ++i) g.push_back(points == 1 ? lo : lo + (hi - lo) * double(i) / double(points - 1));
  return g;
}

long positive(const Config& cfg, const std::string& sec, const std::string& key, long def) {
  const long v = cfg.get_long(sec, key, def);
  if (v < 1) throw ConfigError(sec + "." + key + ": must be positive");
  return v;
}

void json_to(std::ostream& os, const nlohmann::json& j) { os << j.dump(2) << '\n'; }

bool needs_law(const std::string& c) {
  return c == "lyapunov" || c == "ids" || c == "thouless" || c == "wegner" || c == "h1" ||
         c == "localize" || c == "kotani" || c == "critical";
}

void cmd_bands(const Config& cfg, const AndersonModel& m, Outputs& out) {
  const double lo = cfg.get_double("bands", "lo", -10.0), hi = cfg.get_double("bands", "hi", 10.0);
  const double res = cfg.get_double("bands", "resolution", 1e-2);
  if (!(res > 0.0)) throw ConfigError("bands.resolution: must be positive");
  const auto scan = stability_scan(m.per, lo, hi, res);
  out.write("bands.csv", [&](std::ostream& os) {
    os << "lo,hi\n";
    for (auto [a, b] : scan.bands) os << fmt(a) << ',' << fmt(b) << '\n';
  });
  out.write("stability.json", [&](std::ostream& os) { scan.write_json(os); });
  const auto g = grid_of(cfg, "bands", lo, hi, 201);
  out.write("discriminant.csv", [&](std::ostream& os) { write_band_csv(os, m.per, g); });
}

void cmd_scatter(const Config& cfg, const AndersonModel& m, Outputs& out) {
  const double lambda = cfg.get_double("scatter", "lambda", 1.0);
  std::vector<ScatteringData> rows;
  for (double e : grid_of(cfg, "scatter", -5.0, 5.0, 101)) {
    if (floquet_data(m.per, e).tag != Stability::Band) continue;
    try {
      rows.push_back(scattering_coefficients(m.per, m.site, lambda, e));
    } catch (const NumericalDegeneracy&) {
    }
  }
  out.write("scattering.csv", [&](std::ostream& os) { write_scattering_csv(os, rows); });
}

void cmd_critical(const Config& cfg, const AndersonModel& m, Outputs& out) {
  const double res = cfg.get_double("critical", "resolution", 1e-3);
  if (!(res > 0.0)) throw ConfigError("critical.resolution: must be positive");
  const auto cs = critical_set_scan(m.per, m.site, m.law, cfg.get_double("critical", "lo", -5.0),
                                    cfg.get_double("critical", "hi", 5.0), res);
  out.write("critical.json", [&](std::ostream& os) { cs.write_json(os); });
}

LyapunovCurve curve_for(const Config& cfg, const std::string& sec, const AndersonModel& m, std::uint64_t seed) {
  const auto g = grid_of(cfg, sec, -2.0, 2.0, 11);
  const long n = positive(cfg, sec, "n", 10000), R = positive(cfg, sec, "R", 200);
  const double margin = cfg.get_double(sec, "margin", sec == "lyapunov" ? 0.05 : 5.0);
  if (sec != "lyapunov" || !m.law.nontrivial() || m.law.extreme_support().first == m.law.extreme_support().second) {
    return lyapunov_curve(m, g, n, R, seed);
  }
  const double res = cfg.get_double(sec, "resolution", 1e-3);
  if (!(res > 0.0)) throw ConfigError(sec + ".resolution: must be positive");
  const auto cs = critical_set_scan(m.per, m.site, m.law, g.front() - 1.0, g.back() + 1.0, res);
  return lyapunov_curve(m, g, n, R, seed, &cs, margin);
}

void cmd_lyapunov(const Config& cfg, const AndersonModel& m, std::uint64_t seed, Outputs& out) {
  const auto c = curve_for(cfg, "lyapunov", m, seed);
  out.write("lyapunov.csv", [&](std::ostream& os) { c.write_csv(os); });
  out.write("lyapunov_fit.json", [&](std::ostream& os) { c.write_fit_json(os); });
}

void write_ids(const IdsTable& t, Outputs& out) {
  out.write("ids.csv", [&](std::ostream& os) { t.write_csv(os); });
  nlohmann::json j{{"L", t.L}, {"R", t.R}, {"seed", t.seed}, {"slope", t.E.size() > 1 ? t.slope() : 0.0},
                   {"max_deviation", t.max_deviation()}, {"bound", t.bound()},
                   {"within_bound", t.max_deviation() <= t.bound()}};
  out.write("ids.json", [&](std::ostream& os) { json_to(os, j); });
}

void cmd_ids(const Config& cfg, const AndersonModel& m, std::uint64_t seed, Outputs& out) {
  const auto t = ids_estimate(m, grid_of(cfg, "ids", -5.0, 5.0, 101), cfg.get_double("ids", "L", 200.0),
                              positive(cfg, "ids", "R", 20), seed);
  write_ids(t, out);
}

void cmd_thouless(const Config& cfg, const AndersonModel& m, std::uint64_t seed, Outputs& out) {
  const auto c = curve_for(cfg, "thouless", m, seed);
  const double margin = cfg.get_double("thouless", "margin", 5.0);
  const double lo = c.points.front().E - 2 * margin, hi = c.points.back().E + 2 * margin;
  const auto g = grid_of(cfg, "thouless", lo, hi, static_cast<long>(50 * (hi - lo)) + 1, "ids_lo", "ids_hi",
                         "ids_points");
  const auto t = ids_estimate(m, g, cfg.get_double("thouless", "L", 1000.0), positive(cfg, "thouless", "ids_R", 20),
                              seed);
  const auto f = thouless_check(c, t, margin);
  out.write("lyapunov.csv", [&](std::ostream& os) { c.write_csv(os); });
  write_ids(t, out);
  out.write("thouless.json", [&](std::ostream& os) { f.write_json(os); });
}

void cmd_wegner(const Config& cfg, const AndersonModel& m, std::uint64_t seed, Outputs& out) {
  const auto w = wegner_probe(m, cfg.get_double("wegner", "E", 0.3), cfg.get_double("wegner", "L", 50.0),
                              cfg.get_double("wegner", "eta_max", 0.01),
                              static_cast<int>(positive(cfg, "wegner", "levels", 10)),
                              positive(cfg, "wegner", "R", 500), seed);
  out.write("wegner.json", [&](std::ostream& os) { w.write_json(os); });
}

void cmd_h1(const Config& cfg, const AndersonModel& m, std::uint64_t seed, Outputs& out) {
  const auto h = h1_probe(m, cfg.get_double("h1", "E", 0.3), cfg.get_double("h1", "L0", 36.0),
                          cfg.get_double("h1", "theta", 1.0), positive(cfg, "h1", "R", 100), seed);
  out.write("h1.json", [&](std::ostream& os) { h.write_json(os); });
}

void cmd_localize(const Config& cfg, const AndersonModel& m, std::uint64_t seed, Outputs& out) {
  const double L = cfg.get_double("localize", "L", 100.0);
  const long r = cfg.get_long("localize", "realization", 0);
  if (r < 0) throw ConfigError("localize.realization: must be non-negative");
  const auto box = model_box(m, cfg.get_double("localize", "center", 0.0), L, seed, static_cast<std::uint64_t>(r));
  const double E1 = cfg.get_double("localize", "E1", -1.0), E2 = cfg.get_double("localize", "E2", 1.0);
  const auto ev = dirichlet_eigenvalues(box, E1, E2);
  out.write("eigenvalues.csv", [&](std::ostream& os) { ev.write_csv(os); });
  nlohmann::json j{{"L", L}, {"realization", r}, {"eigenvalue_count", ev.size()}};
  if (ev.size() > 0) {
    const double target = cfg.get_double("localize", "target", 0.5 * (E1 + E2));
    std::size_t best = 0;
    for (std::size_t i = 1; i < ev.size(); ++i) {
      if (std::abs(ev.E[i] - target) < std::abs(ev.E[best] - target)) best = i;
    }
    const auto ef = eigenfunction(box, ev.E[best], cfg.get_double("localize", "step", 0.05));
    out.write("eigenfunction.csv", [&](std::ostream& os) { ef.write_csv(os); });
    j["E"] = ef.E;
    j["m_hat"] = ef.m_hat;
    j["fit_rms"] = ef.fit_rms;
    j["localized"] = ef.localized;
    j["localization_center"] = ef.localization_center;
    j["norm_check"] = ef.norm_check;
    j["boundary_residual"] = ef.boundary_residual;
  }
  out.write("localize.json", [&](std::ostream& os) { json_to(os, j); });
}

void cmd_kotani(const Config& cfg, const AndersonModel& m, std::uint64_t seed, Outputs& out) {
  const double im = cfg.get_double("kotani", "im", 0.5);
  const long R = positive(cfg, "kotani", "R", 50);
  const double X = cfg.get_double("kotani", "X", 100.0 / im);
  std::vector<KotaniSample> rows;
  for (double re : grid_of(cfg, "kotani", -2.0, 2.0, 9, "re_lo", "re_hi", "points")) {
    rows.push_back(kotani_w(m, cplx(re, im), R, X, seed));
  }
  out.write("kotani.csv", [&](std::ostream& os) { write_kotani_csv(os, rows); });
  nlohmann::json pts = nlohmann::json::array();
  const double h = cfg.get_double("kotani", "h", 1e-3);
  for (const auto& k : rows) {
    const cplx d = kotani_derivative(m, k.z, h, R, X, seed);
    pts.push_back({{"re_z", k.z.real()}, {"im_z", k.z.imag()}, {"gamma", k.gamma()}, {"std_error", k.std_error},
                   {"re_dw", d.real()}, {"im_dw", d.imag()}});
  }
  out.write("kotani.json", [&](std::ostream& os) { json_to(os, {{"R", R}, {"X", X}, {"points", pts}}); });
}

}  // namespace

RunManifest run(const RunOptions& opt) {
  static const std::set<std::string> commands{"bands", "scatter", "critical", "lyapunov", "ids",
                                              "thouless", "wegner", "h1", "localize", "kotani"};
  if (!commands.count(opt.command)) throw ConfigError("unknown command '" + opt.command + "'");
  const auto t0 = std::chrono::steady_clock::now();
  const Config cfg = Config::parse_file(opt.config_path);
  const std::uint64_t seed = resolve_seed(opt, cfg);
  const AndersonModel model = build_model(cfg, needs_law(opt.command), seed);
  const std::string dir = resolve_out_dir(opt, cfg);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir);

  RunManifest man;
  man.command = opt.command;
  man.config_sha256 = sha256_hex(cfg.text());
  man.seed = seed;
  Outputs out(dir, man);
  const std::string& c = opt.command;
  if (c == "bands") cmd_bands(cfg, model, out);
  else if (c == "scatter") cmd_scatter(cfg, model, out);
  else if (c == "critical") cmd_critical(cfg, model, out);
  else if (c == "lyapunov") cmd_lyapunov(cfg, model, seed, out);
  else if (c == "ids") cmd_ids(cfg, model, seed, out);
  else if (c == "thouless") cmd_thouless(cfg, model, seed, out);
  else if (c == "wegner") cmd_wegner(cfg, model, seed, out);
  else if (c == "h1") cmd_h1(cfg, model, seed, out);
  else if (c == "localize") cmd_localize(cfg, model, seed, out);
  else cmd_kotani(cfg, model, seed, out);
  man.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  man.write_json((fs::path(dir) / "manifest.json").string());
  return man;
}

}  // namespace diracloc::cli
