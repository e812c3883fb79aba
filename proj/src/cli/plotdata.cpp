#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "diracloc/cli.h"
#include "diracloc/errors.h"
#include "diracloc/io.h"
#include "json.hpp"

namespace diracloc::cli {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

using Series = std::vector<std::pair<double, double>>;

Series csv_columns(const fs::path& p, const std::string& cx, const std::string& cy) {
  std::ifstream in(p);
  if (!in) throw IoError("cannot read " + p.string());
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(p.filename().string() + ": missing header");
  const auto head = split(line);
  const auto col = [&](const std::string& name) {
    for (std::size_t i = 0; i < head.size(); ++i) {
      if (head[i] == name) return i;
    }
    throw ConfigError(p.filename().string() + ": missing column '" + name + "'");
  };
  const std::size_t ix = col(cx), iy = col(cy);
  Series s;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto row = split(line);
    if (row.size() != head.size()) throw ConfigError(p.filename().string() + ": ragged row");
    s.emplace_back(std::stod(row[ix]), std::stod(row[iy]));
  }
  return s;
}

Series wegner_series(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw IoError("cannot read " + p.string());
  const auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.contains("eta") || !j.contains("probability")) {
    throw ConfigError(p.filename().string() + ": missing 'eta' or 'probability'");
  }
  Series s;
  for (std::size_t i = 0; i < j["eta"].size(); ++i) {
    const double eta = j["eta"][i], prob = j["probability"][i];
    if (prob > 0.0) s.emplace_back(std::log(eta), std::log(prob));
  }
  return s;
}

void write_dat(const fs::path& p, const std::string& hx, const std::string& hy, const Series& s) {
  std::ofstream out(p, std::ios::binary);
  out << "# " << hx << ' ' << hy << '\n';
  for (auto [x, y] : s) out << fmt(x) << ' ' << fmt(y) << '\n';
  if (!out) throw IoError("cannot write " + p.string());
}

}  // namespace

std::vector<std::string> plotdata(const std::string& in_dir, const std::string& out_dir) {
  if (!fs::is_directory(in_dir)) throw IoError("no run output directory " + in_dir);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir);
  struct CsvSource {
    const char *in, *out, *x, *y, *hx, *hy;
  };
  static const CsvSource sources[] = {
      {"lyapunov.csv", "lyapunov.dat", "E", "gamma_hat", "E", "gamma_hat"},
      {"ids.csv", "ids.dat", "E", "N_hat", "E", "N_hat"},
      {"kotani.csv", "kotani.dat", "re_z", "re_w", "re_z", "re_w"},
      {"eigenfunction.csv", "eigenfunction.dat", "x", "abs_psi", "x", "abs_psi"},
      {"discriminant.csv", "discriminant.dat", "E", "re_D", "E", "re_D"},
  };
  std::vector<std::string> written;
  for (const auto& s : sources) {
    const fs::path p = fs::path(in_dir) / s.in;
    if (!fs::exists(p)) continue;
    const fs::path o = fs::path(out_dir) / s.out;
    write_dat(o, s.hx, s.hy, csv_columns(p, s.x, s.y));
    written.push_back(o.string());
  }
  if (const fs::path p = fs::path(in_dir) / "wegner.json"; fs::exists(p)) {
    const fs::path o = fs::path(out_dir) / "wegner.dat";
    write_dat(o, "log_eta", "log_P_hat", wegner_series(p));
    written.push_back(o.string());
  }
  if (written.empty()) throw IoError("no recognised run outputs in " + in_dir);
  return written;
}

}  // namespace diracloc::cli
