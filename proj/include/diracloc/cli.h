#pragma once

/// Config ingestion, command dispatch, manifests and plot extraction for the command-line tool.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "diracloc/potential.h"

namespace diracloc::cli {

inline constexpr const char* kVersion = "1.0.0";

enum ExitCode : int { kOk = 0, kConfigError = 2, kNumericalDegeneracy = 3, kIoError = 4 };

/// Sectioned key = value file (';' comments). Unknown sections and keys are rejected.
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text, const std::string& origin = "<string>");

  bool has_section(const std::string& s) const { return data_.count(s) > 0; }
  bool has(const std::string& s, const std::string& k) const;

  std::string get_string(const std::string& s, const std::string& k) const;
  std::string get_string(const std::string& s, const std::string& k, const std::string& def) const;
  double get_double(const std::string& s, const std::string& k) const;
  double get_double(const std::string& s, const std::string& k, double def) const;
  long get_long(const std::string& s, const std::string& k) const;
  long get_long(const std::string& s, const std::string& k, long def) const;
  /// Whitespace-separated numbers.
  std::vector<double> get_list(const std::string& s, const std::string& k) const;

  /// Raw text the config was parsed from.
  const std::string& text() const { return text_; }

 private:
  void check_schema() const;
  std::string origin_, text_;
  std::map<std::string, std::map<std::string, std::string>> data_;
};

struct RunOptions;

/// [potential], [site] and [law]; the law is replaced by the zero atom unless `need_law`.
/// Throws ConfigError naming the missing section or key.
AndersonModel build_model(const Config& cfg, bool need_law, std::uint64_t seed);

/// --seed, else [run] seed, else 1.
std::uint64_t resolve_seed(const RunOptions& opt, const Config& cfg);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

struct RunManifest {
  std::string command;
  std::string config_sha256;
  std::uint64_t seed = 0;
  std::string version = kVersion;
  double wall_clock_seconds = 0.0;
  std::vector<std::pair<std::string, std::string>> outputs;  // file name, sha256

  void write_json(const std::string& path) const;
};

struct RunOptions {
  std::string command;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
};

/// Output directory: --out, else DIRACLOC_OUT, else [run] out, else "out".
std::string resolve_out_dir(const RunOptions& opt, const Config& cfg);

/// Dispatches a command and writes outputs plus manifest.json into the output directory.
/// Throws ConfigError, NumericalDegeneracy or IoError.
RunManifest run(const RunOptions& opt);

/// Two-column .dat series from run outputs found in `in_dir`; returns the files written.
/// Throws ConfigError for missing columns and IoError when nothing can be read.
std::vector<std::string> plotdata(const std::string& in_dir, const std::string& out_dir);

/// Argument parsing and exit-code mapping.
int main_entry(int argc, char** argv);

}  // namespace diracloc::cli
