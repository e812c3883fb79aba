#include <iostream>

#include "CLI11.hpp"
#include "diracloc/cli.h"
#include "diracloc/errors.h"

namespace diracloc::cli {

int main_entry(int argc, char** argv) {
  CLI::App app{"Random Dirac operators: transfer matrices, spectra and localization diagnostics"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  RunOptions opt;
  std::uint64_t seed = 0;
  std::string out;
  for (const char* name : {"bands", "scatter", "critical", "lyapunov", "ids", "thouless", "wegner", "h1",
                           "localize", "kotani"}) {
    auto* sub = app.add_subcommand(name, std::string("run the ") + name + " experiment");
    sub->add_option("--config", opt.config_path, "config file")->required();
    sub->add_option("--seed", seed, "master seed (overrides [run] seed)");
    sub->add_option("--out", out, "output directory");
  }
  std::string in_dir, plot_out;
  auto* plot = app.add_subcommand("plotdata", "extract two-column series from run outputs");
  plot->add_option("--in", in_dir, "run output directory")->required();
  plot->add_option("--out", plot_out, "destination (defaults to the input directory)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (plot->parsed()) {
      for (const auto& f : plotdata(in_dir, plot_out.empty() ? in_dir : plot_out)) std::cout << f << '\n';
      return kOk;
    }
    auto* sub = app.get_subcommands().front();
    opt.command = sub->get_name();
    if (sub->count("--seed")) opt.seed = seed;
    if (sub->count("--out")) opt.out_dir = out;
    const auto man = run(opt);
    for (const auto& [f, h] : man.outputs) std::cout << h << "  " << f << '\n';
    return kOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const NumericalDegeneracy& e) {
    std::cerr << "numerical degeneracy: " << e.what() << '\n';
    return kNumericalDegeneracy;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kIoError;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kIoError;
  }
}

}  // namespace diracloc::cli
