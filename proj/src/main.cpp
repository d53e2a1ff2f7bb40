// CLI driver.  Exit codes: 0 success, 2 config/usage error, 3 numerical
// failure, 4 degenerate case detected.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "kspec/pipeline.hpp"

namespace {

kspec::RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f)
    throw kspec::ValidationError("config", "cannot open file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return kspec::parse_config(ss.str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spectral stability of kinks under localized damping"};
  app.require_subcommand(1);

  std::string run_config_path, out_dir, modes;
  bool no_bs = false, evolve = false;
  CLI::App* run = app.add_subcommand("run", "run the full pipeline");
  run->add_option("config", run_config_path, "TOML config file")->required();
  run->add_option("--out", out_dir, "output directory override");
  run->add_option("--modes", modes, "mode selection: all or a discrete index");
  run->add_flag("--no-bs", no_bs, "skip the nonperturbative root sweep");
  run->add_flag("--evolve", evolve, "enable the time-domain cross-check");

  std::string val_config_path;
  CLI::App* val = app.add_subcommand("validate", "check a config and model");
  val->add_option("config", val_config_path, "TOML config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;  // --help exits 0; usage errors are config errors
  }

  try {
    if (run->parsed()) {
      kspec::RunConfig cfg = load_config(run_config_path);
      if (!out_dir.empty()) cfg.out_dir = out_dir;
      if (!modes.empty()) {
        if (modes == "all" || modes == "all-discrete") {
          cfg.modes = "all-discrete";
          cfg.mode_index = -1;
        } else {
          int idx = -1;
          try {
            idx = std::stoi(modes);
          } catch (const std::exception&) {
            throw kspec::ValidationError("--modes",
                                         "expected all or a mode index");
          }
          if (idx < 0)
            throw kspec::ValidationError("--modes", "index must be >= 0");
          cfg.mode_index = idx;
          cfg.modes = modes;
        }
      }
      if (no_bs) cfg.run_bs = false;
      if (evolve) cfg.run_evolution = true;
      kspec::PipelineOutcome out = kspec::run_pipeline(cfg);
      std::cout << "summary: " << out.summary_path << "\n"
                << "report:  " << out.report_path << "\n";
      return out.exit_code;
    }
    kspec::RunConfig cfg = load_config(val_config_path);
    kspec::validate_run_config(cfg, std::cout);
    std::cout << "config ok\n";
    return 0;
  } catch (const kspec::ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const kspec::ValidationError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const kspec::Undetermined& e) {
    std::cerr << "degenerate case: " << e.what() << "\n";
    return 4;
  } catch (const kspec::KspecError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
