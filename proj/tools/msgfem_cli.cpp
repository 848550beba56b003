// Command-line driver: property checks, local spectra and error sweeps for one configuration.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "msgfem/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"MS-GFEM for SWIP-DG on heterogeneous elliptic problems"};
  std::string config_path;
  std::string out_dir;
  bool checks_only = false;
  std::uint64_t seed = 0;
  int threads = 1;
  app.add_option("--config", config_path, "key = value configuration file (defaults when omitted)");
  app.add_option("--out", out_dir, "output directory, overrides out_dir");
  app.add_flag("--checks-only", checks_only, "run the property suite only");
  auto* seed_opt = app.add_option("--seed", seed, "overrides the configured seed");
  app.add_option("--threads", threads, "worker threads for subdomains and sweep points")->check(CLI::PositiveNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  msgfem::RunConfig config;
  try {
    std::string text;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) {
        std::cerr << "cannot read config file " << config_path << '\n';
        return 2;
      }
      std::ostringstream ss;
      ss << in.rdbuf();
      text = ss.str();
    }
    config = msgfem::parse_config(text);
    if (!out_dir.empty())
      config.out_dir = out_dir;
    if (*seed_opt)
      config.seed = seed;
    msgfem::validate(config);
  } catch (const msgfem::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }

  msgfem::RunOptions options;
  options.threads = threads;
  options.checks_only = checks_only;
  try {
    const auto result = msgfem::run(config, options, std::cout);
    return result.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
