// Command-line front end: slowlight --config run.ini [--mode M] [--out DIR] [--threads N]

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "slowlight/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Slow-light soliton simulator and verification laboratory"};
  std::string config_path;
  std::optional<std::string> mode;
  std::optional<std::string> out_dir;
  int threads = 1;
  std::optional<long long> seed;
  app.add_option("--config", config_path, "Run configuration file")->required()->check(CLI::ExistingFile);
  app.add_option("--mode", mode, "Override the configured mode")
      ->check(CLI::IsMember({"analytic", "simulate", "verify", "stopping", "convergence"}));
  app.add_option("--out", out_dir, "Output directory (overrides [output] dir)");
  app.add_option("--threads", threads, "Worker threads for data-parallel sweeps")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "Reserved; the pipeline is deterministic and draws no random numbers");
  CLI11_PARSE(app, argc, argv);

  try {
    const std::filesystem::path cfg(config_path);
    slowlight::RunConfig config = slowlight::parse_config(slowlight::read_file(cfg));
    if (mode) config.mode = slowlight::parse_mode(*mode);
    slowlight::RunOptions opt;
    opt.threads = threads;
    opt.base_dir = cfg.parent_path();
    const slowlight::RunOutcome result = slowlight::run(config, opt);
    const std::filesystem::path dest = out_dir ? std::filesystem::path(*out_dir) : std::filesystem::path(config.output.dir);
    result.artifacts.write_to(dest);
    std::cout << result.report.dump(2) << "\n";
    return result.exit_code;
  } catch (const slowlight::Error& e) {
    std::cerr << slowlight::failure_report(e) << "\n";
    return slowlight::exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << R"({"status":"error","category":"internal","exit_code":1,"message":)"
              << nlohmann::json(std::string(e.what())).dump() << "}\n";
    return 1;
  }
}
