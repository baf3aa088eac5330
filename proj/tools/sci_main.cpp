#include <string>

#include "CLI11.hpp"
#include "sci/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"sci: Cantor-space Koopman spectra, SCI towers and Xi_m experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  int threads = 1;
  long seed = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "experiment config JSON")->required();
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--threads", threads, "worker threads for grid evaluation");
    cmd->add_option("--seed", seed, "seed override for seeded instances");
  };

  CLI::App* spectrum = app.add_subcommand("spectrum", "pseudospectrum / sigma_ap towers");
  CLI::App* gadget = app.add_subcommand("gadget", "gadget diagnostics");
  CLI::App* xi = app.add_subcommand("xi", "Xi_m bounded-quantifier towers");
  CLI::App* reduction = app.add_subcommand("reduction", "silver-tree reduction demo");
  for (auto* cmd : {spectrum, gadget, xi, reduction}) add_common(cmd);

  CLI11_PARSE(app, argc, argv);

  auto run = [&](const char* expected_family) {
    std::ifstream in(config_path);
    if (!in) {
      std::fprintf(stderr, "error: cannot open %s\n", config_path.c_str());
      return 1;
    }
    sci::json config;
    try {
      in >> config;
    } catch (const sci::json::exception& e) {
      std::fprintf(stderr, "config parse error: %s\n", e.what());
      return 1;
    }
    if (seed != 0 && config.contains("xi")) config["xi"]["seed"] = seed;
    const std::string task = config.value("task", "");
    if (std::string(expected_family) == "spectrum" && task != "pseudospectrum" &&
        task != "sigma_ap") {
      std::fprintf(stderr, "config error: task \"%s\" does not belong to `sci spectrum`\n",
                   task.c_str());
      return 1;
    }
    const auto outcome = sci::run_experiment(config, out_dir, threads);
    std::fprintf(outcome.exit_code == 0 ? stdout : stderr, "%s\n", outcome.message.c_str());
    return outcome.exit_code;
  };

  if (spectrum->parsed()) return run("spectrum");
  if (gadget->parsed()) return run("gadget");
  if (xi->parsed()) return run("xi");
  if (reduction->parsed()) return run("reduction");
  return 1;
}
