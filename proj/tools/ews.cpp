// Command-line front end of the early warning pipeline.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ews/error.hpp"
#include "ews/pipeline.hpp"

namespace {

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

int run(const std::string& command, const Options& opt) {
  ews::PipelineConfig config = opt.config.empty() ? ews::PipelineConfig{} : ews::load_config(opt.config);
  if (opt.seed) config.set_seed(*opt.seed);
  if (!opt.out.empty()) config.report.output_dir = opt.out;
  config.validate();
  ews::Pipeline::Logger log;
  if (!opt.quiet) log = [](const std::string& m) { std::cerr << m << "\n"; };
  ews::Pipeline pipeline(config, config.report.output_dir, log);
  pipeline.run(command);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Household financial distress early warning pipeline"};
  app.require_subcommand(1);
  Options opt;
  std::string print_config_path;

  const char* descriptions[][2] = {
      {"generate", "Generate the synthetic household panel and its EDA summary"},
      {"featurize", "Build leakage-safe feature matrices for the temporal split"},
      {"train", "Train and register the binary and severity models"},
      {"evaluate", "Evaluate registered models and fit Platt calibration"},
      {"explain", "Compute SHAP attributions, importance rankings and narratives"},
      {"stress", "Re-evaluate frozen models under feature shocks and check drift"},
      {"report", "Render the static report from serialized artifacts"},
      {"run-all", "Run every stage in order"},
  };
  for (const auto& [name, description] : descriptions) {
    auto* sub = app.add_subcommand(name, description);
    sub->add_option("--config", opt.config, "Pipeline config file (JSON)")->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "Output directory (overrides report.output_dir)");
    sub->add_option("--seed", opt.seed, "Global seed (overrides the config)");
    sub->add_flag("--quiet", opt.quiet, "Suppress progress messages");
  }
  auto* show = app.add_subcommand("print-config", "Print the fully resolved configuration");
  show->add_option("--config", opt.config, "Pipeline config file (JSON)")->check(CLI::ExistingFile);
  show->add_option("--seed", opt.seed, "Global seed (overrides the config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    for (const auto* sub : app.get_subcommands()) {
      if (sub->get_name() == "print-config") {
        ews::PipelineConfig config = opt.config.empty() ? ews::PipelineConfig{} : ews::load_config(opt.config);
        if (opt.seed) config.set_seed(*opt.seed);
        std::cout << ews::config_to_json(config);
        return 0;
      }
      return run(sub->get_name(), opt);
    }
  } catch (const ews::Error& e) {
    std::cerr << "ews: " << e.what() << "\n";
    return ews::exit_status(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "ews: io error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "ews: " << e.what() << "\n";
    return 5;
  }
  return 0;
}
