#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "config.hpp"
#include "runner.hpp"
#include "version.hpp"

using namespace tbnls::cli;

namespace {

const char* describe(const std::string& cmd) {
  if (cmd == "bands") return "Bloch bands and the first gap at semiclassical.hbar";
  if (cmd == "basis") return "localized basis and tight-binding coefficients";
  if (cmd == "simulate") return "paired PDE / lattice run with reduction error";
  if (cmd == "diagnose") return "paired run plus remainder diagnostics";
  if (cmd == "sweep-model1") return "reduction error over hbar_list, fixed-strength regime";
  return "reduction error over hbar_list, hopping-scaled regime";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tight-binding reduction experiments for the periodic NLS"};
  app.set_version_flag("--version", std::string(kVersion) + " (" + kRevision + ")");
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string output;
  for (const auto& name : commands()) {
    auto* sub = app.add_subcommand(name, describe(name));
    sub->add_option("-c,--config", config_path, "sectioned key = value config file")
        ->check(CLI::ExistingFile);
    sub->add_option("-s,--set", overrides, "override one key, e.g. semiclassical.hbar=0.08");
    sub->add_option("-o,--output", output, "output directory (overrides output.directory)");
  }
  auto* show = app.add_subcommand("print-config", "print the effective configuration");
  show->add_option("-c,--config", config_path)->check(CLI::ExistingFile);
  show->add_option("-s,--set", overrides);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  std::string text;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  if (!output.empty()) overrides.push_back("output.directory=" + output);

  ExperimentConfig config;
  try {
    config = parse_config(text, overrides);
  } catch (const ConfigError& e) {
    std::cerr << (config_path.empty() ? "<defaults>" : config_path) << ": invalid configuration\n"
              << e.what() << '\n';
    return kConfigError;
  }

  const auto* sub = app.get_subcommands().front();
  if (sub->get_name() == "print-config") {
    std::cout << serialize(config);
    return kOk;
  }
  return run(sub->get_name(), config, std::cout);
}
