#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "hdyn/common/errors.hpp"
#include "hdyn/harness/config.hpp"
#include "hdyn/harness/stages.hpp"

namespace {

struct Args {
  std::string config_file;
  std::vector<std::string> overrides;
  std::string out = "hdyn_out";
  bool print_config = false;
};

}  // namespace

int main(int argc, char** argv) {
  using namespace hdyn;
  CLI::App app{"hdyn: robot dynamics models, observer, contact tasks and speed planning on a synthetic plant"};
  app.require_subcommand(1);
  app.footer(
      "exit codes: 0 success, 2 config error, 3 upstream artifact missing, 4 task failure\n"
      "run `hdyn <subcommand> --help` for the config keys each subcommand reads");

  std::map<std::string, Args> args;
  for (const auto& name : subcommand_names()) {
    Args& a = args[name];
    CLI::App* sub = app.add_subcommand(name, subcommand_summary(name));
    sub->add_option("-c,--config", a.config_file, "JSON config file layered over the defaults");
    sub->add_option("-s,--set", a.overrides, "override one key, e.g. --set data.keep=4 (repeatable)");
    sub->add_option("-o,--out", a.out, "output directory; upstream artifacts are read from here")
        ->capture_default_str();
    sub->add_flag("--print-config", a.print_config, "print the resolved config and exit");
    sub->footer(format_schema(subcommand_sections(name)));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  const Args& a = args.at(name);
  try {
    const nlohmann::json config = load_config(a.config_file, a.overrides);
    if (a.print_config) {
      std::cout << config.dump(2) << "\n";
      return kExitOk;
    }
    const StageResult r = run_stage(name, config, a.out);
    std::cout << r.report;
    const std::string tag = r.manifest.tag.empty() ? "" : "-" + r.manifest.tag;
    std::cout << "manifest: " << (std::filesystem::path(a.out) / "manifests" / (name + tag + ".json")).string() << " ("
              << r.manifest.outputs.size() << " outputs, digest " << r.manifest.digest().substr(0, 16) << ")\n";
    if (!r.task_ok) {
      std::cerr << "hdyn " << name << ": task failed\n";
      return kExitTask;
    }
    return kExitOk;
  } catch (const MissingArtifact& e) {
    std::cerr << "hdyn " << name << ": " << e.what() << "\n";
    return kExitMissing;
  } catch (const ConfigError& e) {
    std::cerr << "hdyn " << name << ": " << e.what() << "\n";
    return kExitConfig;
  } catch (const ContractError& e) {
    std::cerr << "hdyn " << name << ": invalid configuration: " << e.what() << "\n";
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "hdyn " << name << ": config value has the wrong type: " << e.what() << "\n";
    return kExitConfig;
  }
}
