#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "fracsl/cli/config.hpp"
#include "fracsl/cli/plot.hpp"
#include "fracsl/cli/run.hpp"
#include "fracsl/error.hpp"

namespace {

using namespace fracsl::cli;

bool read_file(const std::string& path, std::string& text) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  text = ss.str();
  return true;
}

void print_errors(const std::vector<SchemaError>& errs) {
  for (const auto& e : errs) std::cerr << (e.path.empty() ? "<root>" : e.path) << ": " << e.message << '\n';
}

int run_command(const std::string& command, const std::string& config_path, std::string out_dir,
                std::optional<std::uint64_t> seed) {
  std::string text;
  if (!read_file(config_path, text)) {
    std::cerr << "cannot read config " << config_path << '\n';
    return kExitConfigError;
  }
  ExperimentConfig cfg;
  try {
    cfg = parse_config(text);
  } catch (const ConfigError& e) {
    print_errors(e.errors());
    return kExitConfigError;
  }
  if (cfg.command != command) {
    std::cerr << "command: config names '" << cfg.command << "' but '" << command << "' was requested\n";
    return kExitConfigError;
  }
  if (seed) cfg.seed = *seed;
  if (out_dir.empty()) out_dir = cfg.output_dir;
  if (out_dir.empty()) {
    std::cerr << "output_dir: give --out or set output_dir in the config\n";
    return kExitConfigError;
  }
  const auto m = run(cfg, out_dir);
  for (const auto& c : m.checks) {
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.value << ' ' << c.relation << ' ' << c.threshold
              << '\n';
  }
  if (m.error) std::cerr << "error: " << *m.error << '\n';
  std::cout << m.status << " (" << m.files.size() << " files, manifest in " << out_dir << ")\n";
  return m.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fractional diffusion inverse-problem experiments"};
  app.set_version_flag("--version", tool_version());
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  std::map<std::string, CLI::App*> subs;
  for (const auto& name : command_names()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config", config_path, "JSON configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (overrides output_dir)");
    sub->add_option("--seed", seed, "random seed (overrides seed)");
    subs[name] = sub;
  }

  auto* validate_cmd = app.add_subcommand("validate", "check a configuration against the schema");
  validate_cmd->add_option("--config", config_path, "JSON configuration")->required()->check(CLI::ExistingFile);

  app.add_subcommand("schema", "print the configuration JSON schema");

  std::string csv_path, spec_path, svg_path;
  auto* plot_cmd = app.add_subcommand("plot", "render a CSV file as SVG");
  plot_cmd->add_option("--csv", csv_path, "input CSV")->required()->check(CLI::ExistingFile);
  plot_cmd->add_option("--spec", spec_path, "JSON plot spec")->required()->check(CLI::ExistingFile);
  plot_cmd->add_option("--out", svg_path, "output SVG")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfigError;
  }

  if (app.got_subcommand("schema")) {
    std::cout << published_schema().dump(2) << '\n';
    return 0;
  }
  if (app.got_subcommand(validate_cmd)) {
    std::string text;
    read_file(config_path, text);
    const auto errs = validate(text);
    if (errs.empty()) {
      std::cout << "valid\n";
      return 0;
    }
    print_errors(errs);
    return kExitConfigError;
  }
  if (app.got_subcommand(plot_cmd)) {
    std::string text;
    read_file(spec_path, text);
    try {
      plot(csv_path, PlotSpec::from_json(json::parse(text)), svg_path);
    } catch (const json::exception& e) {
      std::cerr << "plot spec: " << e.what() << '\n';
      return kExitConfigError;
    } catch (const fracsl::Error& e) {
      std::cerr << e.what() << '\n';
      return kExitNumericalError;
    }
    return 0;
  }
  for (const auto& [name, sub] : subs) {
    if (app.got_subcommand(sub)) {
      const auto seed_opt = sub->count("--seed") ? std::optional<std::uint64_t>(seed) : std::nullopt;
      return run_command(name, config_path, out_dir, seed_opt);
    }
  }
  return kExitConfigError;
}
