#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "msgn/app/commands.hpp"

namespace {

std::optional<std::filesystem::path> as_override(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return std::filesystem::path(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Modified Serre-Green-Naghdi simulator and verification harness"};
  app.set_version_flag("--version", msgn::app::version);
  app.require_subcommand(1);

  std::string config, out;
  auto add_config_command = [&](const char* name, const char* help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("config", config, "configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory (overrides output.dir)");
    return sub;
  };
  CLI::App* simulate = add_config_command("simulate", "run one simulation");
  CLI::App* dispersion = add_config_command("dispersion", "tabulate and measure phase speeds");
  CLI::App* blowup = add_config_command("blowup", "run the gradient blow-up experiment");

  double energy = 0.0, g = 9.81, hbar = 1.0, beta = 2.0 / 15.0;
  CLI::App* bounds = app.add_subcommand("bounds", "depth and velocity bounds for an energy level");
  bounds->add_option("--E", energy, "energy level")->required();
  bounds->add_option("--g", g, "gravity")->capture_default_str();
  bounds->add_option("--hbar", hbar, "mean depth")->capture_default_str();
  bounds->add_option("--beta", beta, "dispersion parameter")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : msgn::app::exit_config;
  }

  if (simulate->parsed()) return msgn::app::cmd_simulate(config, as_override(out));
  if (dispersion->parsed()) return msgn::app::cmd_dispersion(config, as_override(out));
  if (blowup->parsed()) return msgn::app::cmd_blowup(config, as_override(out));
  return msgn::app::cmd_bounds(energy, g, hbar, beta);
}
