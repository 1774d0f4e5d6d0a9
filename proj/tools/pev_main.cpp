#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pev/app.hpp"

int main(int argc, char** argv) {
  CLI::App cli{"Principal eigenvalue optimization for two-phase elliptic operators"};
  cli.set_version_flag("--version", pev::app::kVersion);

  std::string command;
  std::string config;
  std::string out;
  cli.add_option("command", command, "eig | maximize | minimize | laminate | classify | decay | verify")
      ->required()
      ->check(CLI::IsMember(pev::app::commands()));
  cli.add_option("--config,-c", config, "JSON run configuration")->required()->check(CLI::ExistingFile);
  cli.add_option("--out,-o", out, "output directory (overrides the config's \"output\")");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? 0 : pev::app::kExitValidation;
  }

  std::optional<std::filesystem::path> out_dir;
  if (!out.empty()) out_dir = out;
  return pev::app::run(command, config, out_dir);
}
