#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "certbound/cli.hpp"
#include "certbound/error.hpp"
#include "certbound/version.hpp"

namespace certbound::cli {
namespace {

void write_atomically(const std::string& path, const std::string& content) {
  const std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::ConfigError, fmt::format("cannot write '{}'", path));
    out << content;
    if (!out) throw Error(ErrorCode::ConfigError, fmt::format("write to '{}' failed", path));
  }
  std::filesystem::rename(tmp, target);
}

std::optional<Command> command_from(const std::string& name) {
  if (name == "sum-cdf") return Command::SumCdf;
  if (name == "dt-curve") return Command::DtCurve;
  if (name == "mc-curve") return Command::McCurve;
  return std::nullopt;
}

}  // namespace

int main_entry(int argc, const char* const* argv) {
  CLI::App app{"Certified saddlepoint bounds for sums of i.i.d. variables and finite-blocklength coding."};
  app.set_version_flag("--version", std::string(kVersion));
  std::string command;
  std::string config_path;
  std::string out_path;
  std::string format;
  std::string preset;
  unsigned threads = 1;
  std::optional<std::uint64_t> seed;
  app.add_option("command", command, "sum-cdf | dt-curve | mc-curve | figure")
      ->required()
      ->check(CLI::IsMember({"sum-cdf", "dt-curve", "mc-curve", "figure"}));
  app.add_option("--config", config_path, "YAML run configuration");
  app.add_option("--out", out_path, "Output file (default: stdout)");
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  std::vector<std::string> presets(std::begin(kPresetNames), std::end(kPresetNames));
  app.add_option("--preset", preset, "Figure preset")->check(CLI::IsMember(presets));
  app.add_option("--threads", threads, "Worker threads for row evaluation (0: all cores)");
  app.add_option("--seed", seed, "Seed for Monte Carlo validation");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  RunConfig cfg;
  try {
    if (command == "figure" && preset.empty()) {
      throw Error(ErrorCode::ConfigError, "figure needs --preset");
    }
    if (command != "figure" && preset.empty() && config_path.empty()) {
      throw Error(ErrorCode::ConfigError, fmt::format("{} needs --config or --preset", command));
    }
    if (!preset.empty()) cfg = preset_config(preset);
    if (!config_path.empty()) cfg = load_config_file(config_path, cfg);
    if (const auto wanted = command_from(command)) {
      const bool from_file = cfg.lines.count("command") != 0;
      if ((from_file || !preset.empty()) && cfg.command != *wanted) {
        throw Error(ErrorCode::ConfigError, fmt::format("command '{}' conflicts with the configured command '{}'",
                                                        command, to_string(cfg.command)));
      }
      cfg.command = *wanted;
    }
    if (!format.empty()) cfg.format = format == "json" ? OutputFormat::Json : OutputFormat::Csv;
    if (!out_path.empty()) cfg.out_path = out_path;
    if (seed && cfg.validation) cfg.validation->seed = *seed;
    validate_config(cfg);
  } catch (const Error& e) {
    std::cerr << "certbound: " << e.what() << '\n';
    return kExitConfig;
  }

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  Table table;
  try {
    table = run(cfg, threads);
  } catch (const Error& e) {
    std::cerr << "certbound: " << e.what() << '\n';
    return e.code() == ErrorCode::ConfigError ? kExitConfig : kExitNumeric;
  }

  const std::string text = cfg.format == OutputFormat::Json ? to_json(cfg, table) : to_csv(cfg, table);
  try {
    if (cfg.out_path) {
      write_atomically(*cfg.out_path, text);
    } else {
      std::cout << text << std::flush;
    }
  } catch (const std::exception& e) {
    std::cerr << "certbound: " << e.what() << '\n';
    return kExitConfig;
  }

  for (const auto& f : table.failures) {
    std::cerr << fmt::format("certbound: row {} ({}): {}\n", f.row, f.context, f.message);
  }
  return table.failures.empty() ? kExitOk : kExitNumeric;
}

}  // namespace certbound::cli
