#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "certbound/channels.hpp"

namespace certbound::cli {

enum class Command { SumCdf, DtCurve, McCurve };
enum class OutputFormat { Csv, Json };

std::string_view to_string(Command command);
std::string_view to_string(OutputFormat format);

// Arithmetic grid start, start + step, ... up to stop (inclusive, with a
// 1e-9 relative allowance for rounding).
struct Range {
  double start = 0.0;
  double stop = 0.0;
  double step = 1.0;
  std::vector<double> values() const;
};

enum class LawKind { Bernoulli, ChiSquared, Gaussian, Discrete };

struct DistributionSpec {
  LawKind kind = LawKind::Bernoulli;
  double p = 0.2;
  int dof = 1;
  double mean = 0.0;
  double variance = 1.0;
  std::vector<double> values;
  std::vector<double> weights;
  std::size_t nodes = 2001;
};

struct ChannelSpec {
  ChannelModel model;
  std::size_t nodes = 2001;
};

struct Validation {
  std::size_t samples = 100'000;
  std::uint64_t seed = 1;
};

struct RunConfig {
  Command command = Command::SumCdf;
  std::optional<DistributionSpec> distribution;
  std::optional<ChannelSpec> channel;
  std::size_t n = 1;
  Range a_grid;
  Range n_grid{100.0, 2000.0, 100.0};
  double rate = 0.5;
  std::optional<Validation> validation;
  std::optional<std::string> out_path;
  OutputFormat format = OutputFormat::Csv;
  std::string preset;
  // Config file name and the line of each key read from it, for validation messages.
  std::string source;
  std::map<std::string, int> lines;
};

// Applies the keys of a YAML document on top of `base`. Throws
// Error(ConfigError) with "source:line:column" context.
RunConfig parse_config(std::string_view yaml_text, const std::string& source, RunConfig base = {});
RunConfig load_config_file(const std::string& path, RunConfig base = {});

// Checks every field against the numeric preconditions of the library.
void validate_config(const RunConfig& cfg);

inline constexpr std::string_view kPresetNames[] = {"fig1",  "fig2",  "fig3a", "fig3b",
                                                    "fig4a", "fig4b", "fig5a", "fig5b"};
RunConfig preset_config(std::string_view name);

// Effective configuration as YAML, echoed into output headers.
std::string config_to_yaml(const RunConfig& cfg);

using Cell = std::variant<std::monostate, double, std::string>;

struct RowFailure {
  std::size_t row = 0;
  std::string context;
  std::string message;
};

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<RowFailure> failures;  // rows kept with null values and an error flag
};

Table run(const RunConfig& cfg, unsigned threads = 1);

std::string to_csv(const RunConfig& cfg, const Table& table);
std::string to_json(const RunConfig& cfg, const Table& table);

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;

int main_entry(int argc, const char* const* argv);

}  // namespace certbound::cli
