#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "certbound/cli.hpp"
#include "certbound/error.hpp"

namespace certbound::cli {

std::string_view to_string(Command command) {
  switch (command) {
    case Command::SumCdf: return "sum-cdf";
    case Command::DtCurve: return "dt-curve";
    case Command::McCurve: return "mc-curve";
  }
  return "unknown";
}

std::string_view to_string(OutputFormat format) { return format == OutputFormat::Json ? "json" : "csv"; }

std::vector<double> Range::values() const {
  std::vector<double> out;
  const double span = stop - start;
  const auto count = static_cast<std::size_t>(std::floor(span / step * (1.0 + 1e-9) + 1e-9)) + 1;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(start + static_cast<double>(i) * step);
  return out;
}

namespace {

constexpr std::size_t kMaxGridPoints = 1'000'000;
constexpr std::size_t kMinSamples = 10'000;

std::string_view law_name(LawKind kind) {
  switch (kind) {
    case LawKind::Bernoulli: return "bernoulli";
    case LawKind::ChiSquared: return "chi_squared";
    case LawKind::Gaussian: return "gaussian";
    case LawKind::Discrete: return "discrete";
  }
  return "unknown";
}

std::string_view channel_name(ChannelKind kind) {
  switch (kind) {
    case ChannelKind::Bsc: return "bsc";
    case ChannelKind::BiAwgn: return "bi_awgn";
    case ChannelKind::BiSas: return "bi_sas";
  }
  return "unknown";
}

class Reader {
 public:
  Reader(std::string source, RunConfig& cfg) : source_(std::move(source)), cfg_(cfg) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& message) const {
    const YAML::Mark mark = node.Mark();
    throw Error(ErrorCode::ConfigError, fmt::format("{}:{}:{}: {}", source_, mark.line + 1, mark.column + 1, message));
  }

  void expect_map(const YAML::Node& node, const std::string& path) const {
    if (!node.IsMap()) fail(node, fmt::format("'{}' must be a mapping", path));
  }

  void check_keys(const YAML::Node& map, const std::string& section, std::initializer_list<std::string_view> allowed) const {
    for (const auto& kv : map) {
      const auto key = kv.first.as<std::string>();
      bool ok = false;
      for (auto a : allowed) ok = ok || key == a;
      if (!ok) fail(kv.first, fmt::format("unknown key '{}' in {}", key, section));
    }
  }

  void note(const std::string& path, const YAML::Node& node) { cfg_.lines[path] = node.Mark().line + 1; }

  std::string text(const YAML::Node& node, const std::string& path) {
    if (!node.IsScalar()) fail(node, fmt::format("'{}' must be a scalar", path));
    note(path, node);
    return node.Scalar();
  }

  double real(const YAML::Node& node, const std::string& path) {
    const std::string s = text(node, path);
    try {
      return node.as<double>();
    } catch (const YAML::Exception&) {
      fail(node, fmt::format("'{}' must be a number, got '{}'", path, s));
    }
  }

  std::int64_t integer(const YAML::Node& node, const std::string& path) {
    const double v = real(node, path);
    if (!std::isfinite(v) || v != std::floor(v) || std::abs(v) > 9.0e15) {
      fail(node, fmt::format("'{}' must be an integer, got '{}'", path, node.Scalar()));
    }
    return static_cast<std::int64_t>(v);
  }

  std::size_t count(const YAML::Node& node, const std::string& path) {
    const std::int64_t v = integer(node, path);
    if (v < 0) fail(node, fmt::format("'{}' must be non-negative", path));
    return static_cast<std::size_t>(v);
  }

  bool boolean(const YAML::Node& node, const std::string& path) {
    const std::string s = text(node, path);
    try {
      return node.as<bool>();
    } catch (const YAML::Exception&) {
      fail(node, fmt::format("'{}' must be true or false, got '{}'", path, s));
    }
  }

  std::vector<double> reals(const YAML::Node& node, const std::string& path) {
    if (!node.IsSequence()) fail(node, fmt::format("'{}' must be a list of numbers", path));
    note(path, node);
    std::vector<double> out;
    for (std::size_t i = 0; i < node.size(); ++i) out.push_back(real(node[i], fmt::format("{}[{}]", path, i)));
    return out;
  }

  Range range(const YAML::Node& node, const std::string& path, Range r) {
    expect_map(node, path);
    check_keys(node, path, {"start", "stop", "step"});
    note(path, node);
    if (node["start"]) r.start = real(node["start"], path + ".start");
    if (node["stop"]) r.stop = real(node["stop"], path + ".stop");
    if (node["step"]) r.step = real(node["step"], path + ".step");
    return r;
  }

  void distribution(const YAML::Node& node) {
    expect_map(node, "distribution");
    DistributionSpec spec = cfg_.distribution.value_or(DistributionSpec{});
    if (node["kind"]) {
      const std::string kind = text(node["kind"], "distribution.kind");
      LawKind parsed;
      if (kind == "bernoulli") {
        parsed = LawKind::Bernoulli;
      } else if (kind == "chi_squared") {
        parsed = LawKind::ChiSquared;
      } else if (kind == "gaussian") {
        parsed = LawKind::Gaussian;
      } else if (kind == "discrete") {
        parsed = LawKind::Discrete;
      } else {
        fail(node["kind"], fmt::format("unknown distribution kind '{}' (bernoulli, chi_squared, gaussian, discrete)", kind));
      }
      if (parsed != spec.kind) {
        spec = DistributionSpec{};
        spec.kind = parsed;
      }
    }
    switch (spec.kind) {
      case LawKind::Bernoulli: check_keys(node, "bernoulli distribution", {"kind", "p"}); break;
      case LawKind::ChiSquared: check_keys(node, "chi_squared distribution", {"kind", "dof", "nodes"}); break;
      case LawKind::Gaussian: check_keys(node, "gaussian distribution", {"kind", "mean", "variance", "nodes"}); break;
      case LawKind::Discrete: check_keys(node, "discrete distribution", {"kind", "values", "weights"}); break;
    }
    if (node["p"]) spec.p = real(node["p"], "distribution.p");
    if (node["dof"]) spec.dof = static_cast<int>(integer(node["dof"], "distribution.dof"));
    if (node["mean"]) spec.mean = real(node["mean"], "distribution.mean");
    if (node["variance"]) spec.variance = real(node["variance"], "distribution.variance");
    if (node["values"]) spec.values = reals(node["values"], "distribution.values");
    if (node["weights"]) spec.weights = reals(node["weights"], "distribution.weights");
    if (node["nodes"]) spec.nodes = count(node["nodes"], "distribution.nodes");
    cfg_.distribution = std::move(spec);
  }

  void channel(const YAML::Node& node) {
    expect_map(node, "channel");
    ChannelSpec spec = cfg_.channel.value_or(ChannelSpec{});
    if (node["kind"]) {
      const std::string kind = text(node["kind"], "channel.kind");
      ChannelKind parsed;
      if (kind == "bsc") {
        parsed = ChannelKind::Bsc;
      } else if (kind == "bi_awgn") {
        parsed = ChannelKind::BiAwgn;
      } else if (kind == "bi_sas") {
        parsed = ChannelKind::BiSas;
      } else {
        fail(node["kind"], fmt::format("unknown channel kind '{}' (bsc, bi_awgn, bi_sas)", kind));
      }
      if (parsed != spec.model.kind) spec = ChannelSpec{ChannelModel{.kind = parsed}};
    }
    switch (spec.model.kind) {
      case ChannelKind::Bsc: check_keys(node, "bsc channel", {"kind", "delta"}); break;
      case ChannelKind::BiAwgn: check_keys(node, "bi_awgn channel", {"kind", "snr", "nodes"}); break;
      case ChannelKind::BiSas:
        check_keys(node, "bi_sas channel", {"kind", "alpha", "sigma", "amplitude", "nodes"});
        break;
    }
    if (node["delta"]) spec.model.delta = real(node["delta"], "channel.delta");
    if (node["snr"]) spec.model.snr = real(node["snr"], "channel.snr");
    if (node["alpha"]) spec.model.alpha = real(node["alpha"], "channel.alpha");
    if (node["sigma"]) spec.model.sigma = real(node["sigma"], "channel.sigma");
    if (node["amplitude"]) spec.model.amplitude = real(node["amplitude"], "channel.amplitude");
    if (node["nodes"]) spec.nodes = count(node["nodes"], "channel.nodes");
    cfg_.channel = spec;
  }

  void validation(const YAML::Node& node) {
    expect_map(node, "validation");
    check_keys(node, "validation", {"enabled", "samples", "seed"});
    Validation v = cfg_.validation.value_or(Validation{});
    bool enabled = true;
    if (node["enabled"]) enabled = boolean(node["enabled"], "validation.enabled");
    if (node["samples"]) v.samples = count(node["samples"], "validation.samples");
    if (node["seed"]) v.seed = static_cast<std::uint64_t>(count(node["seed"], "validation.seed"));
    if (enabled) {
      cfg_.validation = v;
    } else {
      cfg_.validation.reset();
    }
  }

  void output(const YAML::Node& node) {
    expect_map(node, "output");
    check_keys(node, "output", {"path", "format"});
    if (node["path"]) cfg_.out_path = text(node["path"], "output.path");
    if (node["format"]) {
      const std::string f = text(node["format"], "output.format");
      if (f == "csv") {
        cfg_.format = OutputFormat::Csv;
      } else if (f == "json") {
        cfg_.format = OutputFormat::Json;
      } else {
        fail(node["format"], fmt::format("unknown output format '{}' (csv, json)", f));
      }
    }
  }

  void document(const YAML::Node& root) {
    if (root.IsNull()) return;
    expect_map(root, "the document");
    check_keys(root, "the top level",
               {"command", "distribution", "n", "a_grid", "channel", "rate", "n_grid", "validation", "output"});
    if (root["command"]) {
      const std::string c = text(root["command"], "command");
      if (c == "sum-cdf") {
        cfg_.command = Command::SumCdf;
      } else if (c == "dt-curve") {
        cfg_.command = Command::DtCurve;
      } else if (c == "mc-curve") {
        cfg_.command = Command::McCurve;
      } else {
        fail(root["command"], fmt::format("unknown command '{}' (sum-cdf, dt-curve, mc-curve)", c));
      }
    }
    if (root["distribution"]) distribution(root["distribution"]);
    if (root["channel"]) channel(root["channel"]);
    if (root["n"]) cfg_.n = count(root["n"], "n");
    if (root["a_grid"]) cfg_.a_grid = range(root["a_grid"], "a_grid", cfg_.a_grid);
    if (root["n_grid"]) cfg_.n_grid = range(root["n_grid"], "n_grid", cfg_.n_grid);
    if (root["rate"]) cfg_.rate = real(root["rate"], "rate");
    if (root["validation"]) validation(root["validation"]);
    if (root["output"]) output(root["output"]);
  }

 private:
  std::string source_;
  RunConfig& cfg_;
};

[[noreturn]] void invalid(const RunConfig& cfg, const std::string& key, const std::string& message) {
  const auto it = cfg.lines.find(key);
  if (it != cfg.lines.end()) {
    throw Error(ErrorCode::ConfigError, fmt::format("{}:{}: {}: {}", cfg.source, it->second, key, message));
  }
  throw Error(ErrorCode::ConfigError, fmt::format("{}: {}", key, message));
}

void check_range(const RunConfig& cfg, const Range& r, const std::string& key, bool integral) {
  if (!std::isfinite(r.start) || !std::isfinite(r.stop) || !std::isfinite(r.step)) {
    invalid(cfg, key, "start, stop and step must be finite");
  }
  if (!(r.step > 0.0)) invalid(cfg, key, fmt::format("step must be positive, got {}", r.step));
  if (r.stop < r.start) invalid(cfg, key, fmt::format("stop {} is below start {}", r.stop, r.start));
  if ((r.stop - r.start) / r.step + 1.0 > static_cast<double>(kMaxGridPoints)) {
    invalid(cfg, key, fmt::format("more than {} grid points", kMaxGridPoints));
  }
  if (integral) {
    if (r.start < 1.0 || r.start != std::floor(r.start) || r.step != std::floor(r.step)) {
      invalid(cfg, key, "blocklengths must be positive integers");
    }
  }
}

void check_nodes(const RunConfig& cfg, std::size_t nodes, const std::string& key) {
  if (nodes < kMinChannelNodes || nodes > kMaxChannelNodes) {
    invalid(cfg, key, fmt::format("node count {} outside [{}, {}]", nodes, kMinChannelNodes, kMaxChannelNodes));
  }
}

void check_distribution(const RunConfig& cfg, const DistributionSpec& d) {
  switch (d.kind) {
    case LawKind::Bernoulli:
      if (!(d.p > 0.0 && d.p < 1.0)) invalid(cfg, "distribution.p", fmt::format("must lie in (0, 1), got {}", d.p));
      return;
    case LawKind::ChiSquared:
      if (d.dof != 1) invalid(cfg, "distribution.dof", "only one degree of freedom per summand is supported");
      check_nodes(cfg, d.nodes, "distribution.nodes");
      return;
    case LawKind::Gaussian:
      if (!std::isfinite(d.mean)) invalid(cfg, "distribution.mean", "must be finite");
      if (!(d.variance > 0.0) || !std::isfinite(d.variance)) {
        invalid(cfg, "distribution.variance", fmt::format("must be positive, got {}", d.variance));
      }
      check_nodes(cfg, d.nodes, "distribution.nodes");
      return;
    case LawKind::Discrete: {
      if (d.values.size() != d.weights.size()) {
        invalid(cfg, "distribution.weights",
                fmt::format("{} weights for {} values", d.weights.size(), d.values.size()));
      }
      double total = 0.0;
      for (double w : d.weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) invalid(cfg, "distribution.weights", "weights must be finite and >= 0");
        total += w;
      }
      if (!(total > 0.0)) invalid(cfg, "distribution.weights", "weights sum to zero");
      double lo = INFINITY;
      double hi = -INFINITY;
      for (std::size_t i = 0; i < d.values.size(); ++i) {
        if (!std::isfinite(d.values[i])) invalid(cfg, "distribution.values", "values must be finite");
        if (d.weights[i] > 0.0) {
          lo = std::min(lo, d.values[i]);
          hi = std::max(hi, d.values[i]);
        }
      }
      if (!(hi > lo)) invalid(cfg, "distribution.values", "need at least two distinct values with positive weight");
      return;
    }
  }
}

void check_channel(const RunConfig& cfg, const ChannelSpec& c) {
  const ChannelModel& m = c.model;
  switch (m.kind) {
    case ChannelKind::Bsc:
      if (!(m.delta > 0.0 && m.delta < 0.5)) {
        invalid(cfg, "channel.delta", fmt::format("crossover must lie in (0, 0.5), got {}", m.delta));
      }
      return;
    case ChannelKind::BiAwgn:
      if (!(m.snr > 0.0) || !std::isfinite(m.snr)) invalid(cfg, "channel.snr", fmt::format("must be positive, got {}", m.snr));
      break;
    case ChannelKind::BiSas:
      if (!(m.alpha > 0.0 && m.alpha <= 2.0)) {
        invalid(cfg, "channel.alpha", fmt::format("must lie in (0, 2], got {}", m.alpha));
      }
      if (!(m.sigma > 0.0) || !std::isfinite(m.sigma)) {
        invalid(cfg, "channel.sigma", fmt::format("must be positive, got {}", m.sigma));
      }
      if (!(m.amplitude > 0.0) || !std::isfinite(m.amplitude)) {
        invalid(cfg, "channel.amplitude", fmt::format("must be positive, got {}", m.amplitude));
      }
      break;
  }
  check_nodes(cfg, c.nodes, "channel.nodes");
}

std::string num(double v) { return fmt::format("{}", v); }

}  // namespace

RunConfig parse_config(std::string_view yaml_text, const std::string& source, RunConfig base) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::ParserException& e) {
    throw Error(ErrorCode::ConfigError,
                fmt::format("{}:{}:{}: {}", source, e.mark.line + 1, e.mark.column + 1, e.msg));
  }
  base.source = source;
  Reader reader(source, base);
  reader.document(root);
  return base;
}

RunConfig load_config_file(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, fmt::format("cannot read config file '{}'", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path, std::move(base));
}

void validate_config(const RunConfig& cfg) {
  if (cfg.command == Command::SumCdf) {
    if (!cfg.distribution) invalid(cfg, "distribution", "sum-cdf needs a distribution section");
    check_distribution(cfg, *cfg.distribution);
    if (cfg.n < 1) invalid(cfg, "n", "must be at least 1");
    check_range(cfg, cfg.a_grid, "a_grid", false);
  } else {
    if (!cfg.channel) invalid(cfg, "channel", fmt::format("{} needs a channel section", to_string(cfg.command)));
    check_channel(cfg, *cfg.channel);
    if (!(cfg.rate > 0.0) || !std::isfinite(cfg.rate)) {
      invalid(cfg, "rate", fmt::format("must be positive, got {}", cfg.rate));
    }
    check_range(cfg, cfg.n_grid, "n_grid", true);
  }
  if (cfg.validation && cfg.validation->samples < kMinSamples) {
    invalid(cfg, "validation.samples", fmt::format("need at least {} samples", kMinSamples));
  }
}

RunConfig preset_config(std::string_view name) {
  RunConfig cfg;
  cfg.preset = std::string(name);
  if (name == "fig1") {
    cfg.command = Command::SumCdf;
    cfg.distribution.emplace();
    cfg.distribution->kind = LawKind::Bernoulli;
    cfg.distribution->p = 0.2;
    cfg.n = 100;
    cfg.a_grid = {5.0, 35.0, 1.0};
    return cfg;
  }
  if (name == "fig2") {
    cfg.command = Command::SumCdf;
    cfg.distribution.emplace();
    cfg.distribution->kind = LawKind::ChiSquared;
    cfg.distribution->dof = 1;
    cfg.distribution->nodes = 2001;
    cfg.n = 50;
    cfg.a_grid = {0.0, 100.0, 2.0};
    return cfg;
  }
  cfg.n_grid = {100.0, 2000.0, 100.0};
  const bool mc = name.size() == 5 && name[4] == 'b';
  cfg.command = mc ? Command::McCurve : Command::DtCurve;
  if (name == "fig3a" || name == "fig3b") {
    cfg.channel = ChannelSpec{ChannelModel::bsc(0.11), 2};
    cfg.rate = mc ? 0.42 : 0.32;
    return cfg;
  }
  if (name == "fig4a" || name == "fig4b") {
    cfg.channel = ChannelSpec{ChannelModel::bi_awgn(1.0), 2001};
    cfg.rate = 0.425;
    return cfg;
  }
  if (name == "fig5a" || name == "fig5b") {
    cfg.channel = ChannelSpec{ChannelModel::bi_sas(1.4, 0.6), 2001};
    cfg.rate = 0.38;
    return cfg;
  }
  throw Error(ErrorCode::ConfigError, fmt::format("unknown preset '{}'", name));
}

std::string config_to_yaml(const RunConfig& cfg) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "command" << YAML::Value << std::string(to_string(cfg.command));
  if (cfg.command == Command::SumCdf && cfg.distribution) {
    const auto& d = *cfg.distribution;
    out << YAML::Key << "distribution" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "kind" << YAML::Value << std::string(law_name(d.kind));
    switch (d.kind) {
      case LawKind::Bernoulli: out << YAML::Key << "p" << YAML::Value << num(d.p); break;
      case LawKind::ChiSquared:
        out << YAML::Key << "dof" << YAML::Value << d.dof;
        out << YAML::Key << "nodes" << YAML::Value << d.nodes;
        break;
      case LawKind::Gaussian:
        out << YAML::Key << "mean" << YAML::Value << num(d.mean);
        out << YAML::Key << "variance" << YAML::Value << num(d.variance);
        out << YAML::Key << "nodes" << YAML::Value << d.nodes;
        break;
      case LawKind::Discrete:
        out << YAML::Key << "values" << YAML::Value << YAML::Flow << YAML::BeginSeq;
        for (double v : d.values) out << num(v);
        out << YAML::EndSeq;
        out << YAML::Key << "weights" << YAML::Value << YAML::Flow << YAML::BeginSeq;
        for (double w : d.weights) out << num(w);
        out << YAML::EndSeq;
        break;
    }
    out << YAML::EndMap;
    out << YAML::Key << "n" << YAML::Value << cfg.n;
    out << YAML::Key << "a_grid" << YAML::Value << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "start" << YAML::Value << num(cfg.a_grid.start);
    out << YAML::Key << "stop" << YAML::Value << num(cfg.a_grid.stop);
    out << YAML::Key << "step" << YAML::Value << num(cfg.a_grid.step);
    out << YAML::EndMap;
  } else if (cfg.channel) {
    const auto& m = cfg.channel->model;
    out << YAML::Key << "channel" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "kind" << YAML::Value << std::string(channel_name(m.kind));
    switch (m.kind) {
      case ChannelKind::Bsc: out << YAML::Key << "delta" << YAML::Value << num(m.delta); break;
      case ChannelKind::BiAwgn:
        out << YAML::Key << "snr" << YAML::Value << num(m.snr);
        out << YAML::Key << "nodes" << YAML::Value << cfg.channel->nodes;
        break;
      case ChannelKind::BiSas:
        out << YAML::Key << "alpha" << YAML::Value << num(m.alpha);
        out << YAML::Key << "sigma" << YAML::Value << num(m.sigma);
        out << YAML::Key << "amplitude" << YAML::Value << num(m.amplitude);
        out << YAML::Key << "nodes" << YAML::Value << cfg.channel->nodes;
        break;
    }
    out << YAML::EndMap;
    out << YAML::Key << "rate" << YAML::Value << num(cfg.rate);
    out << YAML::Key << "n_grid" << YAML::Value << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "start" << YAML::Value << num(cfg.n_grid.start);
    out << YAML::Key << "stop" << YAML::Value << num(cfg.n_grid.stop);
    out << YAML::Key << "step" << YAML::Value << num(cfg.n_grid.step);
    out << YAML::EndMap;
  }
  if (cfg.validation) {
    out << YAML::Key << "validation" << YAML::Value << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "samples" << YAML::Value << cfg.validation->samples;
    out << YAML::Key << "seed" << YAML::Value << cfg.validation->seed;
    out << YAML::EndMap;
  }
  out << YAML::Key << "output" << YAML::Value << YAML::Flow << YAML::BeginMap;
  out << YAML::Key << "format" << YAML::Value << std::string(to_string(cfg.format));
  out << YAML::EndMap;
  out << YAML::EndMap;
  return out.c_str();
}

}  // namespace certbound::cli
