#include <cmath>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "certbound/cli.hpp"
#include "certbound/version.hpp"

namespace certbound::cli {
namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string csv_cell(const Cell& cell) {
  if (const auto* v = std::get_if<double>(&cell)) return fmt::format("{:.17g}", *v);
  if (const auto* s = std::get_if<std::string>(&cell)) return csv_field(*s);
  return "";
}

void header_comments(std::ostringstream& out, const RunConfig& cfg) {
  out << "# certbound " << kVersion << '\n';
  out << "# command: " << to_string(cfg.command) << '\n';
  if (!cfg.preset.empty()) out << "# preset: " << cfg.preset << '\n';
  out << "# config:\n";
  std::istringstream yaml(config_to_yaml(cfg));
  for (std::string line; std::getline(yaml, line);) out << "#   " << line << '\n';
}

}  // namespace

std::string to_csv(const RunConfig& cfg, const Table& table) {
  std::ostringstream out;
  header_comments(out, cfg);
  for (std::size_t j = 0; j < table.columns.size(); ++j) out << (j ? "," : "") << csv_field(table.columns[j]);
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << csv_cell(row[j]);
    out << '\n';
  }
  return out.str();
}

std::string to_json(const RunConfig& cfg, const Table& table) {
  nlohmann::ordered_json doc;
  doc["certbound_version"] = std::string(kVersion);
  doc["command"] = std::string(to_string(cfg.command));
  doc["preset"] = cfg.preset.empty() ? nlohmann::ordered_json() : nlohmann::ordered_json(cfg.preset);
  doc["config"] = config_to_yaml(cfg);
  doc["columns"] = table.columns;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t j = 0; j < row.size(); ++j) {
      const Cell& c = row[j];
      if (const auto* v = std::get_if<double>(&c)) {
        obj[table.columns[j]] = std::isfinite(*v) ? nlohmann::ordered_json(*v) : nlohmann::ordered_json();
      } else if (const auto* s = std::get_if<std::string>(&c)) {
        obj[table.columns[j]] = *s;
      } else {
        obj[table.columns[j]] = nullptr;
      }
    }
    rows.push_back(std::move(obj));
  }
  doc["rows"] = std::move(rows);
  return doc.dump(2) + "\n";
}

}  // namespace certbound::cli
