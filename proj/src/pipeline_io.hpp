#pragma once

// Artifact helpers shared by the pipeline stages and the report writer.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "ews/models.hpp"
#include "ews/panel_data.hpp"

namespace ews {

// Creates parent directories; kIo on failure.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);
// Two-space indented, trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& doc);
// kParse on malformed documents.
nlohmann::ordered_json read_json(const std::filesystem::path& path);

nlohmann::ordered_json eda_json(const PanelDataset& data, const EdaSummary& eda);

struct RegistryEntry {
  std::string name;
  Target target;
  std::string family;
  std::filesystem::path file;  // relative to the output directory
};

std::vector<RegistryEntry> load_registry(const std::filesystem::path& path);

struct ReportInputs {
  nlohmann::ordered_json eda;
  nlohmann::ordered_json evaluation;
  nlohmann::ordered_json explain;
  nlohmann::ordered_json stress;
  nlohmann::ordered_json drift;
  std::map<std::string, std::string> narratives;  // model name -> narrative text
};

// index.html, tables/*.csv and charts/*.json under `dir`, built from the
// serialized artifacts only.
void write_report(const ReportInputs& in, const std::filesystem::path& dir);

}  // namespace ews
