#include "pipeline_io.hpp"

#include <fstream>
#include <sstream>

#include "ews/error.hpp"

namespace ews {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

void write_text(const fs::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_json(const fs::path& path, const ordered_json& doc) { write_text(path, doc.dump(2) + "\n"); }

ordered_json read_json(const fs::path& path) {
  try {
    return ordered_json::parse(read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
}

ordered_json eda_json(const PanelDataset& data, const EdaSummary& eda) {
  ordered_json per_round = ordered_json::array();
  for (int r : data.rounds()) {
    std::size_t rows = 0, distress = 0;
    std::size_t severity[3] = {0, 0, 0};
    for (const auto& rec : data.records) {
      if (rec.round != r) continue;
      ++rows;
      distress += rec.distress_label;
      ++severity[static_cast<int>(rec.severity_label)];
    }
    per_round.push_back({{"round", r},
                         {"rows", rows},
                         {"distress_prevalence", static_cast<double>(distress) / rows},
                         {"severity_counts",
                          {{"Low", severity[0]}, {"Medium", severity[1]}, {"High", severity[2]}}}});
  }
  ordered_json numeric = ordered_json::array();
  for (const auto& s : eda.numeric) {
    numeric.push_back({{"name", s.name},
                       {"count", s.count},
                       {"mean", s.mean},
                       {"sd", s.sd},
                       {"skewness", s.skewness},
                       {"min", s.min},
                       {"max", s.max},
                       {"histogram", {{"lo", s.histogram_lo}, {"hi", s.histogram_hi}, {"counts", s.histogram}}}});
  }
  ordered_json categorical = ordered_json::object();
  for (const auto& [column, counts] : eda.categorical) categorical[column] = counts;
  ordered_json matrix = ordered_json::array();
  for (const auto& row : eda.correlation) {
    ordered_json r = ordered_json::array();
    for (const auto& v : row) r.push_back(v ? ordered_json(*v) : ordered_json(nullptr));
    matrix.push_back(r);
  }
  std::size_t households = 0;
  for (std::size_t i = 0; i < data.records.size(); ++i) {
    if (i == 0 || data.records[i].household_id != data.records[i - 1].household_id) ++households;
  }
  return {{"format", "ews-eda/1"},
          {"rows", data.size()},
          {"households", households},
          {"per_round", per_round},
          {"numeric", numeric},
          {"categorical", categorical},
          {"correlation", {{"columns", eda.correlation_columns}, {"matrix", matrix}}}};
}

std::vector<RegistryEntry> load_registry(const fs::path& path) {
  const ordered_json doc = read_json(path);
  std::vector<RegistryEntry> out;
  try {
    for (const auto& m : doc.at("models")) {
      const std::string task = m.at("task").get<std::string>();
      if (task != "binary" && task != "severity") {
        throw Error(ErrorCode::kParse, path.string() + ": unknown task '" + task + "'");
      }
      out.push_back({m.at("name").get<std::string>(),
                     task == "binary" ? Target::kBinary : Target::kSeverity,
                     m.at("family").get<std::string>(), fs::path(m.at("file").get<std::string>())});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
  return out;
}

}  // namespace ews
