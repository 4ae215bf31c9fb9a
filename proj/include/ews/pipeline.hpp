#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "ews/eval.hpp"
#include "ews/features.hpp"
#include "ews/models.hpp"
#include "ews/panel_data.hpp"
#include "ews/stress.hpp"

namespace ews {

inline constexpr std::string_view kVersion = "1.0.0";
inline constexpr std::string_view kManifestFormat = "ews-manifest/1";

// Validation grid for the boosted families: learning_rate x max_depth
// (depth-wise) or learning_rate x max_leaves (leaf-wise).
struct TuningConfig {
  bool enabled = true;
  std::vector<double> learning_rates{0.05, 0.1, 0.3};
  std::vector<int> max_depths{2, 4, 6};
  std::vector<int> max_leaves{7, 15, 31};
};

struct ModelsConfig {
  LogisticConfig logistic;
  TreeConfig decision_tree;
  ForestConfig random_forest;
  BoostConfig xgboost = BoostConfig::depth_wise();
  BoostConfig lightgbm = BoostConfig::leaf_wise();
  TuningConfig tuning;
};

struct ReportConfig {
  std::string output_dir = "out";
  double threshold = 0.5;
  int top_k = 5;           // factors per narrative
  int narratives = 10;     // narratives per model
  double drift_threshold = 0.25;
};

struct PipelineConfig {
  std::uint64_t seed = 42;
  GeneratorConfig generator;
  FeatureRecipe recipe = FeatureRecipe::defaults();
  SplitSpec split;
  ModelsConfig models;
  ShockSpec shock;
  ReportConfig report;

  PipelineConfig() { set_seed(seed); }

  // Component seeds follow the global seed: generator = seed, forest =
  // seed + 1, boosting = seed + 2, shock = seed + 3.
  void set_seed(std::uint64_t value);
  // Throws kConfig describing the first violated constraint.
  void validate() const;
};

// JSON document; every section and key is optional. Syntax errors carry the
// line, column and text of the offending line; unknown keys and wrongly typed
// values name their dotted path. All failures are kConfig.
PipelineConfig parse_config(std::string_view text, const std::string& source = "config");
PipelineConfig load_config(const std::filesystem::path& path);
// Fully resolved configuration (defaults filled in), parseable by parse_config.
// Without `with_output_dir` the location-independent part only, as recorded in
// run artifacts.
std::string config_to_json(const PipelineConfig& config, bool with_output_dir = true);

std::string sha256_hex(std::string_view bytes);

struct ModelEntry {
  std::string name;  // e.g. binary_xgboost
  Target target;
  std::string family;
};

// The nine trained models: five binary, four severity.
const std::vector<ModelEntry>& model_roster();

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

// Staged commands over an output directory. Each stage reads only the
// artifacts of earlier stages and throws kDependency naming the first missing
// one.
class Pipeline {
 public:
  using Logger = std::function<void(const std::string&)>;

  Pipeline(PipelineConfig config, std::filesystem::path out_dir, Logger log = {});

  void generate();
  void featurize();
  void train();
  void evaluate();
  void explain();
  void stress();
  void report();
  void run_all();

  // Runs one stage by command name ("generate" ... "report", "run-all") and
  // writes the manifest afterwards.
  void run(const std::string& command);
  void write_manifest() const;

  const std::vector<StageTiming>& timings() const { return timings_; }
  const std::filesystem::path& out_dir() const { return out_; }

 private:
  template <class F>
  void timed(const std::string& stage, F&& body);
  std::filesystem::path require(const std::filesystem::path& relative) const;
  void log(const std::string& message) const;

  PipelineConfig config_;
  std::filesystem::path out_;
  Logger log_;
  std::vector<StageTiming> timings_;
};

const std::vector<std::string>& stage_names();

}  // namespace ews
