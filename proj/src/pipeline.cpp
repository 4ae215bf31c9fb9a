#include "ews/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "ews/error.hpp"
#include "ews/explain.hpp"
#include "pipeline_io.hpp"

namespace ews {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct SplitPaths {
  const char* name;
  const char* file;
};
constexpr SplitPaths kSplits[] = {{"train", "features/train.csv"},
                                  {"validation", "features/validation.csv"},
                                  {"test", "features/test.csv"}};

ordered_json rounds_json(const std::set<int>& rounds) { return ordered_json(rounds); }

// ---------------------------------------------------------------------------
// Training

struct GridPoint {
  double learning_rate;
  int size;  // max_depth (depth-wise) or max_leaves (leaf-wise)
  double score;
};

struct Trained {
  Model model;
  std::vector<GridPoint> grid;
};

double selection_score(const Model& model, const FeatureMatrix& validation, Target target) {
  if (target == Target::kBinary) {
    return pr_auc(predict_positive(model, validation.values), validation.target_binary);
  }
  return accuracy(predict_class(model, validation.values), validation.target_severity);
}

// Grid points in learning-rate-major order; the first best score wins ties.
Trained tune_boosted(const BoostConfig& base, const TuningConfig& tuning, const FeatureMatrix& train,
                     const FeatureMatrix& validation, Target target) {
  if (!tuning.enabled) return {train_gbdt(train, target, base), {}};
  const bool leaf = base.growth == Growth::kLeafWise;
  const auto& sizes = leaf ? tuning.max_leaves : tuning.max_depths;
  std::optional<Trained> best;
  double best_score = -1.0;
  std::vector<GridPoint> grid;
  for (double lr : tuning.learning_rates) {
    for (int size : sizes) {
      BoostConfig cfg = base;
      cfg.learning_rate = lr;
      (leaf ? cfg.max_leaves : cfg.max_depth) = size;
      Model model = train_gbdt(train, target, cfg);
      const double score = selection_score(model, validation, target);
      grid.push_back({lr, size, score});
      if (!best || score > best_score) {
        best_score = score;
        best = Trained{std::move(model), {}};
      }
    }
  }
  best->grid = std::move(grid);
  return std::move(*best);
}

Trained train_entry(const ModelEntry& entry, const ModelsConfig& cfg, const FeatureMatrix& train,
                    const FeatureMatrix& validation) {
  if (entry.family == "logistic") return {train_logistic(train, cfg.logistic), {}};
  if (entry.family == "tree") return {train_tree(train, entry.target, cfg.decision_tree), {}};
  if (entry.family == "forest") return {train_forest(train, entry.target, cfg.random_forest), {}};
  const BoostConfig& base = entry.family == "xgboost" ? cfg.xgboost : cfg.lightgbm;
  return tune_boosted(base, cfg.tuning, train, validation, entry.target);
}

// ---------------------------------------------------------------------------
// Metric blocks

ordered_json binary_block(const BinaryMetrics& m) {
  return {{"n", m.n},
          {"prevalence", m.prevalence},
          {"roc_auc", m.roc_auc},
          {"pr_auc", m.pr_auc},
          {"brier", m.brier},
          {"log_loss", m.log_loss},
          {"threshold", m.threshold},
          {"confusion", {{"tp", m.confusion.tp}, {"fp", m.confusion.fp},
                         {"tn", m.confusion.tn}, {"fn", m.confusion.fn}}}};
}

ordered_json severity_block(const MultiClassMetrics& m) {
  ordered_json per_class = ordered_json::array();
  for (std::size_t k = 0; k < m.per_class.size(); ++k) {
    const auto& s = m.per_class[k];
    per_class.push_back({{"label", level_name(static_cast<Level>(k))},
                         {"precision", s.precision},
                         {"recall", s.recall},
                         {"f1", s.f1},
                         {"support", s.support}});
  }
  return {{"n", m.n},
          {"accuracy", m.accuracy},
          {"macro_f1", m.macro_f1},
          {"per_class", per_class},
          {"confusion", m.confusion}};
}

ordered_json bins_json(const std::vector<CalibrationBin>& bins) {
  ordered_json out = ordered_json::array();
  for (std::size_t b = 0; b < bins.size(); ++b) {
    out.push_back({{"lower", b / 10.0},
                   {"upper", (b + 1) / 10.0},
                   {"mean_predicted", bins[b].mean_predicted},
                   {"observed", bins[b].observed},
                   {"count", bins[b].count}});
  }
  return out;
}

ordered_json probability_block(std::span<const double> p, std::span<const int> y) {
  return {{"roc_auc", roc_auc(p, y)},
          {"pr_auc", pr_auc(p, y)},
          {"brier", brier(p, y)},
          {"log_loss", log_loss(p, y)},
          {"bins", bins_json(calibration_bins(p, y))}};
}

std::vector<double> margin_column(const Model& model, const Matrix& rows) {
  return predict_margin(model, rows).column(0);
}

// ---------------------------------------------------------------------------
// Explanations

// Rows ranked for narratives: highest explained class first (severity), then
// the largest explained margin, then key order.
std::vector<std::size_t> narrative_order(const ShapSet& set) {
  std::vector<std::size_t> order(set.rows.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& x = set.rows[a];
    const auto& y = set.rows[b];
    if (x.explained_class != y.explained_class) return x.explained_class > y.explained_class;
    return x.predicted_margin > y.predicted_margin;
  });
  return order;
}

std::string class_label(Target target, int k) {
  if (target == Target::kBinary) return k == 1 ? "distress" : "no distress";
  return std::string(level_name(static_cast<Level>(k)));
}

ordered_json drift_json(const std::string& name, const std::set<int>& rounds, const DriftReport& r) {
  ordered_json psi = ordered_json::object();
  for (const auto& [feature, value] : r.psi) psi[feature] = value;
  return {{"name", name},
          {"rounds", rounds_json(rounds)},
          {"psi", psi},
          {"flagged", r.flagged},
          {"retrain_recommended", r.retrain_recommended}};
}

ordered_json shock_json(const ShockSpec& s) {
  return {{"target_columns", s.target_columns},
          {"mode", shock_mode_name(s.mode)},
          {"magnitude", s.magnitude},
          {"seed", s.seed},
          {"direction", shock_direction_name(s.direction)}};
}

}  // namespace

const std::vector<ModelEntry>& model_roster() {
  static const std::vector<ModelEntry> roster = {
      {"binary_logistic", Target::kBinary, "logistic"},
      {"binary_decision_tree", Target::kBinary, "tree"},
      {"binary_random_forest", Target::kBinary, "forest"},
      {"binary_xgboost", Target::kBinary, "xgboost"},
      {"binary_lightgbm", Target::kBinary, "lightgbm"},
      {"severity_decision_tree", Target::kSeverity, "tree"},
      {"severity_random_forest", Target::kSeverity, "forest"},
      {"severity_xgboost", Target::kSeverity, "xgboost"},
      {"severity_lightgbm", Target::kSeverity, "lightgbm"},
  };
  return roster;
}

const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> names = {"generate", "featurize", "train",  "evaluate",
                                                 "explain",  "stress",    "report"};
  return names;
}

Pipeline::Pipeline(PipelineConfig config, fs::path out_dir, Logger log)
    : config_(std::move(config)), out_(std::move(out_dir)), log_(std::move(log)) {
  config_.validate();
}

void Pipeline::log(const std::string& message) const {
  if (log_) log_(message);
}

fs::path Pipeline::require(const fs::path& relative) const {
  const fs::path path = out_ / relative;
  if (!fs::exists(path)) {
    throw Error(ErrorCode::kDependency, "missing input artifact " + path.string());
  }
  return path;
}

template <class F>
void Pipeline::timed(const std::string& stage, F&& body) {
  log("[" + stage + "] start");
  const auto t0 = std::chrono::steady_clock::now();
  body();
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  timings_.push_back({stage, seconds});
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", seconds);
  log("[" + stage + "] done in " + buf + " s");
}

void Pipeline::generate() {
  timed("generate", [&] {
    write_text(out_ / "config.json", config_to_json(config_, false));
    const fs::path panel = out_ / "panel.csv";
    write_text(panel, format_panel_csv(generate_synthetic(config_.generator)));
    const PanelDataset data = read_panel_csv(panel);
    write_json(out_ / "eda.json", eda_json(data, summarize(data)));
    log("wrote " + std::to_string(data.size()) + " records");
  });
}

void Pipeline::featurize() {
  timed("featurize", [&] {
    const PanelDataset data = read_panel_csv(require("panel.csv"));
    try {
      config_.recipe.validate(data.max_round());
    } catch (const Error& e) {
      throw Error(ErrorCode::kConfig, std::string("features: ") + e.what());
    }
    const TransformState state = fit_transforms(data, config_.recipe, config_.split.train_rounds);
    const FeatureMatrix matrix = build_feature_matrix(state, data);
    for (const auto& w : matrix.warnings) log("warning: " + w);
    const TemporalSplit split = temporal_split(matrix, config_.split);
    write_text(out_ / kSplits[0].file, format_feature_csv(split.train));
    write_text(out_ / kSplits[1].file, format_feature_csv(split.validation));
    write_text(out_ / kSplits[2].file, format_feature_csv(split.test));
    write_text(out_ / "transform_state.json", transform_state_to_json(state));
    log(std::to_string(matrix.cols()) + " features; rows train/validation/test " +
        std::to_string(split.train.rows()) + "/" + std::to_string(split.validation.rows()) + "/" +
        std::to_string(split.test.rows()));
  });
}

void Pipeline::train() {
  timed("train", [&] {
    const FeatureMatrix train = read_feature_csv(require(kSplits[0].file));
    const FeatureMatrix validation = read_feature_csv(require(kSplits[1].file));
    // Drop files from earlier runs so the registry describes the directory.
    fs::remove_all(out_ / "models");
    ordered_json models = ordered_json::array();
    for (const auto& entry : model_roster()) {
      Trained t = train_entry(entry, config_.models, train, validation);
      const std::string text = model_to_json(t.model);
      const std::string hash = sha256_hex(text);
      const std::string file = "models/" + entry.name + "-" + hash.substr(0, 12) + ".json";
      write_text(out_ / file, text);
      ordered_json record = {{"name", entry.name},
                             {"task", target_name(entry.target)},
                             {"family", entry.family},
                             {"file", file},
                             {"sha256", hash}};
      if (!t.grid.empty()) {
        const bool leaf = entry.family == "lightgbm";
        ordered_json grid = ordered_json::array();
        std::size_t selected = 0;
        for (std::size_t i = 0; i < t.grid.size(); ++i) {
          grid.push_back({{"learning_rate", t.grid[i].learning_rate},
                          {leaf ? "max_leaves" : "max_depth", t.grid[i].size},
                          {"score", t.grid[i].score}});
          if (t.grid[i].score > t.grid[selected].score) selected = i;
        }
        record["tuning"] = {{"metric", entry.target == Target::kBinary ? "pr_auc" : "accuracy"},
                            {"split", "validation"},
                            {"grid", grid},
                            {"selected", selected}};
      }
      models.push_back(record);
      log("trained " + entry.name);
    }
    write_json(out_ / "models/registry.json",
               {{"format", "ews-registry/1"}, {"models", models}});
  });
}

void Pipeline::evaluate() {
  timed("evaluate", [&] {
    const auto registry = load_registry(require("models/registry.json"));
    std::vector<FeatureMatrix> splits;
    for (const auto& s : kSplits) splits.push_back(read_feature_csv(require(s.file)));
    const double threshold = config_.report.threshold;

    ordered_json models = ordered_json::array();
    for (const auto& r : registry) {
      const Model model = load_model(require(r.file));
      ordered_json blocks = ordered_json::object();
      for (std::size_t i = 0; i < splits.size(); ++i) {
        const auto& fm = splits[i];
        if (r.target == Target::kBinary) {
          blocks[kSplits[i].name] =
              binary_block(binary_metrics(predict_positive(model, fm.values), fm.target_binary, threshold));
        } else {
          blocks[kSplits[i].name] =
              severity_block(multiclass_metrics(predict_class(model, fm.values), fm.target_severity));
        }
      }
      ordered_json record = {{"name", r.name},
                             {"task", target_name(r.target)},
                             {"family", r.family},
                             {"file", r.file.generic_string()},
                             {"splits", blocks}};
      if (r.target == Target::kBinary) {
        const auto& val = splits[1];
        const auto& test = splits[2];
        const PlattCalibrator cal = fit_platt(margin_column(model, val.values), val.target_binary);
        ordered_json cblock = {{"method", "platt"}, {"fitted_on", "validation"}, {"a", cal.a}, {"b", cal.b}};
        for (std::size_t i : {std::size_t{1}, std::size_t{2}}) {
          const auto& fm = i == 1 ? val : test;
          const auto raw = predict_positive(model, fm.values);
          const auto calibrated = apply_platt(cal, margin_column(model, fm.values));
          cblock[kSplits[i].name] = {{"raw", probability_block(raw, fm.target_binary)},
                                     {"calibrated", probability_block(calibrated, fm.target_binary)}};
        }
        record["calibration"] = cblock;
      }
      models.push_back(record);
    }
    write_json(out_ / "evaluation.json", {{"format", "ews-evaluation/1"},
                                          {"threshold", threshold},
                                          {"split_rounds",
                                           {{"train", rounds_json(config_.split.train_rounds)},
                                            {"validation", rounds_json(config_.split.validation_rounds)},
                                            {"test", rounds_json(config_.split.test_rounds)}}},
                                          {"models", models}});
  });
}

void Pipeline::explain() {
  timed("explain", [&] {
    const auto registry = load_registry(require("models/registry.json"));
    const FeatureMatrix train = read_feature_csv(require(kSplits[0].file));
    const FeatureMatrix validation = read_feature_csv(require(kSplits[1].file));
    const int top_k = config_.report.top_k;

    ordered_json summary = ordered_json::array();
    for (const auto& r : registry) {
      const Model model = load_model(require(r.file));
      const ShapSet set = explain_model(model, validation, train.values);
      const std::string stem = "explain/" + r.name;
      write_text(out_ / (stem + "_attributions.csv"), format_attributions_csv(set));

      const auto importance = global_importance(set);
      ordered_json ranking = ordered_json::array();
      for (const auto& [feature, value] : importance) {
        ranking.push_back({{"feature", feature}, {"mean_abs_contribution", value}});
      }
      write_json(out_ / (stem + "_importance.json"),
                 {{"model", r.name},
                  {"task", target_name(r.target)},
                  {"family", set.model_family},
                  {"output_space", set.output_space},
                  {"split", "validation"},
                  {"rows", set.rows.size()},
                  {"importance", ranking}});

      std::string text;
      const auto order = narrative_order(set);
      const std::size_t n = std::min<std::size_t>(order.size(), config_.report.narratives);
      for (std::size_t i = 0; i < n; ++i) {
        const auto& attr = set.rows[order[i]];
        const Narrative nar =
            render_narrative(attr, set.feature_names, validation.values.row(order[i]), top_k);
        text += nar.summary + " [" + class_label(r.target, attr.explained_class) + "]\n";
        for (const auto& f : nar.top_factors) text += "  - " + f.phrase + "\n";
      }
      write_text(out_ / (stem + "_narratives.txt"), text);

      ordered_json top = ordered_json::array();
      for (std::size_t i = 0; i < importance.size() && i < static_cast<std::size_t>(top_k); ++i) {
        top.push_back({{"feature", importance[i].first}, {"mean_abs_contribution", importance[i].second}});
      }
      summary.push_back({{"name", r.name},
                         {"task", target_name(r.target)},
                         {"output_space", set.output_space},
                         {"top_features", top}});
      log("explained " + r.name);
    }
    write_json(out_ / "explain/summary.json",
               {{"format", "ews-explain/1"}, {"split", "validation"}, {"top_k", top_k}, {"models", summary}});
  });
}

void Pipeline::stress() {
  timed("stress", [&] {
    const PanelDataset data = read_panel_csv(require("panel.csv"));
    const TransformState state = transform_state_from_json(read_text(require("transform_state.json")));
    const auto registry = load_registry(require("models/registry.json"));
    const auto& rounds = config_.split.validation_rounds;

    ordered_json models = ordered_json::array();
    for (const auto& r : registry) {
      const Model model = load_model(require(r.file));
      const StressReport rep = run_stress(model, r.name, r.target, data, rounds, config_.shock, state, true);
      models.push_back({{"name", r.name},
                        {"task", target_name(r.target)},
                        {"family", r.family},
                        {"original", rep.original},
                        {"shocked", rep.shocked},
                        {"deltas", rep.deltas}});
    }
    write_json(out_ / "stress/stress_report.json", {{"format", "ews-stress/1"},
                                                    {"rounds", rounds_json(rounds)},
                                                    {"spec", shock_json(config_.shock)},
                                                    {"models", models}});

    const double threshold = config_.report.drift_threshold;
    const auto reference = records_in_rounds(data, config_.split.train_rounds);
    const PanelDataset shocked = apply_shock(data, rounds, config_.shock, state);
    ordered_json comparisons = ordered_json::array();
    comparisons.push_back(drift_json("validation", rounds,
                                     drift_check(reference, records_in_rounds(data, rounds), threshold)));
    comparisons.push_back(drift_json(
        "test", config_.split.test_rounds,
        drift_check(reference, records_in_rounds(data, config_.split.test_rounds), threshold)));
    comparisons.push_back(drift_json("shocked_validation", rounds,
                                     drift_check(reference, records_in_rounds(shocked, rounds), threshold)));
    write_json(out_ / "stress/drift_report.json", {{"format", "ews-drift/1"},
                                                   {"threshold", threshold},
                                                   {"reference_rounds", rounds_json(config_.split.train_rounds)},
                                                   {"comparisons", comparisons}});
  });
}

void Pipeline::report() {
  timed("report", [&] {
    ReportInputs in;
    in.eda = read_json(require("eda.json"));
    in.evaluation = read_json(require("evaluation.json"));
    in.explain = read_json(require("explain/summary.json"));
    in.stress = read_json(require("stress/stress_report.json"));
    in.drift = read_json(require("stress/drift_report.json"));
    for (const auto& m : in.explain.at("models")) {
      const std::string name = m.at("name").get<std::string>();
      in.narratives[name] = read_text(require("explain/" + name + "_narratives.txt"));
    }
    write_report(in, out_ / "report");
  });
}

void Pipeline::run_all() {
  generate();
  featurize();
  train();
  evaluate();
  explain();
  stress();
  report();
}

void Pipeline::run(const std::string& command) {
  if (command == "run-all") run_all();
  else if (command == "generate") generate();
  else if (command == "featurize") featurize();
  else if (command == "train") train();
  else if (command == "evaluate") evaluate();
  else if (command == "explain") explain();
  else if (command == "stress") stress();
  else if (command == "report") report();
  else throw Error(ErrorCode::kConfig, "unknown command '" + command + "'");
  write_manifest();
}

void Pipeline::write_manifest() const {
  ordered_json artifacts = ordered_json::array();
  std::vector<fs::path> files;
  if (fs::exists(out_)) {
    for (const auto& e : fs::recursive_directory_iterator(out_)) {
      if (e.is_regular_file()) files.push_back(fs::relative(e.path(), out_));
    }
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    if (f == "manifest.json") continue;
    const std::string bytes = read_text(out_ / f);
    artifacts.push_back({{"path", f.generic_string()}, {"bytes", bytes.size()}, {"sha256", sha256_hex(bytes)}});
  }
  ordered_json stages = ordered_json::array();
  for (const auto& t : timings_) stages.push_back({{"stage", t.stage}, {"seconds", t.seconds}});
  write_json(out_ / "manifest.json",
             {{"format", kManifestFormat},
              {"version", kVersion},
              {"config_sha256", sha256_hex(config_to_json(config_, false))},
              {"schemas",
               {{"panel", kPanelSchemaVersion},
                {"model", kModelFormat},
                {"transform_state", kTransformStateFormat}}},
              {"stages", stages},
              {"artifacts", artifacts}});
}

}  // namespace ews
