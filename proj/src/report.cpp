#include <algorithm>
#include <cmath>
#include <cstdio>

#include "ews/error.hpp"
#include "pipeline_io.hpp"

namespace ews {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string fmt(double v, const char* spec = "%.4f") {
  char buf[48];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string num(const ordered_json& j) {
  return j.is_number() ? fmt(j.get<double>()) : std::string("NA");
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

std::string family_label(const std::string& family) {
  if (family == "logistic") return "Logistic Regression";
  if (family == "tree") return "Decision Tree";
  if (family == "forest") return "Random Forest";
  if (family == "xgboost") return "XGBoost (depth-wise)";
  if (family == "lightgbm") return "LightGBM (leaf-wise)";
  return family;
}

// A table rendered both as CSV and as an HTML table.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string csv() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + csv_cell(cells[i]);
      out += "\n";
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out;
  }

  std::string html() const {
    std::string out = "<table>\n<tr>";
    for (const auto& h : header) out += "<th>" + escape(h) + "</th>";
    out += "</tr>\n";
    for (const auto& r : rows) {
      out += "<tr>";
      for (const auto& c : r) out += "<td>" + escape(c) + "</td>";
      out += "</tr>\n";
    }
    return out + "</table>\n";
  }
};

ordered_json bar_chart(const std::string& title, const std::vector<std::string>& categories,
                       const std::vector<std::pair<std::string, std::vector<double>>>& series) {
  ordered_json s = ordered_json::array();
  for (const auto& [name, values] : series) s.push_back({{"name", name}, {"values", values}});
  return {{"type", "bar"}, {"title", title}, {"categories", categories}, {"series", s}};
}

// Horizontal CSS bars for one series, scaled to the largest |value|.
std::string html_bars(const std::vector<std::string>& labels, const std::vector<double>& values) {
  double top = 0.0;
  for (double v : values) top = std::max(top, std::abs(v));
  std::string out = "<div class=\"bars\">\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double width = top > 0.0 ? 100.0 * std::abs(values[i]) / top : 0.0;
    out += "<div class=\"bar\"><span class=\"label\">" + escape(labels[i]) +
           "</span><span class=\"fill\" style=\"width:" + fmt(width, "%.1f") + "%\"></span><span>" +
           fmt(values[i]) + "</span></div>\n";
  }
  return out + "</div>\n";
}

const char* kStyle = R"(<style>
body { font-family: sans-serif; max-width: 1100px; margin: 2em auto; color: #222; }
table { border-collapse: collapse; margin: 0.5em 0 1.5em; }
th, td { border: 1px solid #bbb; padding: 3px 8px; text-align: left; }
th { background: #eee; }
.bars { margin: 0.5em 0 1.5em; }
.bar { display: flex; align-items: center; gap: 8px; font-size: 0.9em; }
.bar .label { width: 320px; }
.bar .fill { display: inline-block; height: 12px; background: #4a7ab5; max-width: 400px; }
pre { background: #f6f6f6; padding: 0.6em; white-space: pre-wrap; }
</style>
)";

}  // namespace

void write_report(const ReportInputs& in, const fs::path& dir) {
  try {
    std::string html = "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n"
                       "<title>Household financial distress early warning report</title>\n" +
                       std::string(kStyle) + "</head>\n<body>\n"
                       "<h1>Household financial distress early warning report</h1>\n";
    auto emit = [&](const std::string& name, const Table& t) {
      write_text(dir / "tables" / (name + ".csv"), t.csv());
      html += t.html();
    };
    auto chart = [&](const std::string& name, const ordered_json& doc) {
      write_json(dir / "charts" / (name + ".json"), doc);
    };

    // Data overview.
    html += "<h2>Data overview</h2>\n<p>" + std::to_string(in.eda.at("rows").get<std::size_t>()) +
            " records from " + std::to_string(in.eda.at("households").get<std::size_t>()) +
            " households.</p>\n";
    Table balance{{"round", "rows", "distress_prevalence", "severity_low", "severity_medium", "severity_high"}, {}};
    std::vector<std::string> round_labels;
    std::vector<double> prevalence;
    for (const auto& r : in.eda.at("per_round")) {
      const auto& sc = r.at("severity_counts");
      balance.rows.push_back({std::to_string(r.at("round").get<int>()),
                              std::to_string(r.at("rows").get<std::size_t>()),
                              num(r.at("distress_prevalence")),
                              std::to_string(sc.at("Low").get<std::size_t>()),
                              std::to_string(sc.at("Medium").get<std::size_t>()),
                              std::to_string(sc.at("High").get<std::size_t>())});
      round_labels.push_back("round " + std::to_string(r.at("round").get<int>()));
      prevalence.push_back(r.at("distress_prevalence").get<double>());
    }
    emit("class_balance", balance);
    chart("class_balance", bar_chart("Distress prevalence by round", round_labels, {{"prevalence", prevalence}}));

    Table splits{{"split", "rounds", "rows"}, {}};
    const auto& split_rounds = in.evaluation.at("split_rounds");
    for (const char* name : {"train", "validation", "test"}) {
      std::string rounds;
      std::size_t rows = 0;
      for (const auto& r : split_rounds.at(name)) {
        rounds += (rounds.empty() ? "" : " ") + std::to_string(r.get<int>());
        for (const auto& pr : in.eda.at("per_round")) {
          if (pr.at("round") == r) rows += pr.at("rows").get<std::size_t>();
        }
      }
      splits.rows.push_back({name, rounds, std::to_string(rows)});
    }
    html += "<h3>Temporal split</h3>\n";
    emit("split_sizes", splits);

    html += "<h3>Indicator distributions</h3>\n";
    Table numeric{{"indicator", "count", "mean", "sd", "skewness", "min", "max"}, {}};
    for (const auto& s : in.eda.at("numeric")) {
      numeric.rows.push_back({s.at("name").get<std::string>(), std::to_string(s.at("count").get<std::size_t>()),
                              num(s.at("mean")), num(s.at("sd")), num(s.at("skewness")), num(s.at("min")),
                              num(s.at("max"))});
    }
    emit("indicator_summary", numeric);

    html += "<h3>Correlation with the distress label</h3>\n";
    const auto& columns = in.eda.at("correlation").at("columns");
    const auto& matrix = in.eda.at("correlation").at("matrix");
    std::size_t distress_col = columns.size();
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i] == "distress_label") distress_col = i;
    }
    if (distress_col < columns.size()) {
      Table corr{{"column", "correlation"}, {}};
      for (std::size_t i = 0; i < columns.size(); ++i) {
        if (i == distress_col) continue;
        corr.rows.push_back({columns[i].get<std::string>(), num(matrix[i][distress_col])});
      }
      emit("distress_correlation", corr);
    }

    // Baseline models.
    html += "<h2>Baseline models (validation split)</h2>\n<h3>Financial distress (binary)</h3>\n";
    Table binary{{"model", "label", "roc_auc", "pr_auc"}, {}};
    Table severity{{"model", "label", "accuracy"}, {}};
    Table holdout{{"model", "task", "metric", "validation", "test"}, {}};
    Table calibration{{"model", "split", "platt_a", "platt_b", "raw_brier", "calibrated_brier",
                       "raw_roc_auc", "calibrated_roc_auc"}, {}};
    std::vector<std::string> binary_names, severity_names;
    std::vector<double> roc, pr, acc;
    for (const auto& m : in.evaluation.at("models")) {
      const std::string name = m.at("name").get<std::string>();
      const std::string label = family_label(m.at("family").get<std::string>());
      const auto& val = m.at("splits").at("validation");
      const auto& test = m.at("splits").at("test");
      if (m.at("task") == "binary") {
        binary.rows.push_back({name, label, num(val.at("roc_auc")), num(val.at("pr_auc"))});
        binary_names.push_back(label);
        roc.push_back(val.at("roc_auc").get<double>());
        pr.push_back(val.at("pr_auc").get<double>());
        for (const char* metric : {"roc_auc", "pr_auc", "brier"}) {
          holdout.rows.push_back({name, "binary", metric, num(val.at(metric)), num(test.at(metric))});
        }
        const auto& cal = m.at("calibration");
        std::vector<std::pair<std::string, std::vector<double>>> curves;
        std::vector<std::string> bin_labels;
        for (const char* split : {"validation", "test"}) {
          const auto& c = cal.at(split);
          calibration.rows.push_back({name, split, num(cal.at("a")), num(cal.at("b")),
                                      num(c.at("raw").at("brier")), num(c.at("calibrated").at("brier")),
                                      num(c.at("raw").at("roc_auc")), num(c.at("calibrated").at("roc_auc"))});
        }
        for (const char* kind : {"raw", "calibrated"}) {
          std::vector<double> observed;
          bin_labels.clear();
          for (const auto& b : cal.at("validation").at(kind).at("bins")) {
            bin_labels.push_back(fmt(b.at("lower").get<double>(), "%.1f") + "-" +
                                 fmt(b.at("upper").get<double>(), "%.1f"));
            observed.push_back(b.at("count").get<std::size_t>() > 0 ? b.at("observed").get<double>() : 0.0);
          }
          curves.emplace_back(std::string(kind) + " observed rate", observed);
        }
        chart("calibration_" + name, bar_chart("Reliability (validation) - " + label, bin_labels, curves));
      } else {
        severity.rows.push_back({name, label, num(val.at("accuracy"))});
        severity_names.push_back(label);
        acc.push_back(val.at("accuracy").get<double>());
        for (const char* metric : {"accuracy", "macro_f1"}) {
          holdout.rows.push_back({name, "severity", metric, num(val.at(metric)), num(test.at(metric))});
        }
      }
    }
    emit("binary_models", binary);
    html += html_bars(binary_names, roc);
    chart("binary_metrics", bar_chart("Binary models (validation)", binary_names,
                                      {{"ROC-AUC", roc}, {"PR-AUC", pr}}));
    html += "<h3>Distress severity (multi-class)</h3>\n";
    emit("severity_models", severity);
    html += html_bars(severity_names, acc);
    chart("severity_accuracy", bar_chart("Severity models (validation)", severity_names, {{"accuracy", acc}}));
    html += "<h3>Validation and test metrics</h3>\n";
    emit("holdout_metrics", holdout);
    html += "<h3>Platt calibration</h3>\n";
    emit("calibration", calibration);

    // Explanations.
    html += "<h2>Explanations (SHAP, validation split)</h2>\n";
    Table importance{{"model", "rank", "feature", "mean_abs_contribution"}, {}};
    std::string narratives_html;
    for (const auto& m : in.explain.at("models")) {
      const std::string name = m.at("name").get<std::string>();
      std::vector<std::string> features;
      std::vector<double> values;
      int rank = 1;
      for (const auto& f : m.at("top_features")) {
        features.push_back(f.at("feature").get<std::string>());
        values.push_back(f.at("mean_abs_contribution").get<double>());
        importance.rows.push_back({name, std::to_string(rank++), features.back(), fmt(values.back(), "%.6f")});
      }
      chart("shap_" + name, bar_chart("Mean |SHAP| - " + name, features, {{"mean_abs_contribution", values}}));
      html += "<h4>" + escape(name) + " (" + escape(m.at("output_space").get<std::string>()) + " space)</h4>\n";
      html += html_bars(features, values);
      const auto it = in.narratives.find(name);
      if (it != in.narratives.end()) {
        const bool open = name.find("xgboost") != std::string::npos;
        narratives_html += std::string("<details") + (open ? " open" : "") + "><summary>" + escape(name) +
                           "</summary>\n<pre>" + escape(it->second) + "</pre></details>\n";
      }
    }
    html += "<h3>Global importance</h3>\n";
    emit("feature_importance", importance);
    html += "<h3>Narratives</h3>\n" + narratives_html;

    // Robustness.
    html += "<h2>Robustness</h2>\n";
    const auto& spec = in.stress.at("spec");
    std::string columns_text;
    for (const auto& c : spec.at("target_columns")) {
      columns_text += (columns_text.empty() ? "" : ", ") + c.get<std::string>();
    }
    html += "<p>Shock: " + escape(spec.at("mode").get<std::string>()) + ", magnitude " +
            num(spec.at("magnitude")) + ", direction " + escape(spec.at("direction").get<std::string>()) +
            ", columns " + escape(columns_text) + ".</p>\n";
    Table stress{{"model", "metric", "original", "shocked", "delta"}, {}};
    std::vector<std::string> delta_labels;
    std::vector<double> deltas;
    for (const auto& m : in.stress.at("models")) {
      const std::string name = m.at("name").get<std::string>();
      for (const auto& [metric, delta] : m.at("deltas").items()) {
        stress.rows.push_back({name, metric, num(m.at("original").at(metric)),
                               num(m.at("shocked").at(metric)), num(delta)});
        if (metric == "roc_auc" || metric == "accuracy") {
          delta_labels.push_back(name + " " + metric);
          deltas.push_back(delta.get<double>());
        }
      }
    }
    emit("stress", stress);
    chart("stress_deltas", bar_chart("Metric change under shock", delta_labels, {{"delta", deltas}}));

    html += "<h3>Drift (PSI against training rounds, threshold " + num(in.drift.at("threshold")) + ")</h3>\n";
    Table drift{{"comparison", "feature", "psi", "flagged"}, {}};
    Table retrain{{"comparison", "flagged_features", "retrain_recommended"}, {}};
    for (const auto& c : in.drift.at("comparisons")) {
      const std::string name = c.at("name").get<std::string>();
      const auto& flagged = c.at("flagged");
      for (const auto& [feature, value] : c.at("psi").items()) {
        const bool is_flagged = std::find(flagged.begin(), flagged.end(), feature) != flagged.end();
        drift.rows.push_back({name, feature, num(value), is_flagged ? "yes" : "no"});
      }
      std::string list;
      for (const auto& f : flagged) list += (list.empty() ? "" : " ") + f.get<std::string>();
      retrain.rows.push_back({name, list.empty() ? "-" : list,
                              c.at("retrain_recommended").get<bool>() ? "yes" : "no"});
    }
    emit("retraining", retrain);
    emit("drift", drift);

    html += "</body>\n</html>\n";
    write_text(dir / "index.html", html);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, "report input: " + std::string(e.what()));
  }
}

}  // namespace ews
