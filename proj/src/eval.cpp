#include "ews/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ews/error.hpp"

namespace ews {

namespace {

std::string round_list(const std::set<int>& rounds) {
  std::string out = "{";
  for (int r : rounds) out += (out.size() > 1 ? "," : "") + std::to_string(r);
  return out + "}";
}

void check_lengths(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw Error(ErrorCode::kShape, std::string(what) + ": " + std::to_string(a) + " scores vs " +
                                       std::to_string(b) + " labels");
  }
}

void check_binary(std::span<const int> labels, const char* what) {
  for (int y : labels) {
    if (y != 0 && y != 1) throw Error(ErrorCode::kDomain, std::string(what) + ": labels must be 0/1");
  }
}

void check_probabilities(std::span<const double> p, const char* what) {
  for (double v : p) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorCode::kDomain, std::string(what) + ": probability outside [0, 1]");
    }
  }
}

}  // namespace

void SplitSpec::validate() const {
  if (train_rounds.empty()) throw Error(ErrorCode::kConfig, "split: train_rounds is empty");
  auto disjoint = [](const std::set<int>& a, const std::set<int>& b) {
    return std::none_of(a.begin(), a.end(), [&](int r) { return b.contains(r); });
  };
  if (!disjoint(train_rounds, validation_rounds) || !disjoint(train_rounds, test_rounds) ||
      !disjoint(validation_rounds, test_rounds)) {
    throw Error(ErrorCode::kConfig, "split: round sets overlap");
  }
  auto before = [](const std::set<int>& a, const std::set<int>& b) {
    return a.empty() || b.empty() || *a.rbegin() < *b.begin();
  };
  if (!before(train_rounds, validation_rounds) || !before(train_rounds, test_rounds) ||
      !before(validation_rounds, test_rounds)) {
    throw Error(ErrorCode::kConfig, "split: rounds out of temporal order (train " +
                                        round_list(train_rounds) + ", validation " +
                                        round_list(validation_rounds) + ", test " +
                                        round_list(test_rounds) + ")");
  }
}

TemporalSplit temporal_split(const FeatureMatrix& matrix, const SplitSpec& spec) {
  spec.validate();
  std::set<int> present;
  for (const auto& k : matrix.keys) present.insert(k.round);
  for (const auto* rounds : {&spec.train_rounds, &spec.validation_rounds, &spec.test_rounds}) {
    for (int r : *rounds) {
      if (!present.contains(r)) {
        throw Error(ErrorCode::kConfig, "split: round " + std::to_string(r) + " not in data");
      }
    }
  }
  std::vector<std::size_t> train, validation, test;
  for (std::size_t i = 0; i < matrix.rows(); ++i) {
    const int r = matrix.keys[i].round;
    if (spec.train_rounds.contains(r)) train.push_back(i);
    else if (spec.validation_rounds.contains(r)) validation.push_back(i);
    else if (spec.test_rounds.contains(r)) test.push_back(i);
  }
  return {matrix.select(train), matrix.select(validation), matrix.select(test)};
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  check_lengths(scores.size(), labels.size(), "roc_auc");
  check_binary(labels, "roc_auc");
  const std::size_t n = scores.size();
  const double pos = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
  const double neg = static_cast<double>(n) - pos;
  if (pos == 0.0 || neg == 0.0) {
    throw Error(ErrorCode::kUndefinedMetric, "roc_auc needs both classes");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Sum of midranks of the positives (1-based ranks).
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) rank_sum += midrank;
    }
    i = j;
  }
  const double u = rank_sum - pos * (pos + 1.0) / 2.0;
  return u / (pos * neg);
}

double pr_auc(std::span<const double> scores, std::span<const int> labels) {
  check_lengths(scores.size(), labels.size(), "pr_auc");
  check_binary(labels, "pr_auc");
  const std::size_t n = scores.size();
  const double pos = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
  if (pos == 0.0) throw Error(ErrorCode::kUndefinedMetric, "pr_auc needs at least one positive");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  double tp = 0.0, fp = 0.0, ap = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    double block_pos = 0.0;
    while (j < n && scores[order[j]] == scores[order[i]]) {
      block_pos += labels[order[j]] == 1;
      ++j;
    }
    tp += block_pos;
    fp += static_cast<double>(j - i) - block_pos;
    if (block_pos > 0.0) ap += (tp / (tp + fp)) * (block_pos / pos);
    i = j;
  }
  return ap;
}

double brier(std::span<const double> probabilities, std::span<const int> labels) {
  check_lengths(probabilities.size(), labels.size(), "brier");
  check_probabilities(probabilities, "brier");
  check_binary(labels, "brier");
  if (labels.empty()) throw Error(ErrorCode::kDomain, "brier: no rows");
  double sum = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double d = probabilities[i] - labels[i];
    sum += d * d;
  }
  return sum / static_cast<double>(labels.size());
}

double log_loss(std::span<const double> probabilities, std::span<const int> labels) {
  check_lengths(probabilities.size(), labels.size(), "log_loss");
  check_probabilities(probabilities, "log_loss");
  check_binary(labels, "log_loss");
  if (labels.empty()) throw Error(ErrorCode::kDomain, "log_loss: no rows");
  constexpr double eps = 1e-15;
  double sum = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double p = std::clamp(probabilities[i], eps, 1.0 - eps);
    sum -= labels[i] == 1 ? std::log(p) : std::log(1.0 - p);
  }
  return sum / static_cast<double>(labels.size());
}

std::vector<CalibrationBin> calibration_bins(std::span<const double> probabilities,
                                             std::span<const int> labels) {
  check_lengths(probabilities.size(), labels.size(), "calibration_bins");
  check_probabilities(probabilities, "calibration_bins");
  check_binary(labels, "calibration_bins");
  constexpr int kBins = 10;
  std::vector<CalibrationBin> bins(kBins);
  std::vector<double> sum_p(kBins, 0.0), sum_y(kBins, 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int b = std::min(static_cast<int>(probabilities[i] * kBins), kBins - 1);
    sum_p[b] += probabilities[i];
    sum_y[b] += labels[i];
    ++bins[b].count;
  }
  for (int b = 0; b < kBins; ++b) {
    if (bins[b].count == 0) continue;
    const double c = static_cast<double>(bins[b].count);
    bins[b].mean_predicted = sum_p[b] / c;
    bins[b].observed = sum_y[b] / c;
  }
  return bins;
}

BinaryConfusion binary_confusion(std::span<const double> probabilities, std::span<const int> labels,
                                 double threshold) {
  check_lengths(probabilities.size(), labels.size(), "binary_confusion");
  check_binary(labels, "binary_confusion");
  BinaryConfusion c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool predicted = probabilities[i] >= threshold;
    if (labels[i] == 1) (predicted ? c.tp : c.fn) += 1;
    else (predicted ? c.fp : c.tn) += 1;
  }
  return c;
}

BinaryMetrics binary_metrics(std::span<const double> probabilities, std::span<const int> labels,
                             double threshold) {
  BinaryMetrics m;
  m.roc_auc = roc_auc(probabilities, labels);
  m.pr_auc = pr_auc(probabilities, labels);
  m.brier = brier(probabilities, labels);
  m.log_loss = log_loss(probabilities, labels);
  m.threshold = threshold;
  m.confusion = binary_confusion(probabilities, labels, threshold);
  m.n = labels.size();
  m.prevalence = static_cast<double>(m.confusion.tp + m.confusion.fn) / static_cast<double>(m.n);
  return m;
}

MultiClassMetrics multiclass_metrics(std::span<const int> predicted, std::span<const int> truth,
                                     int n_classes) {
  if (predicted.size() != truth.size()) {
    throw Error(ErrorCode::kShape, "multiclass_metrics: " + std::to_string(predicted.size()) +
                                       " predictions vs " + std::to_string(truth.size()) + " labels");
  }
  MultiClassMetrics m;
  m.n = truth.size();
  m.confusion.assign(n_classes, std::vector<std::size_t>(n_classes, 0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= n_classes || predicted[i] < 0 || predicted[i] >= n_classes) {
      throw Error(ErrorCode::kDomain, "multiclass_metrics: label outside [0, " +
                                          std::to_string(n_classes) + ")");
    }
    ++m.confusion[truth[i]][predicted[i]];
  }
  std::size_t correct = 0;
  double f1_sum = 0.0;
  for (int k = 0; k < n_classes; ++k) {
    std::size_t predicted_k = 0;
    for (int t = 0; t < n_classes; ++t) predicted_k += m.confusion[t][k];
    ClassScores s;
    s.support = std::accumulate(m.confusion[k].begin(), m.confusion[k].end(), std::size_t{0});
    const double tp = static_cast<double>(m.confusion[k][k]);
    correct += m.confusion[k][k];
    s.precision = predicted_k > 0 ? tp / static_cast<double>(predicted_k) : 0.0;
    s.recall = s.support > 0 ? tp / static_cast<double>(s.support) : 0.0;
    s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
                                        : 0.0;
    f1_sum += s.f1;
    m.per_class.push_back(s);
  }
  m.accuracy = m.n > 0 ? static_cast<double>(correct) / static_cast<double>(m.n) : 0.0;
  m.macro_f1 = f1_sum / n_classes;
  return m;
}

double accuracy(std::span<const int> predicted, std::span<const int> truth) {
  int n_classes = 1;
  for (int y : truth) n_classes = std::max(n_classes, y + 1);
  for (int y : predicted) n_classes = std::max(n_classes, y + 1);
  return multiclass_metrics(predicted, truth, n_classes).accuracy;
}

double macro_f1(std::span<const int> predicted, std::span<const int> truth, int n_classes) {
  return multiclass_metrics(predicted, truth, n_classes).macro_f1;
}

}  // namespace ews
