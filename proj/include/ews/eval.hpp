#pragma once

#include <array>
#include <set>
#include <span>
#include <vector>

#include "ews/features.hpp"

namespace ews {

struct SplitSpec {
  std::set<int> train_rounds{1};
  std::set<int> validation_rounds{2};
  std::set<int> test_rounds{3};

  // Throws kConfig unless the sets are disjoint, train is nonempty and every
  // train round < every validation round < every test round.
  void validate() const;
};

struct TemporalSplit {
  FeatureMatrix train;
  FeatureMatrix validation;
  FeatureMatrix test;
};

// Throws kConfig when the split is invalid or names a round absent from the matrix.
TemporalSplit temporal_split(const FeatureMatrix& matrix, const SplitSpec& spec);

// Probability that a random positive outranks a random negative, ties 1/2.
// Throws kUndefinedMetric for single-class labels.
double roc_auc(std::span<const double> scores, std::span<const int> labels);
// Average precision with equal scores processed as one block. Throws
// kUndefinedMetric without positives.
double pr_auc(std::span<const double> scores, std::span<const int> labels);
// Mean of (p - y)^2. Throws kDomain for probabilities outside [0, 1].
double brier(std::span<const double> probabilities, std::span<const int> labels);
// Mean negative log-likelihood with probabilities clipped to [1e-15, 1 - 1e-15].
double log_loss(std::span<const double> probabilities, std::span<const int> labels);

struct CalibrationBin {
  double mean_predicted = 0.0;  // 0 for an empty bin
  double observed = 0.0;        // 0 for an empty bin
  std::size_t count = 0;
};

// Ten equal-width bins on [0, 1]; p = 1 falls into the last bin.
std::vector<CalibrationBin> calibration_bins(std::span<const double> probabilities,
                                             std::span<const int> labels);

struct BinaryConfusion {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

// Predicted positive when p >= threshold.
BinaryConfusion binary_confusion(std::span<const double> probabilities, std::span<const int> labels,
                                 double threshold = 0.5);

struct BinaryMetrics {
  double roc_auc = 0.0;
  double pr_auc = 0.0;
  double brier = 0.0;
  double log_loss = 0.0;
  double threshold = 0.5;
  BinaryConfusion confusion;
  double prevalence = 0.0;
  std::size_t n = 0;
};

BinaryMetrics binary_metrics(std::span<const double> probabilities, std::span<const int> labels,
                             double threshold = 0.5);

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct MultiClassMetrics {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::vector<std::vector<std::size_t>> confusion;  // [truth][predicted]
  std::vector<ClassScores> per_class;
  std::size_t n = 0;
};

// Zero denominators give 0 precision/recall/F1. Throws kShape on a length
// mismatch and kDomain for labels outside [0, n_classes).
MultiClassMetrics multiclass_metrics(std::span<const int> predicted, std::span<const int> truth,
                                     int n_classes = 3);
double accuracy(std::span<const int> predicted, std::span<const int> truth);
double macro_f1(std::span<const int> predicted, std::span<const int> truth, int n_classes = 3);

}  // namespace ews
