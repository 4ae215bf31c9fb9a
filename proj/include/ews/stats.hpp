#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

namespace ews {

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<double> column(std::size_t c) const;

  const std::vector<double>& data() const noexcept { return data_; }

  // Copies the selected rows, in the given order.
  Matrix select_rows(std::span<const std::size_t> indices) const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double logit(double p) { return std::log(p / (1.0 - p)); }

// Numerically stable softmax.
std::vector<double> softmax(std::span<const double> margins);

double mean(std::span<const double> xs);
// Sample (n-1) standard deviation; 0 for fewer than two values.
double sample_sd(std::span<const double> xs);
// Population (n) standard deviation.
double population_sd(std::span<const double> xs);
// Moment estimator m3 / m2^{3/2}; 0 for zero variance.
double skewness(std::span<const double> xs);
// Linear-interpolation quantile (R type 7) of an unsorted sample.
double quantile(std::span<const double> xs, double q);
double median(std::span<const double> xs);
// Pearson correlation; nullopt when either side has zero variance.
std::optional<double> pearson(std::span<const double> xs, std::span<const double> ys);

}  // namespace ews
