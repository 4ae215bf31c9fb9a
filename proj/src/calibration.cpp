#include <algorithm>
#include <cmath>

#include "ews/error.hpp"
#include "ews/models.hpp"

namespace ews {

namespace {

// Smallest slope on standardized margins.
constexpr double kMinSlope = 1e-4;

// Mean log-loss of sigmoid(a*z + b) and its gradient in (a, b).
struct PlattLoss {
  double loss = 0.0;
  double grad_a = 0.0;
  double grad_b = 0.0;
};

PlattLoss platt_loss(std::span<const double> z, std::span<const int> y, double a, double b) {
  PlattLoss out;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double m = a * z[i] + b;
    const double sp = m > 0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m));
    out.loss += sp - (y[i] == 1 ? m : 0.0);
    const double r = sigmoid(m) - y[i];
    out.grad_a += r * z[i];
    out.grad_b += r;
  }
  const double n = static_cast<double>(z.size());
  out.loss /= n;
  out.grad_a /= n;
  out.grad_b /= n;
  return out;
}

}  // namespace

PlattCalibrator fit_platt(std::span<const double> margins, std::span<const int> labels) {
  if (margins.size() != labels.size()) {
    throw Error(ErrorCode::kShape, "fit_platt: margin and label counts differ");
  }
  if (margins.empty()) throw Error(ErrorCode::kCalibration, "fit_platt: no rows");
  std::size_t positives = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) throw Error(ErrorCode::kCalibration, "fit_platt needs 0/1 labels");
    positives += y == 1;
  }
  if (positives == 0 || positives == labels.size()) {
    throw Error(ErrorCode::kCalibration, "fit_platt: labels contain a single class");
  }
  for (double m : margins) {
    if (!std::isfinite(m)) throw Error(ErrorCode::kCalibration, "fit_platt: non-finite margin");
  }

  // Work on standardized margins so the step size is scale-free.
  const double mu = mean(margins);
  const double sd = population_sd(margins);
  const double prior = logit(static_cast<double>(positives) / static_cast<double>(labels.size()));
  // Rounding leaves a tiny sd on equal margins, so test equality directly.
  const auto [lo, hi] = std::minmax_element(margins.begin(), margins.end());
  if (*lo == *hi || sd == 0.0) return {0.0, prior};
  std::vector<double> z(margins.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = (margins[i] - mu) / sd;

  // Projected descent keeps the slope at or above kMinSlope, so calibration
  // is strictly increasing and never reorders the margins.
  double a = 1.0, b = prior;
  auto current = platt_loss(z, labels, a, b);
  double step = 1.0;
  for (int iter = 0; iter < 2000; ++iter) {
    const double ga = a <= kMinSlope && current.grad_a > 0.0 ? 0.0 : current.grad_a;
    const double grad_sq = ga * ga + current.grad_b * current.grad_b;
    if (grad_sq < 1e-20) break;
    bool accepted = false;
    PlattLoss next;
    double ta = a, tb = b;
    for (int halvings = 0; halvings < 60; ++halvings) {
      ta = std::max(a - step * ga, kMinSlope);
      tb = b - step * current.grad_b;
      next = platt_loss(z, labels, ta, tb);
      const double predicted = ga * (a - ta) + current.grad_b * (b - tb);
      if (next.loss <= current.loss - 1e-4 * predicted) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    const double decrease = current.loss - next.loss;
    a = ta;
    b = tb;
    current = next;
    step = std::min(step * 2.0, 64.0);
    if (decrease < 1e-12) break;
  }
  // Back to the raw margin scale: a*(m - mu)/sd + b.
  return {a / sd, b - a * mu / sd};
}

std::vector<double> apply_platt(const PlattCalibrator& cal, std::span<const double> margins) {
  std::vector<double> out(margins.size());
  for (std::size_t i = 0; i < margins.size(); ++i) out[i] = sigmoid(cal.a * margins[i] + cal.b);
  return out;
}

}  // namespace ews
