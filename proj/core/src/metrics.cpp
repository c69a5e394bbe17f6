#include "unmix/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace unmix {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

void check_pair(const Composition& actual, const Composition& predicted) {
  if (actual.size() != predicted.size() || !actual.same_phases(predicted)) {
    raise(errc::phase_mismatch, "compositions are over different phase sets");
  }
}

void check_lists(std::span<const Composition> actuals, std::span<const Composition> predictions) {
  if (actuals.empty() || predictions.empty()) {
    raise(errc::empty_input, "no compositions to score");
  }
  if (actuals.size() != predictions.size()) {
    raise(errc::phase_mismatch, std::to_string(actuals.size()) + " actuals vs " +
                                    std::to_string(predictions.size()) + " predictions");
  }
  for (std::size_t s = 0; s < actuals.size(); ++s) check_pair(actuals[s], predictions[s]);
}

}  // namespace

double rho(const Composition& actual, const Composition& predicted) {
  check_pair(actual, predicted);
  double dist_sq = 0.0;
  for (std::size_t j = 0; j < actual.size(); ++j) {
    const double d = actual[j] - predicted[j];
    dist_sq += d * d;
  }
  // Simplex points are never further apart than sqrt(2); the clamp only
  // absorbs last-ulp rounding.
  return std::clamp(1.0 - std::sqrt(dist_sq) / kSqrt2, 0.0, 1.0);
}

double cosine_similarity(const Composition& actual, const Composition& predicted) {
  check_pair(actual, predicted);
  double dot = 0.0;
  double norm_a = 0.0;
  double norm_p = 0.0;
  for (std::size_t j = 0; j < actual.size(); ++j) {
    dot += actual[j] * predicted[j];
    norm_a += actual[j] * actual[j];
    norm_p += predicted[j] * predicted[j];
  }
  return dot / (std::sqrt(norm_a) * std::sqrt(norm_p));
}

double mae(std::span<const Composition> actuals, std::span<const Composition> predictions) {
  check_lists(actuals, predictions);
  const std::size_t m = actuals.front().size();
  double total = 0.0;
  for (std::size_t s = 0; s < actuals.size(); ++s) {
    for (std::size_t j = 0; j < m; ++j) {
      total += std::abs(actuals[s][j] - predictions[s][j]);
    }
  }
  return total / (static_cast<double>(actuals.size()) * static_cast<double>(m));
}

std::size_t dominant_phase(const Composition& composition) noexcept {
  std::size_t best = 0;
  for (std::size_t j = 1; j < composition.size(); ++j) {
    if (composition[j] > composition[best]) best = j;
  }
  return best;
}

double dominant_phase_accuracy(std::span<const Composition> actuals,
                               std::span<const Composition> predictions) {
  check_lists(actuals, predictions);
  std::size_t hits = 0;
  for (std::size_t s = 0; s < actuals.size(); ++s) {
    if (dominant_phase(actuals[s]) == dominant_phase(predictions[s])) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(actuals.size());
}

EvalReport evaluate(std::span<const Composition> actuals,
                    std::span<const Composition> predictions) {
  check_lists(actuals, predictions);
  EvalReport report;
  report.per_sample.reserve(actuals.size());
  const std::size_t m = actuals.front().size();
  double rho_sum = 0.0;
  double cosine_sum = 0.0;
  double abs_sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t s = 0; s < actuals.size(); ++s) {
    SampleScore score;
    score.rho = rho(actuals[s], predictions[s]);
    score.cosine = cosine_similarity(actuals[s], predictions[s]);
    score.abs_errors.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
      score.abs_errors[j] = std::abs(actuals[s][j] - predictions[s][j]);
      abs_sum += score.abs_errors[j];
    }
    score.dominant_hit = dominant_phase(actuals[s]) == dominant_phase(predictions[s]);
    if (score.dominant_hit) ++hits;
    rho_sum += score.rho;
    cosine_sum += score.cosine;
    report.per_sample.push_back(std::move(score));
  }
  const double n = static_cast<double>(actuals.size());
  report.mean_rho = rho_sum / n;
  report.mean_cosine = cosine_sum / n;
  report.mae = abs_sum / (n * static_cast<double>(m));
  report.dominant_accuracy = static_cast<double>(hits) / n;
  return report;
}

}  // namespace unmix
