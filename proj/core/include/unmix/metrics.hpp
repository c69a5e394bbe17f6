#pragma once

#include <span>
#include <vector>

#include "unmix/types.hpp"

namespace unmix {

struct SampleScore {
  double rho = 0.0;     // 1 - |actual - predicted|_2 / sqrt(2), in [0, 1]
  double cosine = 0.0;  // cosine similarity, in [0, 1] for simplex vectors
  std::vector<double> abs_errors;  // per-phase |actual - predicted|
  bool dominant_hit = false;
};

struct EvalReport {
  std::vector<SampleScore> per_sample;
  double mean_rho = 0.0;
  double mae = 0.0;          // mean absolute error over all samples and phases
  double mean_cosine = 0.0;
  double dominant_accuracy = 0.0;
};

/// 1 - Euclidean distance over sqrt(2). 1 is a perfect prediction; 0 is a
/// maximally wrong one (disjoint one-hots).
double rho(const Composition& actual, const Composition& predicted);

double cosine_similarity(const Composition& actual, const Composition& predicted);

/// Mean of |actual - predicted| over every sample and phase: the error sum
/// divided by N*M.
double mae(std::span<const Composition> actuals, std::span<const Composition> predictions);

/// Index of the largest fraction; exact ties go to the lowest index.
std::size_t dominant_phase(const Composition& composition) noexcept;

double dominant_phase_accuracy(std::span<const Composition> actuals,
                               std::span<const Composition> predictions);

EvalReport evaluate(std::span<const Composition> actuals,
                    std::span<const Composition> predictions);

}  // namespace unmix
