#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "unmix/metrics.hpp"
#include "unmix/solver.hpp"
#include "unmix/types.hpp"

namespace unmix {

struct CvResult {
  // One entry per fold, in sample order: (held-out sample index, prediction).
  std::vector<std::pair<std::size_t, Composition>> fold_predictions;
  EvalReport report;
  std::vector<FitTrace> per_fold_traces;   // training trace per fold
  std::vector<FitTrace> inference_traces;  // estimation trace per fold
  double wall_time_seconds = 0.0;
};

/// Leave-one-out cross-validation: for every sample, fit the library on the
/// other N-1 samples and predict the held-out one. Requires every phase to
/// survive every fold's training split, checked up front; a phase observed in
/// only one sample raises phase_dropout naming the fold and phase.
///
/// Folds are pure functions of their split, so they may run on `jobs` worker
/// threads; results are collected in sample order and independent of the
/// schedule.
CvResult loocv(const Dataset& dataset, const SolverConfig& config = {}, int jobs = 1);

/// Fit on all N samples, predict the same N samples, score. Comparing this
/// against the loocv report is the usual overfitting check.
EvalReport resubstitution_eval(const Dataset& dataset, const SolverConfig& config = {});

}  // namespace unmix
