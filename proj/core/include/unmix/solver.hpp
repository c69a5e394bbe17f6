#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "unmix/types.hpp"

namespace unmix {

struct SolverConfig {
  int max_iterations = 200;       // full sweeps
  double convergence_tol = 1e-8;  // training: relative objective change;
                                  // inference: L-inf change in alpha per sweep
  std::uint64_t init_seed = 0;    // reserved for randomized restarts; unused by
                                  // the default deterministic initialization
};

struct FitTrace {
  // Entry 0 is the objective at initialization; entry t the objective after
  // full sweep t. Non-increasing for training; inference sweeps may raise it
  // across the renormalization step.
  std::vector<double> objective_per_sweep;
  int sweeps_used = 0;
  bool converged = false;
};

struct FitResult {
  PhaseLibrary library;
  FitTrace trace;
};

struct EstimateResult {
  Composition composition;
  FitTrace trace;
};

/// Total squared residual of the forward model over every sample and angle.
double sse(const Dataset& dataset, const PhaseLibrary& library,
           std::span<const Composition> compositions);

/// Exact single-coordinate minimizer for the library entry at (angle, phase),
/// holding everything else fixed, clipped at zero. `compositions` supplies the
/// per-sample weights (the dataset labels, in training).
double update_phase_intensity(std::size_t angle, std::size_t phase, const Dataset& dataset,
                              const PhaseLibrary& library,
                              std::span<const Composition> compositions);

/// Learn the monophase library from labelled samples by cyclic coordinate
/// descent (phases in declared order, angles ascending) until the relative
/// objective change per sweep drops below convergence_tol. Initialization is
/// the alpha-weighted average of the training spectra.
FitResult fit_phase_library(const Dataset& dataset, const SolverConfig& config = {});

/// Same, but starting from an existing library (a warm start / refinement).
FitResult fit_phase_library(const Dataset& dataset, const SolverConfig& config,
                            const PhaseLibrary& warm_start);

/// Exact single-coordinate minimizer for the weight of `phase`, holding the
/// other entries of `alpha` fixed, clipped at zero.
double update_fraction(std::size_t phase, const Spectrum& spectrum, const PhaseLibrary& library,
                       std::span<const double> alpha);

/// Estimate phase fractions for one spectrum: start uniform, sweep
/// update_fraction over all phases, rescale onto the simplex after each full
/// sweep, stop when the L-inf change across a sweep drops below
/// convergence_tol. Raises degenerate_fit if a sweep clips every weight to
/// zero (the rescaling is undefined there).
EstimateResult estimate_composition(const Spectrum& spectrum, const PhaseLibrary& library,
                                    const SolverConfig& config = {});

}  // namespace unmix
