#include "unmix/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace unmix {

namespace {

void check_solver_config(const SolverConfig& config) {
  if (config.max_iterations < 1) {
    throw std::invalid_argument("SolverConfig: max_iterations must be >= 1");
  }
  if (!(config.convergence_tol > 0.0)) {
    throw std::invalid_argument("SolverConfig: convergence_tol must be > 0");
  }
}

void check_dimensions(const Dataset& dataset, const PhaseLibrary& library,
                      std::span<const Composition> compositions) {
  if (compositions.size() != dataset.sample_count()) {
    raise(errc::dimension_mismatch,
          std::to_string(compositions.size()) + " compositions for " +
              std::to_string(dataset.sample_count()) + " samples");
  }
  if (library.angle_count() != dataset.angle_count() ||
      !same_grid(library.grid(), dataset.grid())) {
    raise(errc::dimension_mismatch, "library grid differs from dataset grid");
  }
  if (library.phase_count() != dataset.phase_count()) {
    raise(errc::dimension_mismatch,
          "library has " + std::to_string(library.phase_count()) + " phases, dataset has " +
              std::to_string(dataset.phase_count()));
  }
  for (std::size_t s = 0; s < compositions.size(); ++s) {
    if (compositions[s].size() != library.phase_count()) {
      raise(errc::dimension_mismatch, "composition " + std::to_string(s) + " has wrong length");
    }
  }
}

// Residual of sample s at angle i under weights w: y_i(s) - sum_j w_j x_i(j).
double residual(const Dataset& dataset, const PhaseLibrary& library, std::size_t s,
                std::size_t i, std::span<const double> w) {
  double r = dataset.spectrum(s)[i];
  for (std::size_t j = 0; j < library.phase_count(); ++j) {
    r -= w[j] * library.pattern(j)[i];
  }
  return r;
}

double objective(std::span<const double> patterns, const Dataset& dataset) {
  const std::size_t m = dataset.phase_count();
  const std::size_t k = dataset.angle_count();
  double total = 0.0;
  for (std::size_t s = 0; s < dataset.sample_count(); ++s) {
    const std::vector<double>& y = dataset.spectrum(s).intensities();
    const std::vector<double>& alpha = dataset.label(s).fractions();
    for (std::size_t i = 0; i < k; ++i) {
      double r = y[i];
      for (std::size_t j = 0; j < m; ++j) {
        const double a = alpha[j];
        if (a != 0.0) r -= a * patterns[j * k + i];
      }
      total += r * r;
    }
  }
  return total;
}

}  // namespace

double sse(const Dataset& dataset, const PhaseLibrary& library,
           std::span<const Composition> compositions) {
  check_dimensions(dataset, library, compositions);
  const std::size_t k = dataset.angle_count();
  double total = 0.0;
  for (std::size_t s = 0; s < dataset.sample_count(); ++s) {
    const std::vector<double>& w = compositions[s].fractions();
    for (std::size_t i = 0; i < k; ++i) {
      const double r = residual(dataset, library, s, i, w);
      total += r * r;
    }
  }
  return total;
}

double update_phase_intensity(std::size_t angle, std::size_t phase, const Dataset& dataset,
                              const PhaseLibrary& library,
                              std::span<const Composition> compositions) {
  check_dimensions(dataset, library, compositions);
  if (angle >= dataset.angle_count() || phase >= dataset.phase_count()) {
    throw std::out_of_range("update_phase_intensity: index out of range");
  }
  double numerator = 0.0;
  double denominator = 0.0;
  for (std::size_t s = 0; s < dataset.sample_count(); ++s) {
    const double a = compositions[s][phase];
    denominator += a * a;
    if (a == 0.0) continue;
    double partial = dataset.spectrum(s)[angle];
    for (std::size_t j = 0; j < library.phase_count(); ++j) {
      if (j == phase) continue;
      partial -= compositions[s][j] * library.pattern(j)[angle];
    }
    numerator += a * partial;
  }
  if (denominator == 0.0) {
    raise(errc::unobserved_phase,
          "phase " + (*library.phase_names())[phase] + " appears in no sample");
  }
  return std::max(numerator / denominator, 0.0);
}

namespace {

FitResult fit_phase_library_impl(const Dataset& dataset, const SolverConfig& config,
                                 const PhaseLibrary* warm_start) {
  check_solver_config(config);
  const std::size_t n = dataset.sample_count();
  const std::size_t m = dataset.phase_count();
  const std::size_t k = dataset.angle_count();

  // Gram matrix of the label weights and the weighted data sums. Both are
  // fixed across sweeps; with them each coordinate update is O(M):
  //   numerator(i, j) = data_sum[j][i] - sum_{j' != j} gram[j][j'] x_i(j').
  std::vector<double> gram(m * m, 0.0);
  std::vector<double> weight_sum(m, 0.0);
  std::vector<double> data_sum(m * k, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    const std::vector<double>& alpha = dataset.label(s).fractions();
    const std::vector<double>& y = dataset.spectrum(s).intensities();
    for (std::size_t a = 0; a < m; ++a) {
      if (alpha[a] == 0.0) continue;
      weight_sum[a] += alpha[a];
      for (std::size_t b = a; b < m; ++b) gram[a * m + b] += alpha[a] * alpha[b];
      double* row = data_sum.data() + a * k;
      for (std::size_t i = 0; i < k; ++i) row[i] += alpha[a] * y[i];
    }
  }
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < a; ++b) gram[a * m + b] = gram[b * m + a];
  }
  for (std::size_t j = 0; j < m; ++j) {
    if (gram[j * m + j] == 0.0) {
      raise(errc::unobserved_phase,
            "phase " + (*dataset.phase_names())[j] + " appears in no training sample");
    }
  }

  std::vector<double> patterns(m * k, 0.0);
  if (warm_start != nullptr) {
    if (warm_start->phase_count() != m || !same_grid(warm_start->grid(), dataset.grid())) {
      raise(errc::dimension_mismatch, "warm-start library does not match the dataset");
    }
    patterns = warm_start->row_major();
  } else {
    // Default initialization: the alpha-weighted average of the spectra.
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t i = 0; i < k; ++i) {
        patterns[j * k + i] = data_sum[j * k + i] / weight_sum[j];
      }
    }
  }

  FitTrace trace;
  trace.objective_per_sweep.push_back(objective(patterns, dataset));

  std::vector<double> numerator(k);
  for (int sweep = 1; sweep <= config.max_iterations; ++sweep) {
    // Cyclic order: phases as declared, angles ascending. For a fixed phase
    // the per-angle subproblems are independent, so the whole row can be
    // updated in place.
    for (std::size_t j = 0; j < m; ++j) {
      std::copy_n(data_sum.data() + j * k, k, numerator.data());
      for (std::size_t other = 0; other < m; ++other) {
        if (other == j) continue;
        const double g = gram[j * m + other];
        if (g == 0.0) continue;
        const double* row = patterns.data() + other * k;
        for (std::size_t i = 0; i < k; ++i) numerator[i] -= g * row[i];
      }
      const double denom = gram[j * m + j];
      double* row = patterns.data() + j * k;
      for (std::size_t i = 0; i < k; ++i) {
        row[i] = std::max(numerator[i] / denom, 0.0);
      }
    }

    const double previous = trace.objective_per_sweep.back();
    const double current = objective(patterns, dataset);
    trace.objective_per_sweep.push_back(current);
    trace.sweeps_used = sweep;
    if (std::abs(previous - current) / std::max(previous, 1e-30) < config.convergence_tol) {
      trace.converged = true;
      break;
    }
  }

  PhaseLibrary library(dataset.grid(), dataset.phase_names(), std::move(patterns));
  return FitResult{std::move(library), std::move(trace)};
}

}  // namespace

FitResult fit_phase_library(const Dataset& dataset, const SolverConfig& config) {
  return fit_phase_library_impl(dataset, config, nullptr);
}

FitResult fit_phase_library(const Dataset& dataset, const SolverConfig& config,
                            const PhaseLibrary& warm_start) {
  return fit_phase_library_impl(dataset, config, &warm_start);
}

double update_fraction(std::size_t phase, const Spectrum& spectrum, const PhaseLibrary& library,
                       std::span<const double> alpha) {
  if (!same_grid(spectrum.grid(), library.grid())) {
    raise(errc::grid_mismatch, "spectrum is not on the library grid");
  }
  if (alpha.size() != library.phase_count()) {
    raise(errc::dimension_mismatch, "alpha has " + std::to_string(alpha.size()) +
                                        " entries for " + std::to_string(library.phase_count()) +
                                        " phases");
  }
  if (phase >= library.phase_count()) {
    throw std::out_of_range("update_fraction: phase index out of range");
  }
  const std::size_t k = library.angle_count();
  const std::size_t m = library.phase_count();
  const std::span<const double> x = library.pattern(phase);
  const std::vector<double>& y = spectrum.intensities();

  double numerator = 0.0;
  double denominator = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double xi = x[i];
    denominator += xi * xi;
    if (xi == 0.0) continue;
    double partial = y[i];
    for (std::size_t j = 0; j < m; ++j) {
      if (j == phase) continue;
      partial -= alpha[j] * library.pattern(j)[i];
    }
    numerator += xi * partial;
  }
  if (denominator == 0.0) {
    raise(errc::zero_pattern, "library pattern " + (*library.phase_names())[phase] +
                                  " is identically zero");
  }
  return std::max(numerator / denominator, 0.0);
}

EstimateResult estimate_composition(const Spectrum& spectrum, const PhaseLibrary& library,
                                    const SolverConfig& config) {
  check_solver_config(config);
  if (!same_grid(spectrum.grid(), library.grid())) {
    raise(errc::grid_mismatch, "spectrum is not on the library grid");
  }
  const std::size_t m = library.phase_count();
  const std::size_t k = library.angle_count();
  for (std::size_t j = 0; j < m; ++j) {
    const std::span<const double> x = library.pattern(j);
    bool nonzero = false;
    for (std::size_t i = 0; i < k; ++i) {
      if (x[i] != 0.0) {
        nonzero = true;
        break;
      }
    }
    if (!nonzero) {
      raise(errc::zero_pattern,
            "library pattern " + (*library.phase_names())[j] + " is identically zero");
    }
  }

  auto sample_sse = [&](std::span<const double> w) {
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      double r = spectrum[i];
      for (std::size_t j = 0; j < m; ++j) r -= w[j] * library.pattern(j)[i];
      total += r * r;
    }
    return total;
  };

  std::vector<double> alpha(m, 1.0 / static_cast<double>(m));
  FitTrace trace;
  trace.objective_per_sweep.push_back(sample_sse(alpha));

  std::vector<double> previous(m);
  for (int sweep = 1; sweep <= config.max_iterations; ++sweep) {
    previous = alpha;
    for (std::size_t j = 0; j < m; ++j) {
      alpha[j] = update_fraction(j, spectrum, library, alpha);
    }
    double sum = 0.0;
    for (double v : alpha) sum += v;
    if (sum == 0.0) {
      raise(errc::degenerate_fit,
            "every fraction clipped to zero; the simplex rescaling is undefined");
    }
    for (double& v : alpha) v /= sum;

    trace.objective_per_sweep.push_back(sample_sse(alpha));
    trace.sweeps_used = sweep;
    double max_change = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      max_change = std::max(max_change, std::abs(alpha[j] - previous[j]));
    }
    if (max_change < config.convergence_tol) {
      trace.converged = true;
      break;
    }
  }

  Composition composition(std::move(alpha), library.phase_names());
  return EstimateResult{std::move(composition), std::move(trace)};
}

}  // namespace unmix
