// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances are pinned in code next to each check.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "unmix/io.hpp"
#include "unmix/metrics.hpp"
#include "unmix/solver.hpp"
#include "unmix/synth.hpp"
#include "unmix/validation.hpp"

using namespace unmix;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int index, const char* name, bool pass, const std::string& detail) {
  std::printf("[%d/8] %s  criterion %d: %s  (%s)\n", index, pass ? "PASS" : "FAIL", index, name,
              detail.c_str());
  if (!pass) ++failures;
}

void run_criterion(int index, const char* name, const std::function<std::pair<bool, std::string>()>& fn) {
  try {
    const auto [pass, detail] = fn();
    report(index, name, pass, detail);
  } catch (const std::exception& e) {
    report(index, name, false, std::string("exception: ") + e.what());
  }
}

double sample_sse(const Spectrum& spectrum, const PhaseLibrary& library,
                  const std::vector<double>& weights) {
  double total = 0.0;
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    double r = spectrum[i];
    for (std::size_t j = 0; j < library.phase_count(); ++j) {
      r -= weights[j] * library.pattern(j)[i];
    }
    total += r * r;
  }
  return total;
}

double pattern_cosine(std::span<const double> a, std::span<const double> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::string fmt(double v) { return io::format_double(v); }

// --- criterion 1 -----------------------------------------------------------

std::pair<bool, std::string> metric_exactness() {
  PhaseNamesPtr ab = make_phase_names({"a", "b"});
  const Composition even({0.5, 0.5}, ab);
  const Composition skew({0.6, 0.4}, ab);
  const Composition first({1.0, 0.0}, ab);
  const Composition second({0.0, 1.0}, ab);
  const double e1 = std::abs(rho(even, skew) - 0.9);
  const double e2 = std::abs(rho(first, second) - 0.0);
  const double e3 = std::abs(rho(even, even) - 1.0);
  const bool pass = e1 <= 1e-12 && e2 <= 1e-12 && e3 <= 1e-12;
  return {pass, "max deviation " + fmt(std::max({e1, e2, e3}))};
}

// --- criterion 2 -----------------------------------------------------------

std::pair<bool, std::string> oracle_equivalence() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  int checked = 0;
  double worst_excess = -1e300;
  for (int instance = 0; instance < 120; ++instance) {
    const std::size_t m = 2 + instance % 2;
    const bool small_k = instance % 4 < 2;
    PhaseNamesPtr names = default_phase_names(m);
    GridPtr grid;
    std::vector<double> rows;
    if (small_k) {
      // K=10: spike patterns on partitioned channels.
      const std::size_t k = 10;
      grid = make_linear_grid(10.0, 80.0, k);
      rows.assign(m * k, 0.0);
      for (std::size_t ch = 0; ch < k; ++ch) {
        rows[(ch % m) * k + ch] = 5.0 + 95.0 * unif(rng);
      }
    } else {
      // K=200: separated pseudo-Voigt patterns.
      SynthConfig config;
      config.grid = make_linear_grid(10.0, 80.0, 200);
      config.peaks_min = 3;
      config.peaks_max = 6;
      config.fwhm_min = 0.6;
      config.fwhm_max = 1.2;
      config.peak_separation = 3.5;
      config.seed = 9000 + static_cast<std::uint64_t>(instance);
      rows = gen_phase_library(config, names).row_major();
      grid = config.grid;
    }
    const PhaseLibrary library(grid, names, rows);
    const std::size_t k = grid->size();

    std::vector<double> weights(m, 0.0);
    switch (instance % 5) {
      case 0:
        weights[instance % m] = 1.0;  // vertex
        break;
      case 1: {
        const double a = 0.1 + 0.8 * unif(rng);  // edge
        weights[0] = a;
        weights[1] = 1.0 - a;
        break;
      }
      default: {
        double sum = 0.0;
        for (double& w : weights) {
          w = 0.05 + 0.95 * unif(rng);
          sum += w;
        }
        for (double& w : weights) w /= sum;
      }
    }
    std::vector<double> y(k, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t i = 0; i < k; ++i) y[i] += weights[j] * library.pattern(j)[i];
    }
    const Spectrum spectrum(grid, y);

    const EstimateResult est = estimate_composition(spectrum, library);
    const Composition oracle = oracle_simplex_search(spectrum, library, 0.001);
    const double e_solver = sample_sse(spectrum, library, est.composition.fractions());
    const double e_oracle = sample_sse(spectrum, library, oracle.fractions());

    double trace_gram = 0.0;
    for (double v : library.row_major()) trace_gram += v * v;
    const double lattice_bound = trace_gram * static_cast<double>(m) * 0.001 * 0.001;
    const double tol = std::max(1e-6 * e_oracle, lattice_bound);
    if (e_solver > e_oracle + tol || e_oracle > e_solver + lattice_bound) {
      return {false, "instance " + std::to_string(instance) + ": E2 solver " + fmt(e_solver) +
                         " vs oracle " + fmt(e_oracle) + " bound " + fmt(tol)};
    }
    worst_excess = std::max(worst_excess, e_solver - e_oracle - tol);
    ++checked;
  }
  return {true, std::to_string(checked) + " instances, worst excess " + fmt(worst_excess)};
}

// --- criterion 3 -----------------------------------------------------------

std::pair<bool, std::string> noise_free_identifiability() {
  const Scenario sc = make_scenario(Preset::ci_small, 42);
  const FitResult fit = fit_phase_library(sc.dataset);
  double min_cos = 1.0;
  for (std::size_t j = 0; j < sc.truth.phase_count(); ++j) {
    min_cos = std::min(min_cos, pattern_cosine(fit.library.pattern(j), sc.truth.pattern(j)));
  }
  const CvResult cv = loocv(sc.dataset);
  const bool pass = min_cos >= 0.999 && cv.report.mean_rho >= 0.999;
  return {pass,
          "min pattern cosine " + fmt(min_cos) + ", loocv mean rho " + fmt(cv.report.mean_rho)};
}

// --- criterion 4 -----------------------------------------------------------

std::pair<bool, std::string> noisy_desk_scale() {
  const Scenario sc = make_scenario(Preset::paper_shaped, 42);
  const CvResult cv = loocv(sc.dataset);  // single-threaded
  const EvalReport resub = resubstitution_eval(sc.dataset);
  // Recorded baselines for this seed; the slack absorbs libm variation while
  // still catching behavioral regressions.
  const double loocv_baseline = 0.9952626191076028;
  const double resub_baseline = 0.9968729120190393;
  const bool pass = cv.report.mean_rho >= 0.95 && cv.report.dominant_accuracy == 1.0 &&
                    resub.mean_rho >= cv.report.mean_rho &&
                    std::abs(cv.report.mean_rho - loocv_baseline) <= 1e-6 &&
                    std::abs(resub.mean_rho - resub_baseline) <= 1e-6;
  return {pass, "loocv rho " + fmt(cv.report.mean_rho) + ", resub rho " + fmt(resub.mean_rho) +
                    ", dominant accuracy " + fmt(cv.report.dominant_accuracy) + ", mae " +
                    fmt(cv.report.mae) + ", cs " + fmt(cv.report.mean_cosine)};
}

// --- criterion 5 -----------------------------------------------------------

std::pair<bool, std::string> training_monotonicity() {
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> unif(0.0, 100.0);
  int datasets = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t m = 2 + trial % 3;
    const std::size_t k = 10 + (trial % 4) * 30;
    const std::size_t n = m + 2 + trial % 7;
    GridPtr grid = make_linear_grid(5.0, 80.0, k);
    PhaseNamesPtr names = default_phase_names(m);
    std::vector<Spectrum> spectra;
    std::vector<Composition> labels;
    for (std::size_t s = 0; s < n; ++s) {
      std::vector<double> y(k);
      for (double& v : y) v = unif(rng);
      spectra.emplace_back(grid, std::move(y));
      if (s < m) {
        std::vector<double> vertex(m, 0.0);
        vertex[s] = 1.0;
        labels.emplace_back(std::move(vertex), names);
      } else {
        std::vector<double> w(m);
        double sum = 0.0;
        for (double& v : w) {
          v = 0.01 + unif(rng);
          sum += v;
        }
        for (double& v : w) v /= sum;
        labels.emplace_back(std::move(w), names);
      }
    }
    const Dataset data = Dataset::from_parts(spectra, labels, grid, names);
    const FitResult fit = fit_phase_library(data);
    const std::vector<double>& trace = fit.trace.objective_per_sweep;
    for (std::size_t t = 1; t < trace.size(); ++t) {
      if (!(trace[t] <= trace[t - 1] * (1.0 + 1e-9) + 1e-12 * trace.front())) {
        return {false, "dataset " + std::to_string(trial) + " sweep " + std::to_string(t) +
                           ": " + fmt(trace[t - 1]) + " -> " + fmt(trace[t])};
      }
    }
    ++datasets;
  }
  return {true, std::to_string(datasets) + " random datasets, every sweep non-increasing"};
}

// --- criterion 6 -----------------------------------------------------------

std::pair<bool, std::string> simplex_closure_fuzz() {
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> unif(0.0, 80.0);
  int returned = 0;
  int degenerate = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t m = 1 + trial % 4;
    const std::size_t k = 5 + (trial % 3) * 20;
    GridPtr grid = make_linear_grid(5.0, 80.0, k);
    // Provocation trials keep the last channel free of any pattern, so a
    // spike there is orthogonal to the whole library and must degenerate.
    const bool provoke = trial % 11 == 0;
    const std::size_t usable = k - (provoke ? 1 : 0);
    std::vector<double> rows(m * k, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      // deliberately varied: dense, sparse, and channel-disjoint patterns
      if (trial % 3 == 0) {
        for (std::size_t i = 0; i < usable; ++i) rows[j * k + i] = unif(rng);
      } else {
        for (std::size_t i = j; i < usable; i += m) rows[j * k + i] = unif(rng);
      }
      rows[j * k + (j % usable)] += 1.0;  // keep every pattern nonzero
    }
    const PhaseLibrary library(grid, default_phase_names(m), rows);
    std::vector<double> y(k, 0.0);
    if (provoke) {
      y[k - 1] = 1e-9;
    } else {
      for (double& v : y) v = unif(rng);
    }
    try {
      const EstimateResult est = estimate_composition(Spectrum(grid, y), library);
      double sum = 0.0;
      for (double f : est.composition.fractions()) {
        if (!(f >= 0.0)) return {false, "negative fraction " + fmt(f)};
        sum += f;
      }
      if (std::abs(sum - 1.0) > 1e-9) return {false, "sum " + fmt(sum)};
      ++returned;
    } catch (const Error& e) {
      if (e.code() != errc::degenerate_fit) {
        return {false, std::string("unexpected error: ") + e.what()};
      }
      ++degenerate;
    }
  }
  return {true, std::to_string(returned) + " simplex outputs, " + std::to_string(degenerate) +
                    " degenerate fits"};
}

// --- criterion 7 -----------------------------------------------------------

std::pair<bool, std::string> convergence_behavior() {
  const Scenario sc = make_scenario(Preset::ci_small, 42);
  SolverConfig config;  // tol 1e-8, 200 sweeps
  const CvResult cv = loocv(sc.dataset, config);
  std::vector<int> sweeps;
  for (const FitTrace& trace : cv.inference_traces) {
    if (!trace.converged || trace.sweeps_used > 50) {
      return {false, "a fold needed " + std::to_string(trace.sweeps_used) +
                         " sweeps (converged=" + std::to_string(trace.converged) + ")"};
    }
    sweeps.push_back(trace.sweeps_used);
  }
  std::sort(sweeps.begin(), sweeps.end());
  const int median = sweeps[sweeps.size() / 2];
  return {true, "all folds converged within 50 sweeps; median " + std::to_string(median) +
                    " (typical budget for this iteration is ~15)"};
}

// --- criterion 8 -----------------------------------------------------------

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void synth_to_files(const Scenario& sc, const fs::path& dir) {
  fs::create_directories(dir);
  io::Manifest manifest;
  manifest.phase_names = sc.dataset.phase_names();
  for (std::size_t s = 0; s < sc.dataset.sample_count(); ++s) {
    const std::string id = "s" + std::to_string(s);
    io::write_xy(dir / (id + ".xy"), *sc.dataset.grid(), sc.dataset.spectrum(s).intensities());
    manifest.entries.push_back({id, id + ".xy", sc.dataset.label(s).fractions()});
  }
  io::write_manifest(dir / "manifest.csv", manifest);
}

std::pair<bool, std::string> format_closure() {
  const fs::path base = fs::temp_directory_path() / "unmix_acceptance_c8";
  fs::remove_all(base);

  auto pipeline = [&](const fs::path& dir) {
    const Scenario sc = make_scenario(Preset::ci_small, 2024);
    synth_to_files(sc, dir);
    const Dataset loaded = io::load_dataset(dir / "manifest.csv");
    const FitResult fit = fit_phase_library(loaded);
    io::save_library(fit.library, dir / "fitted.library");
    const PhaseLibrary back = io::load_library(dir / "fitted.library");
    if (!(back == fit.library)) {
      throw std::runtime_error("library round trip is not lossless");
    }
  };
  pipeline(base / "run1");
  pipeline(base / "run2");

  for (const auto& entry : fs::directory_iterator(base / "run1")) {
    const fs::path other = base / "run2" / entry.path().filename();
    if (slurp(entry.path()) != slurp(other)) {
      return {false, "file differs across runs: " + entry.path().filename().string()};
    }
  }
  const std::size_t files = std::distance(fs::directory_iterator(base / "run1"),
                                          fs::directory_iterator{});
  fs::remove_all(base);
  return {true, "library round trip lossless; " + std::to_string(files) +
                    " files byte-identical across two runs"};
}

}  // namespace

int main() {
  const auto started = std::chrono::steady_clock::now();
  run_criterion(1, "metric exactness", metric_exactness);
  run_criterion(2, "oracle equivalence", oracle_equivalence);
  run_criterion(3, "noise-free identifiability", noise_free_identifiability);
  run_criterion(4, "noisy desk-scale run", noisy_desk_scale);
  run_criterion(5, "training monotonicity", training_monotonicity);
  run_criterion(6, "simplex/non-negativity closure", simplex_closure_fuzz);
  run_criterion(7, "convergence behavior", convergence_behavior);
  run_criterion(8, "format closure", format_closure);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  std::printf("%d/8 criteria passed in %.1fs\n", 8 - failures, seconds);
  return failures == 0 ? 0 : 1;
}
