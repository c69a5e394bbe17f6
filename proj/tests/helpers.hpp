#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "unmix/solver.hpp"
#include "unmix/synth.hpp"
#include "unmix/types.hpp"

namespace testutil {

using namespace unmix;

inline GridPtr grid_of(std::vector<double> angles) {
  return std::make_shared<const AngleGrid>(std::move(angles));
}

inline PhaseNamesPtr names_of(std::vector<std::string> names) {
  return make_phase_names(std::move(names));
}

inline PhaseLibrary library_of(GridPtr grid, PhaseNamesPtr names,
                               const std::vector<std::vector<double>>& rows) {
  std::vector<double> flat;
  for (const auto& row : rows) flat.insert(flat.end(), row.begin(), row.end());
  return PhaseLibrary(std::move(grid), std::move(names), std::move(flat));
}

inline double sample_sse(const Spectrum& spectrum, const PhaseLibrary& library,
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

inline double cosine_of(std::span<const double> a, std::span<const double> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

// Unique scratch directory, removed when the object dies.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    auto base = std::filesystem::temp_directory_path();
    for (int attempt = 0;; ++attempt) {
      path_ = base / ("unmix_" + tag + "_" + std::to_string(::getpid()) + "_" +
                      std::to_string(attempt));
      std::error_code ec;
      if (std::filesystem::create_directory(path_, ec)) break;
    }
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Random simplex point (interior-biased) over M phases.
inline std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t m) {
  std::uniform_real_distribution<double> unif(0.05, 1.0);
  std::vector<double> w(m);
  double sum = 0.0;
  for (double& v : w) {
    v = unif(rng);
    sum += v;
  }
  for (double& v : w) v /= sum;
  return w;
}

// Spectrally distinct random library: pseudo-Voigt peaks with separated
// centers. The estimation fixed point is only unique for distinct patterns,
// so identification fixtures are drawn from this family.
inline PhaseLibrary random_peaky_library(std::uint64_t seed, std::size_t phases, std::size_t k) {
  SynthConfig config;
  config.grid = make_linear_grid(10.0, 80.0, k);
  config.peaks_min = 3;
  config.peaks_max = 6;
  config.fwhm_min = 0.6;
  config.fwhm_max = 1.2;
  config.peak_separation = 3.5;
  config.background_level = 0.0;
  config.seed = seed;
  return gen_phase_library(config, default_phase_names(phases));
}

// Exact mixture of library patterns with the given weights.
inline Spectrum exact_mixture(const PhaseLibrary& library, const std::vector<double>& weights) {
  std::vector<double> y(library.angle_count(), 0.0);
  for (std::size_t j = 0; j < library.phase_count(); ++j) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += weights[j] * library.pattern(j)[i];
  }
  return Spectrum(library.grid(), std::move(y));
}

}  // namespace testutil
