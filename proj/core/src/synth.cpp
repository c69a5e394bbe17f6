#include "unmix/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "rng.hpp"

namespace unmix {

namespace {

constexpr double kFourLn2 = 2.7725887222397812;  // 4 ln 2

enum : std::uint64_t { kStreamPatterns = 0, kStreamNoise = 1, kStreamCompositions = 2 };

std::uint64_t stream_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t item) {
  return detail::derive_seed(detail::derive_seed(base, stream), item);
}

void check_config(const SynthConfig& config) {
  if (!config.grid) throw std::invalid_argument("SynthConfig: null grid");
  if (config.peaks_min < 0 || config.peaks_max < config.peaks_min) {
    throw std::invalid_argument("SynthConfig: bad peaks_per_phase range");
  }
  if (!(config.noise_sigma >= 0.0)) throw std::invalid_argument("SynthConfig: noise_sigma < 0");
  if (!(config.background_level >= 0.0)) {
    throw std::invalid_argument("SynthConfig: background_level < 0");
  }
  if (!(config.fwhm_min > 0.0) || config.fwhm_max < config.fwhm_min) {
    throw std::invalid_argument("SynthConfig: bad fwhm range");
  }
  if (!(config.amp_min >= 0.0) || config.amp_max < config.amp_min) {
    throw std::invalid_argument("SynthConfig: bad amplitude range");
  }
  if (!(config.peak_separation >= 0.0)) {
    throw std::invalid_argument("SynthConfig: peak_separation < 0");
  }
}

// One phase's peak list. Centers are rejection-sampled against
// `placed_centers` (its scope decides whether separation holds within one
// pattern or across a whole library); after 200 attempts the last candidate
// is accepted so generation always terminates.
std::vector<PeakSpec> draw_peaks(const SynthConfig& config, detail::Rng& rng,
                                 std::vector<double>& placed_centers) {
  const AngleGrid& grid = *config.grid;
  const int n_peaks =
      config.peaks_min + static_cast<int>(rng.below(
                             static_cast<std::uint64_t>(config.peaks_max - config.peaks_min) + 1));
  const double span = grid.back() - grid.front();
  const double margin = 0.02 * span;
  std::vector<PeakSpec> peaks;
  peaks.reserve(static_cast<std::size_t>(n_peaks));
  for (int p = 0; p < n_peaks; ++p) {
    PeakSpec peak;
    for (int attempt = 0; attempt < 200; ++attempt) {
      peak.center = rng.uniform(grid.front() + margin, grid.back() - margin);
      if (config.peak_separation == 0.0) break;
      bool clear = true;
      for (double c : placed_centers) {
        if (std::abs(peak.center - c) < config.peak_separation) {
          clear = false;
          break;
        }
      }
      if (clear) break;
    }
    placed_centers.push_back(peak.center);
    peak.amplitude = rng.uniform(config.amp_min, config.amp_max);
    peak.fwhm = rng.uniform(config.fwhm_min, config.fwhm_max);
    peak.eta = rng.uniform();
    peaks.push_back(peak);
  }
  return peaks;
}

std::vector<double> render_pattern(const SynthConfig& config, const std::vector<PeakSpec>& peaks) {
  const AngleGrid& grid = *config.grid;
  std::vector<double> intensities(grid.size(), config.background_level);
  for (const PeakSpec& peak : peaks) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      intensities[i] += pseudo_voigt(grid[i], peak);
    }
  }
  return intensities;
}

}  // namespace

double pseudo_voigt(double theta, const PeakSpec& peak) {
  if (!(peak.fwhm > 0.0)) throw std::invalid_argument("PeakSpec: fwhm must be > 0");
  if (!(peak.amplitude >= 0.0)) throw std::invalid_argument("PeakSpec: amplitude must be >= 0");
  if (!(peak.eta >= 0.0 && peak.eta <= 1.0)) {
    throw std::invalid_argument("PeakSpec: eta must be in [0, 1]");
  }
  const double u = (theta - peak.center) / peak.fwhm;
  const double lorentz = 1.0 / (1.0 + 4.0 * u * u);
  const double gauss = std::exp(-kFourLn2 * u * u);
  return peak.amplitude * (peak.eta * lorentz + (1.0 - peak.eta) * gauss);
}

Spectrum gen_phase_pattern(const SynthConfig& config, std::uint64_t phase_seed) {
  check_config(config);
  detail::Rng rng(stream_seed(config.seed, kStreamPatterns, phase_seed));
  std::vector<double> centers;
  const std::vector<PeakSpec> peaks = draw_peaks(config, rng, centers);
  return Spectrum(config.grid, render_pattern(config, peaks));
}

PhaseLibrary gen_phase_library(const SynthConfig& config, PhaseNamesPtr phase_names) {
  check_config(config);
  if (!phase_names || phase_names->empty()) {
    throw std::invalid_argument("gen_phase_library: need phase names");
  }
  const std::size_t k = config.grid->size();
  std::vector<double> rows;
  rows.reserve(phase_names->size() * k);
  std::vector<double> centers;  // shared across phases
  for (std::size_t j = 0; j < phase_names->size(); ++j) {
    detail::Rng rng(stream_seed(config.seed, kStreamPatterns, j));
    const std::vector<PeakSpec> peaks = draw_peaks(config, rng, centers);
    const std::vector<double> pattern = render_pattern(config, peaks);
    rows.insert(rows.end(), pattern.begin(), pattern.end());
  }
  return PhaseLibrary(config.grid, std::move(phase_names), std::move(rows));
}

Dataset mix_samples(const PhaseLibrary& library, std::vector<Composition> compositions,
                    const SynthConfig& config) {
  check_config(config);
  if (compositions.empty()) raise(errc::empty_input, "mix_samples: no compositions");
  if (!same_grid(config.grid, library.grid())) {
    raise(errc::grid_mismatch, "mix_samples: config grid differs from library grid");
  }
  for (std::size_t s = 0; s < compositions.size(); ++s) {
    const Composition& c = compositions[s];
    if (c.size() != library.phase_count() ||
        !(c.phase_names() == library.phase_names() ||
          *c.phase_names() == *library.phase_names())) {
      raise(errc::phase_mismatch, "composition " + std::to_string(s) +
                                      " is not over the library's phases");
    }
  }

  const std::size_t k = library.angle_count();
  const std::size_t m = library.phase_count();
  double max_intensity = 0.0;
  for (double v : library.row_major()) max_intensity = std::max(max_intensity, v);
  const double sigma = config.noise_sigma * max_intensity;

  std::vector<Spectrum> spectra;
  spectra.reserve(compositions.size());
  for (std::size_t s = 0; s < compositions.size(); ++s) {
    std::vector<double> y(k, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      const double alpha = compositions[s][j];
      if (alpha == 0.0) continue;
      const std::span<const double> x = library.pattern(j);
      for (std::size_t i = 0; i < k; ++i) y[i] += alpha * x[i];
    }
    if (sigma > 0.0) {
      detail::Rng rng(stream_seed(config.seed, kStreamNoise, s));
      for (std::size_t i = 0; i < k; ++i) {
        y[i] = std::max(0.0, y[i] + sigma * rng.normal());
      }
    }
    spectra.emplace_back(library.grid(), std::move(y));
  }
  return Dataset::from_parts(std::move(spectra), std::move(compositions), library.grid(),
                             library.phase_names());
}

std::vector<Composition> sample_compositions(std::size_t count, PhaseNamesPtr phase_names,
                                             std::uint64_t seed) {
  if (!phase_names || phase_names->empty()) {
    throw std::invalid_argument("sample_compositions: need phase names");
  }
  const std::size_t m = phase_names->size();
  detail::Rng rng(detail::derive_seed(seed, kStreamCompositions));
  std::vector<Composition> out;
  out.reserve(count);

  // All vertices first so every phase is observed pure at least once.
  for (std::size_t j = 0; j < m && out.size() < count; ++j) {
    std::vector<double> w(m, 0.0);
    w[j] = 1.0;
    out.emplace_back(std::move(w), phase_names);
  }

  // Remaining samples: biphasic with an occasional three-phase interior
  // point. The leading phase cycles deterministically so every phase keeps
  // appearing; dominant margins stay >= ~0.12 so argmax survives mild noise.
  std::size_t t = 0;
  while (out.size() < count) {
    const std::size_t lead = t % m;
    std::vector<double> w(m, 0.0);
    if (m == 1) {
      w[0] = 1.0;
    } else if (m == 2 || t % 3 != 2) {
      std::size_t other = rng.below(m - 1);
      if (other >= lead) ++other;
      const double wl = rng.uniform(0.6, 0.8);
      w[lead] = wl;
      w[other] = 1.0 - wl;
    } else {
      std::size_t second = rng.below(m - 1);
      if (second >= lead) ++second;
      std::size_t third = second;
      while (third == second || third == lead) third = rng.below(m);
      const double w1 = rng.uniform(0.5, 0.62);
      const double rest = 1.0 - w1;
      const double w2 = rest * rng.uniform(0.5, 0.75);
      w[lead] = w1;
      w[second] = w2;
      w[third] = rest - w2;
    }
    out.emplace_back(std::move(w), phase_names);
    ++t;
  }
  return out;
}

Composition oracle_simplex_search(const Spectrum& spectrum, const PhaseLibrary& library,
                                  double step) {
  const std::size_t m = library.phase_count();
  if (m > 4) {
    raise(errc::too_many_phases,
          "oracle_simplex_search supports at most 4 phases, got " + std::to_string(m));
  }
  if (!same_grid(spectrum.grid(), library.grid())) {
    raise(errc::grid_mismatch, "spectrum is not on the library grid");
  }
  if (!(step > 0.0) || step > 1.0) {
    throw std::invalid_argument("oracle_simplex_search: step must be in (0, 1]");
  }
  const long long resolution = std::llround(1.0 / step);
  if (resolution < 1 || std::abs(resolution * step - 1.0) > 1e-9) {
    throw std::invalid_argument("oracle_simplex_search: step must divide 1 evenly");
  }

  const std::size_t k = library.angle_count();
  const std::vector<double>& y = spectrum.intensities();

  // E^2(alpha) = y.y - 2 c.alpha + alpha' H alpha, with H and c computed here
  // from first principles; the search itself is exhaustive enumeration.
  std::vector<double> gram(m * m, 0.0);
  std::vector<double> proj(m, 0.0);
  double yy = 0.0;
  for (std::size_t i = 0; i < k; ++i) yy += y[i] * y[i];
  for (std::size_t a = 0; a < m; ++a) {
    const std::span<const double> xa = library.pattern(a);
    for (std::size_t b = a; b < m; ++b) {
      const std::span<const double> xb = library.pattern(b);
      double dot = 0.0;
      for (std::size_t i = 0; i < k; ++i) dot += xa[i] * xb[i];
      gram[a * m + b] = dot;
      gram[b * m + a] = dot;
    }
    double dot_y = 0.0;
    for (std::size_t i = 0; i < k; ++i) dot_y += xa[i] * y[i];
    proj[a] = dot_y;
  }

  std::vector<long long> counts(m, 0);
  std::vector<long long> best_counts(m, 0);
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> alpha(m, 0.0);

  // Lexicographic enumeration; strict improvement keeps the lexicographically
  // smallest vector among ties.
  auto enumerate = [&](auto&& self, std::size_t depth, long long remaining) -> void {
    if (depth + 1 == m) {
      counts[depth] = remaining;
      for (std::size_t j = 0; j < m; ++j) {
        alpha[j] = static_cast<double>(counts[j]) / static_cast<double>(resolution);
      }
      double value = yy;
      for (std::size_t a = 0; a < m; ++a) {
        if (alpha[a] == 0.0) continue;
        double row = -2.0 * proj[a];
        for (std::size_t b = 0; b < m; ++b) row += gram[a * m + b] * alpha[b];
        value += alpha[a] * row;
      }
      if (value < best) {
        best = value;
        best_counts = counts;
      }
      return;
    }
    for (long long c = 0; c <= remaining; ++c) {
      counts[depth] = c;
      self(self, depth + 1, remaining - c);
    }
  };
  enumerate(enumerate, 0, resolution);

  std::vector<double> fractions(m);
  for (std::size_t j = 0; j < m; ++j) {
    fractions[j] = static_cast<double>(best_counts[j]) / static_cast<double>(resolution);
  }
  return Composition(std::move(fractions), library.phase_names());
}

Scenario make_scenario(Preset preset, std::uint64_t seed) {
  SynthConfig config;
  std::size_t phases = 0;
  std::size_t samples = 0;
  switch (preset) {
    case Preset::ci_small:
      config.grid = make_linear_grid(10.0, 80.0, 200);
      config.peaks_min = 3;
      config.peaks_max = 6;
      config.fwhm_min = 0.6;
      config.fwhm_max = 1.2;
      config.peak_separation = 3.5;
      config.background_level = 0.05;
      config.noise_sigma = 0.0;
      phases = 3;
      samples = 12;
      break;
    case Preset::paper_shaped:
      config.grid = make_linear_grid(5.0, 85.0, 4000);
      config.peaks_min = 5;
      config.peaks_max = 9;
      config.fwhm_min = 0.1;
      config.fwhm_max = 0.4;
      config.peak_separation = 1.0;
      config.background_level = 2.0;
      config.noise_sigma = 0.01;
      phases = 7;
      samples = 46;
      break;
  }
  config.seed = seed;
  PhaseNamesPtr names = default_phase_names(phases);
  PhaseLibrary truth = gen_phase_library(config, names);
  Dataset dataset = mix_samples(truth, sample_compositions(samples, names, seed), config);
  return Scenario{std::move(config), std::move(truth), std::move(dataset)};
}

}  // namespace unmix
