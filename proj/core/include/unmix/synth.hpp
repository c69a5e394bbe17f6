#pragma once

#include <cstdint>
#include <vector>

#include "unmix/types.hpp"

namespace unmix {

/// One pseudo-Voigt peak: a mix of unit-height Lorentzian and Gaussian
/// profiles sharing a full width at half maximum.
struct PeakSpec {
  double center = 0.0;     // 2theta, degrees
  double amplitude = 1.0;  // >= 0
  double fwhm = 0.1;       // degrees, > 0
  double eta = 0.5;        // Lorentzian fraction in [0, 1]
};

struct SynthConfig {
  GridPtr grid;
  int peaks_min = 4;  // peaks per phase drawn uniformly from [peaks_min, peaks_max]
  int peaks_max = 9;
  double noise_sigma = 0.0;       // Gaussian noise std as fraction of the library max
  double background_level = 0.0;  // constant offset added to every pattern
  std::uint64_t seed = 0;
  double fwhm_min = 0.1;  // degrees
  double fwhm_max = 0.5;
  double amp_min = 10.0;
  double amp_max = 100.0;
  // Minimum distance between peak centers, in degrees (0 disables). Keeps the
  // generated phases spectrally distinct; overlapping phases are not
  // identifiable by fraction estimation, so fixtures avoid them.
  double peak_separation = 0.0;
};

double pseudo_voigt(double theta, const PeakSpec& peak);

/// Deterministic pattern for one phase: seeded random peaks plus background.
/// peak_separation is enforced among this pattern's own peaks.
Spectrum gen_phase_pattern(const SynthConfig& config, std::uint64_t phase_seed);

/// One pattern per phase name, with per-phase derived seeds. peak_separation
/// is enforced across the whole library (phases in order), so a positive
/// separation makes the phases spectrally distinct; with separation 0 each
/// row equals gen_phase_pattern(config, j) exactly.
PhaseLibrary gen_phase_library(const SynthConfig& config, PhaseNamesPtr phase_names);

/// Forward model: y_s = sum_j alpha_j(s) x(j) + noise, clipped at zero.
/// Labels are the exact compositions passed in.
Dataset mix_samples(const PhaseLibrary& library, std::vector<Composition> compositions,
                    const SynthConfig& config);

/// Composition sampler used by the presets: all vertices first, then biphasic
/// edge points, then three-phase interior points over seeded random phase
/// subsets. Dominant fractions keep a clear margin so argmax is stable under
/// modest noise.
std::vector<Composition> sample_compositions(std::size_t count, PhaseNamesPtr phase_names,
                                             std::uint64_t seed);

/// Exhaustive minimizer of the single-sample squared residual over the simplex
/// lattice with resolution `step` (1/step must be an integer). Ties resolve to
/// the lexicographically smallest fraction vector. Cost grows as
/// (1/step)^(M-1); at most four phases are accepted.
Composition oracle_simplex_search(const Spectrum& spectrum, const PhaseLibrary& library,
                                  double step);

enum class Preset {
  ci_small,      // M=3, K=200, N=12, noise-free
  paper_shaped,  // M=7, K=4000, N=46, 1% noise
};

struct Scenario {
  SynthConfig config;
  PhaseLibrary truth;
  Dataset dataset;
};

Scenario make_scenario(Preset preset, std::uint64_t seed);

}  // namespace unmix
