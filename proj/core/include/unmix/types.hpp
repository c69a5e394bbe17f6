#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "unmix/errors.hpp"

namespace unmix {

using PhaseNames = std::vector<std::string>;
using PhaseNamesPtr = std::shared_ptr<const PhaseNames>;

// Compositions read from external files may be off by rounding; after
// normalization the simplex constraint is enforced much tighter.
inline constexpr double kIngestSumTol = 1e-6;
inline constexpr double kSimplexSumTol = 1e-9;

PhaseNamesPtr make_phase_names(std::vector<std::string> names);
PhaseNamesPtr default_phase_names(std::size_t count);

/// Shared 2theta axis, in degrees. Strictly increasing, never empty.
/// Datasets and libraries require bitwise-identical grids; resampling is
/// deliberately unsupported.
class AngleGrid {
 public:
  explicit AngleGrid(std::vector<double> angles);

  std::size_t size() const noexcept { return angles_.size(); }
  const std::vector<double>& angles() const noexcept { return angles_; }
  double operator[](std::size_t i) const noexcept { return angles_[i]; }
  double front() const noexcept { return angles_.front(); }
  double back() const noexcept { return angles_.back(); }

  bool operator==(const AngleGrid& other) const noexcept {
    return angles_ == other.angles_;
  }

 private:
  std::vector<double> angles_;
};

using GridPtr = std::shared_ptr<const AngleGrid>;

GridPtr make_linear_grid(double start, double stop, std::size_t points);

// Same axis: identical object or bitwise-equal values.
bool same_grid(const GridPtr& a, const GridPtr& b) noexcept;

/// One measured (or synthesized) powder pattern on a shared grid.
/// Intensities are raw counts: non-negative, not rescaled, not
/// background-subtracted, with at least one strictly positive entry.
class Spectrum {
 public:
  Spectrum(GridPtr grid, std::vector<double> intensities);

  const GridPtr& grid() const noexcept { return grid_; }
  const std::vector<double>& intensities() const noexcept { return intensities_; }
  std::size_t size() const noexcept { return intensities_.size(); }
  double operator[](std::size_t i) const noexcept { return intensities_[i]; }

 private:
  GridPtr grid_;
  std::vector<double> intensities_;
};

/// Phase-fraction vector on the probability simplex: every entry >= 0 and the
/// entries sum to one within kSimplexSumTol. Construct unnormalized weights
/// through normalize_composition.
class Composition {
 public:
  Composition(std::vector<double> fractions, PhaseNamesPtr phase_names);

  const std::vector<double>& fractions() const noexcept { return fractions_; }
  const PhaseNamesPtr& phase_names() const noexcept { return phase_names_; }
  std::size_t size() const noexcept { return fractions_.size(); }
  double operator[](std::size_t j) const noexcept { return fractions_[j]; }

  bool same_phases(const Composition& other) const noexcept;

  bool operator==(const Composition& other) const noexcept {
    return fractions_ == other.fractions_ && same_phases(other);
  }

 private:
  std::vector<double> fractions_;
  PhaseNamesPtr phase_names_;
};

/// Scale a non-negative weight vector onto the simplex.
/// Raises errc::all_zero when every entry is zero (the scaling is undefined
/// there), errc::bad_composition on negative entries.
Composition normalize_composition(std::vector<double> raw, PhaseNamesPtr phase_names);

/// M monophase patterns on one grid, one row per phase. Rows are
/// non-negative; an all-zero row is representable (it is a solver failure
/// mode, not a construction error).
class PhaseLibrary {
 public:
  PhaseLibrary(GridPtr grid, PhaseNamesPtr phase_names, std::vector<double> row_major);

  std::size_t phase_count() const noexcept { return phase_names_->size(); }
  std::size_t angle_count() const noexcept { return grid_->size(); }
  const GridPtr& grid() const noexcept { return grid_; }
  const PhaseNamesPtr& phase_names() const noexcept { return phase_names_; }

  std::span<const double> pattern(std::size_t phase) const noexcept {
    return std::span<const double>(data_).subspan(phase * grid_->size(), grid_->size());
  }
  const std::vector<double>& row_major() const noexcept { return data_; }

  bool operator==(const PhaseLibrary& other) const noexcept {
    return data_ == other.data_ && *phase_names_ == *other.phase_names_ &&
           *grid_ == *other.grid_;
  }

 private:
  GridPtr grid_;
  PhaseNamesPtr phase_names_;
  std::vector<double> data_;  // phase_count x angle_count, row major
};

/// N labelled samples on one grid over one phase set. Immutable once built;
/// safe to share read-only across threads.
class Dataset {
 public:
  // Strict factory: compositions must already satisfy their invariants and
  // every spectrum must sit on `grid`. Used for programmatic construction
  // (synthesis, cross-validation folds).
  static Dataset from_parts(std::vector<Spectrum> spectra,
                            std::vector<Composition> labels,
                            GridPtr grid,
                            PhaseNamesPtr phase_names);

  std::size_t sample_count() const noexcept { return spectra_.size(); }
  std::size_t phase_count() const noexcept { return phase_names_->size(); }
  std::size_t angle_count() const noexcept { return grid_->size(); }

  const Spectrum& spectrum(std::size_t s) const noexcept { return spectra_[s]; }
  const Composition& label(std::size_t s) const noexcept { return labels_[s]; }
  const std::vector<Spectrum>& spectra() const noexcept { return spectra_; }
  const std::vector<Composition>& labels() const noexcept { return labels_; }
  const GridPtr& grid() const noexcept { return grid_; }
  const PhaseNamesPtr& phase_names() const noexcept { return phase_names_; }

  /// Dataset without sample `skip`; shares grid and phase names.
  Dataset without_sample(std::size_t skip) const;

  /// Re-assert every type invariant. Construction already guarantees them;
  /// this exists so harnesses can prove it.
  void revalidate() const;

 private:
  Dataset(std::vector<Spectrum> spectra, std::vector<Composition> labels,
          GridPtr grid, PhaseNamesPtr phase_names)
      : grid_(std::move(grid)),
        phase_names_(std::move(phase_names)),
        spectra_(std::move(spectra)),
        labels_(std::move(labels)) {}

  GridPtr grid_;
  PhaseNamesPtr phase_names_;
  std::vector<Spectrum> spectra_;
  std::vector<Composition> labels_;
};

/// Ingestion-side dataset assembly. Fraction rows are accepted if they sum to
/// one within kIngestSumTol and are renormalized exactly; anything further off
/// is rejected as bad_composition rather than silently rescaled.
Dataset validate_dataset(std::vector<Spectrum> spectra,
                         std::vector<std::vector<double>> fraction_rows,
                         GridPtr grid,
                         PhaseNamesPtr phase_names);

}  // namespace unmix
