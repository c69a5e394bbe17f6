#include "unmix/types.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace unmix {

const char* errc_name(errc code) noexcept {
  switch (code) {
    case errc::all_zero: return "AllZero";
    case errc::grid_mismatch: return "GridMismatch";
    case errc::negative_intensity: return "NegativeIntensity";
    case errc::bad_composition: return "BadComposition";
    case errc::dimension_mismatch: return "DimensionMismatch";
    case errc::unobserved_phase: return "UnobservedPhase";
    case errc::zero_pattern: return "ZeroPattern";
    case errc::degenerate_fit: return "DegenerateFit";
    case errc::phase_mismatch: return "PhaseMismatch";
    case errc::empty_input: return "EmptyInput";
    case errc::phase_dropout: return "PhaseDropout";
    case errc::parse_error: return "ParseError";
    case errc::version_mismatch: return "VersionMismatch";
    case errc::missing_file: return "MissingFile";
    case errc::too_many_phases: return "TooManyPhases";
  }
  return "UnknownError";
}

bool is_solver_error(errc code) noexcept {
  switch (code) {
    case errc::unobserved_phase:
    case errc::zero_pattern:
    case errc::degenerate_fit:
    case errc::phase_dropout:
      return true;
    default:
      return false;
  }
}

Error::Error(errc code, const std::string& message)
    : std::runtime_error(std::string(errc_name(code)) + ": " + message),
      code_(code),
      message_(message) {}

void raise(errc code, const std::string& message) { throw Error(code, message); }

PhaseNamesPtr make_phase_names(std::vector<std::string> names) {
  return std::make_shared<const PhaseNames>(std::move(names));
}

PhaseNamesPtr default_phase_names(std::size_t count) {
  PhaseNames names;
  names.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    names.push_back("phase_" + std::to_string(j + 1));
  }
  return make_phase_names(std::move(names));
}

AngleGrid::AngleGrid(std::vector<double> angles) : angles_(std::move(angles)) {
  if (angles_.empty()) {
    throw std::invalid_argument("AngleGrid: need at least one angle");
  }
  for (std::size_t i = 0; i < angles_.size(); ++i) {
    if (!std::isfinite(angles_[i])) {
      throw std::invalid_argument("AngleGrid: non-finite angle at index " + std::to_string(i));
    }
    if (i > 0 && !(angles_[i] > angles_[i - 1])) {
      throw std::invalid_argument("AngleGrid: angles must be strictly increasing (index " +
                                  std::to_string(i) + ")");
    }
  }
}

GridPtr make_linear_grid(double start, double stop, std::size_t points) {
  if (points == 0) {
    throw std::invalid_argument("make_linear_grid: need at least one point");
  }
  std::vector<double> angles(points);
  if (points == 1) {
    angles[0] = start;
  } else {
    const double step = (stop - start) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) {
      angles[i] = start + step * static_cast<double>(i);
    }
    angles.back() = stop;
  }
  return std::make_shared<const AngleGrid>(std::move(angles));
}

bool same_grid(const GridPtr& a, const GridPtr& b) noexcept {
  if (a == b) return a != nullptr;
  if (!a || !b) return false;
  return *a == *b;
}

Spectrum::Spectrum(GridPtr grid, std::vector<double> intensities)
    : grid_(std::move(grid)), intensities_(std::move(intensities)) {
  if (!grid_) {
    throw std::invalid_argument("Spectrum: null grid");
  }
  if (intensities_.size() != grid_->size()) {
    raise(errc::grid_mismatch,
          "spectrum has " + std::to_string(intensities_.size()) + " readings but grid has " +
              std::to_string(grid_->size()) + " angles");
  }
  bool any_positive = false;
  for (std::size_t i = 0; i < intensities_.size(); ++i) {
    const double v = intensities_[i];
    if (!(v >= 0.0)) {  // also catches NaN
      raise(errc::negative_intensity,
            "intensity " + std::to_string(v) + " at angle index " + std::to_string(i));
    }
    if (v > 0.0) any_positive = true;
  }
  if (!any_positive) {
    raise(errc::all_zero, "spectrum has no positive intensity");
  }
}

Composition::Composition(std::vector<double> fractions, PhaseNamesPtr phase_names)
    : fractions_(std::move(fractions)), phase_names_(std::move(phase_names)) {
  if (!phase_names_ || phase_names_->empty()) {
    throw std::invalid_argument("Composition: need at least one phase name");
  }
  if (fractions_.size() != phase_names_->size()) {
    raise(errc::bad_composition,
          "composition has " + std::to_string(fractions_.size()) + " fractions for " +
              std::to_string(phase_names_->size()) + " phases");
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < fractions_.size(); ++j) {
    const double f = fractions_[j];
    if (!(f >= 0.0)) {
      raise(errc::bad_composition,
            "negative fraction " + std::to_string(f) + " for phase " + (*phase_names_)[j]);
    }
    sum += f;
  }
  if (std::abs(sum - 1.0) > kSimplexSumTol) {
    raise(errc::bad_composition,
          "fractions sum to " + std::to_string(sum) + ", expected 1 within 1e-9");
  }
}

bool Composition::same_phases(const Composition& other) const noexcept {
  if (phase_names_ == other.phase_names_) return true;
  return *phase_names_ == *other.phase_names_;
}

Composition normalize_composition(std::vector<double> raw, PhaseNamesPtr phase_names) {
  if (!phase_names || phase_names->empty()) {
    throw std::invalid_argument("normalize_composition: need at least one phase name");
  }
  if (raw.size() != phase_names->size()) {
    raise(errc::bad_composition,
          "weight vector has " + std::to_string(raw.size()) + " entries for " +
              std::to_string(phase_names->size()) + " phases");
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < raw.size(); ++j) {
    if (!(raw[j] >= 0.0)) {
      raise(errc::bad_composition,
            "negative weight " + std::to_string(raw[j]) + " for phase " + (*phase_names)[j]);
    }
    sum += raw[j];
  }
  if (sum == 0.0) {
    raise(errc::all_zero, "cannot scale an all-zero weight vector onto the simplex");
  }
  for (double& v : raw) v /= sum;
  return Composition(std::move(raw), std::move(phase_names));
}

PhaseLibrary::PhaseLibrary(GridPtr grid, PhaseNamesPtr phase_names, std::vector<double> row_major)
    : grid_(std::move(grid)), phase_names_(std::move(phase_names)), data_(std::move(row_major)) {
  if (!grid_) throw std::invalid_argument("PhaseLibrary: null grid");
  if (!phase_names_ || phase_names_->empty()) {
    throw std::invalid_argument("PhaseLibrary: need at least one phase name");
  }
  std::set<std::string> unique(phase_names_->begin(), phase_names_->end());
  if (unique.size() != phase_names_->size()) {
    throw std::invalid_argument("PhaseLibrary: duplicate phase name");
  }
  if (data_.size() != phase_names_->size() * grid_->size()) {
    raise(errc::dimension_mismatch,
          "library data has " + std::to_string(data_.size()) + " values, expected " +
              std::to_string(phase_names_->size() * grid_->size()));
  }
  for (std::size_t k = 0; k < data_.size(); ++k) {
    if (!(data_[k] >= 0.0)) {
      raise(errc::negative_intensity,
            "library intensity " + std::to_string(data_[k]) + " at flat index " + std::to_string(k));
    }
  }
}

Dataset Dataset::from_parts(std::vector<Spectrum> spectra, std::vector<Composition> labels,
                            GridPtr grid, PhaseNamesPtr phase_names) {
  if (spectra.empty()) {
    raise(errc::empty_input, "dataset needs at least one sample");
  }
  if (spectra.size() != labels.size()) {
    raise(errc::dimension_mismatch,
          std::to_string(spectra.size()) + " spectra vs " + std::to_string(labels.size()) +
              " labels");
  }
  if (!grid || !phase_names || phase_names->empty()) {
    throw std::invalid_argument("Dataset: null grid or empty phase names");
  }
  for (std::size_t s = 0; s < spectra.size(); ++s) {
    if (!same_grid(spectra[s].grid(), grid)) {
      raise(errc::grid_mismatch, "sample " + std::to_string(s) + " is on a different angle grid");
    }
    if (labels[s].size() != phase_names->size() ||
        !(labels[s].phase_names() == phase_names || *labels[s].phase_names() == *phase_names)) {
      raise(errc::phase_mismatch,
            "sample " + std::to_string(s) + " is labelled over a different phase set");
    }
  }
  return Dataset(std::move(spectra), std::move(labels), std::move(grid), std::move(phase_names));
}

Dataset Dataset::without_sample(std::size_t skip) const {
  if (skip >= spectra_.size()) {
    throw std::out_of_range("Dataset::without_sample: index " + std::to_string(skip));
  }
  if (spectra_.size() < 2) {
    raise(errc::empty_input, "cannot drop the only sample");
  }
  std::vector<Spectrum> spectra;
  std::vector<Composition> labels;
  spectra.reserve(spectra_.size() - 1);
  labels.reserve(labels_.size() - 1);
  for (std::size_t s = 0; s < spectra_.size(); ++s) {
    if (s == skip) continue;
    spectra.push_back(spectra_[s]);
    labels.push_back(labels_[s]);
  }
  return Dataset(std::move(spectra), std::move(labels), grid_, phase_names_);
}

void Dataset::revalidate() const {
  if (spectra_.empty()) raise(errc::empty_input, "empty dataset");
  for (std::size_t s = 0; s < spectra_.size(); ++s) {
    const Spectrum& sp = spectra_[s];
    if (!same_grid(sp.grid(), grid_) || sp.size() != grid_->size()) {
      raise(errc::grid_mismatch, "sample " + std::to_string(s));
    }
    bool any_positive = false;
    for (double v : sp.intensities()) {
      if (!(v >= 0.0)) raise(errc::negative_intensity, "sample " + std::to_string(s));
      if (v > 0.0) any_positive = true;
    }
    if (!any_positive) raise(errc::all_zero, "sample " + std::to_string(s));
    const Composition& c = labels_[s];
    if (c.size() != phase_names_->size()) raise(errc::phase_mismatch, "sample " + std::to_string(s));
    double sum = 0.0;
    for (double f : c.fractions()) {
      if (!(f >= 0.0)) raise(errc::bad_composition, "sample " + std::to_string(s));
      sum += f;
    }
    if (std::abs(sum - 1.0) > kSimplexSumTol) {
      raise(errc::bad_composition, "sample " + std::to_string(s));
    }
  }
}

Dataset validate_dataset(std::vector<Spectrum> spectra,
                         std::vector<std::vector<double>> fraction_rows,
                         GridPtr grid, PhaseNamesPtr phase_names) {
  if (spectra.size() != fraction_rows.size()) {
    raise(errc::dimension_mismatch,
          std::to_string(spectra.size()) + " spectra vs " + std::to_string(fraction_rows.size()) +
              " fraction rows");
  }
  if (!phase_names) throw std::invalid_argument("validate_dataset: null phase names");
  std::vector<Composition> labels;
  labels.reserve(fraction_rows.size());
  for (std::size_t s = 0; s < fraction_rows.size(); ++s) {
    std::vector<double>& row = fraction_rows[s];
    if (row.size() != phase_names->size()) {
      raise(errc::bad_composition,
            "sample " + std::to_string(s) + " has " + std::to_string(row.size()) +
                " fractions for " + std::to_string(phase_names->size()) + " phases");
    }
    double sum = 0.0;
    for (double f : row) {
      if (!(f >= 0.0)) {
        raise(errc::bad_composition,
              "sample " + std::to_string(s) + " has a negative fraction");
      }
      sum += f;
    }
    if (std::abs(sum - 1.0) > kIngestSumTol) {
      raise(errc::bad_composition,
            "sample " + std::to_string(s) + " fractions sum to " + std::to_string(sum));
    }
    for (double& f : row) f /= sum;
    labels.emplace_back(std::move(row), phase_names);
  }
  return Dataset::from_parts(std::move(spectra), std::move(labels), std::move(grid),
                             std::move(phase_names));
}

}  // namespace unmix
