#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "unmix/metrics.hpp"
#include "unmix/types.hpp"

namespace unmix::io {

/// Shortest decimal representation that reparses to the same double.
std::string format_double(double value);

struct ManifestEntry {
  std::string sample_id;
  std::string file;  // spectrum path, absolute or relative to the manifest
  std::vector<double> fractions;
};

/// Labelled-dataset index: a header row `sample_id, file, <phase names...>`
/// followed by one row per sample. Comma- or whitespace-delimited; `#` starts
/// a comment.
struct Manifest {
  PhaseNamesPtr phase_names;
  std::vector<ManifestEntry> entries;
};

Manifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const Manifest& manifest);

/// Two-column (angle, intensity) text data, the de facto XY exchange format
/// of diffractometer exports.
struct XyData {
  std::vector<double> angles;
  std::vector<double> intensities;
};

XyData read_xy(const std::filesystem::path& path);
void write_xy(const std::filesystem::path& path, const AngleGrid& grid,
              std::span<const double> intensities);

struct LoadedDataset {
  Dataset dataset;
  std::vector<std::string> sample_ids;  // manifest order == dataset order
};

/// Read a manifest and every referenced spectrum. The first file's angle
/// column defines the grid; every other file must match it bitwise.
LoadedDataset load_dataset_keyed(const std::filesystem::path& manifest_path);
Dataset load_dataset(const std::filesystem::path& manifest_path);

/// Versioned library file. Round trips are lossless: load(save(L)) == L
/// bitwise on intensities, names, and grid.
void save_library(const PhaseLibrary& library, const std::filesystem::path& path);
PhaseLibrary load_library(const std::filesystem::path& path);

/// Read one spectrum file onto an existing grid (bitwise match required).
Spectrum read_spectrum(const std::filesystem::path& path, const GridPtr& grid);

/// Paired actual/predicted bar data per sample and phase: a long-format CSV
/// plus a static SVG rendering of per-sample mini bar charts.
void write_composition_bars(const std::filesystem::path& csv_path,
                            const std::filesystem::path& svg_path,
                            std::span<const std::string> sample_ids,
                            std::span<const Composition> actuals,
                            std::span<const Composition> predictions);

/// Per-sample prediction table (one row per sample, one column per phase),
/// with actual columns included when labels are given.
void write_predictions_csv(const std::filesystem::path& path,
                           std::span<const std::string> sample_ids,
                           std::span<const Composition> predictions,
                           std::span<const Composition> actuals = {});

/// Per-phase curve files (XY format) plus one SVG with a panel per phase;
/// overlays map phase names to measured monophase spectra drawn on top.
void write_phase_curves(const std::filesystem::path& out_dir, const PhaseLibrary& library,
                        const std::map<std::string, Spectrum>& overlays = {});

}  // namespace unmix::io
