#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "unmix/io.hpp"
#include "unmix/metrics.hpp"
#include "unmix/solver.hpp"
#include "unmix/synth.hpp"
#include "unmix/validation.hpp"

namespace unmix::cli {

namespace fs = std::filesystem;

namespace {

struct SolverFlags {
  std::optional<double> tol;
  std::optional<int> max_iters;

  SolverConfig config() const {
    SolverConfig cfg;
    if (tol) cfg.convergence_tol = *tol;
    if (max_iters) cfg.max_iterations = *max_iters;
    return cfg;
  }
};

void add_solver_flags(CLI::App* cmd, SolverFlags& flags) {
  cmd->add_option("--tol", flags.tol, "Convergence tolerance")->check(CLI::PositiveNumber);
  cmd->add_option("--max-iters", flags.max_iters, "Maximum sweeps")
      ->check(CLI::PositiveNumber);
}

std::string fmt(double v) { return io::format_double(v); }

int median_sweeps(const std::vector<FitTrace>& traces) {
  std::vector<int> sweeps;
  sweeps.reserve(traces.size());
  for (const FitTrace& t : traces) sweeps.push_back(t.sweeps_used);
  std::sort(sweeps.begin(), sweeps.end());
  return sweeps.empty() ? 0 : sweeps[sweeps.size() / 2];
}

void print_report(const EvalReport& report) {
  std::cout << "samples " << report.per_sample.size() << "\n";
  std::cout << "mean_rho " << fmt(report.mean_rho) << "\n";
  std::cout << "mae " << fmt(report.mae) << "\n";
  std::cout << "mean_cosine " << fmt(report.mean_cosine) << "\n";
  std::cout << "dominant_accuracy " << fmt(report.dominant_accuracy) << "\n";
}

void write_scores_csv(const fs::path& path, std::span<const std::string> ids,
                      const EvalReport& report) {
  std::string content = "sample_id,rho,cosine,dominant_hit\n";
  for (std::size_t s = 0; s < report.per_sample.size(); ++s) {
    const SampleScore& score = report.per_sample[s];
    content += ids[s];
    content += ',';
    content += fmt(score.rho);
    content += ',';
    content += fmt(score.cosine);
    content += ',';
    content += score.dominant_hit ? '1' : '0';
    content += '\n';
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(errc::missing_file, "cannot write " + path.string());
  out << content;
}

SynthConfig parse_synth_config(const fs::path& path, std::size_t& phases, std::size_t& samples) {
  std::ifstream in(path);
  if (!in) raise(errc::missing_file, path.string());
  std::map<std::string, double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::string key;
    std::string value;
    std::istringstream row(line);
    if (!(row >> key)) continue;
    row >> value;
    if (value == "=") row >> value;
    double parsed = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), parsed);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
      raise(errc::parse_error, path.string() + ":" + std::to_string(line_no) +
                                   ": bad value for '" + key + "'");
    }
    values[key] = parsed;
  }

  auto take = [&](const std::string& key, double fallback) {
    const auto it = values.find(key);
    if (it == values.end()) return fallback;
    const double v = it->second;
    values.erase(it);
    return v;
  };
  auto require = [&](const std::string& key) {
    if (!values.count(key)) {
      raise(errc::parse_error, path.string() + ": missing required key '" + key + "'");
    }
    return take(key, 0.0);
  };

  SynthConfig config;
  const double start = require("grid_start");
  const double stop = require("grid_stop");
  const double points = require("grid_points");
  phases = static_cast<std::size_t>(require("phases"));
  samples = static_cast<std::size_t>(require("samples"));
  config.grid = make_linear_grid(start, stop, static_cast<std::size_t>(points));
  config.peaks_min = static_cast<int>(take("peaks_min", config.peaks_min));
  config.peaks_max = static_cast<int>(take("peaks_max", config.peaks_max));
  config.fwhm_min = take("fwhm_min", config.fwhm_min);
  config.fwhm_max = take("fwhm_max", config.fwhm_max);
  config.amp_min = take("amp_min", config.amp_min);
  config.amp_max = take("amp_max", config.amp_max);
  config.background_level = take("background", config.background_level);
  config.noise_sigma = take("noise_sigma", config.noise_sigma);
  config.peak_separation = take("peak_separation", config.peak_separation);
  config.seed = static_cast<std::uint64_t>(take("seed", 0.0));
  if (!values.empty()) {
    raise(errc::parse_error, path.string() + ": unknown key '" + values.begin()->first + "'");
  }
  return config;
}

std::string sample_id_for(std::size_t index) {
  std::string digits = std::to_string(index);
  while (digits.size() < 3) digits.insert(digits.begin(), '0');
  return "s" + digits;
}

int do_train(const fs::path& manifest, const fs::path& out, const SolverFlags& flags) {
  const Dataset dataset = io::load_dataset(manifest);
  const FitResult fit = fit_phase_library(dataset, flags.config());
  io::save_library(fit.library, out);
  std::cout << "sweeps " << fit.trace.sweeps_used << "\n";
  std::cout << "converged " << (fit.trace.converged ? 1 : 0) << "\n";
  std::cout << "final_sse " << fmt(fit.trace.objective_per_sweep.back()) << "\n";
  std::cout << "library " << out.string() << "\n";
  return 0;
}

int do_predict(const fs::path& library_path, const fs::path& spectrum_path,
               const std::optional<fs::path>& out, const SolverFlags& flags) {
  const PhaseLibrary library = io::load_library(library_path);
  const Spectrum spectrum = io::read_spectrum(spectrum_path, library.grid());
  const EstimateResult result = estimate_composition(spectrum, library, flags.config());
  const PhaseNames& names = *library.phase_names();
  for (std::size_t j = 0; j < names.size(); ++j) {
    std::cout << names[j] << " " << fmt(result.composition[j]) << "\n";
  }
  std::cout << "# sweeps " << result.trace.sweeps_used << " converged "
            << (result.trace.converged ? 1 : 0) << "\n";
  if (out) {
    const std::vector<std::string> ids = {spectrum_path.stem().string()};
    const std::vector<Composition> predictions = {result.composition};
    io::write_predictions_csv(*out, ids, predictions);
  }
  return 0;
}

int do_cv(const fs::path& manifest, const std::optional<fs::path>& out, const SolverFlags& flags,
          int jobs) {
  const io::LoadedDataset loaded = io::load_dataset_keyed(manifest);
  const CvResult cv = loocv(loaded.dataset, flags.config(), jobs);
  print_report(cv.report);
  std::cout << "median_inference_sweeps " << median_sweeps(cv.inference_traces) << "\n";
  std::cout << "wall_time_seconds " << fmt(cv.wall_time_seconds) << "\n";
  if (out) {
    fs::create_directories(*out);
    std::vector<Composition> predictions;
    predictions.reserve(cv.fold_predictions.size());
    for (const auto& [index, composition] : cv.fold_predictions) predictions.push_back(composition);
    io::write_predictions_csv(*out / "predictions.csv", loaded.sample_ids, predictions,
                              loaded.dataset.labels());
    io::write_composition_bars(*out / "bars.csv", *out / "bars.svg", loaded.sample_ids,
                               loaded.dataset.labels(), predictions);
    std::cout << "predictions " << (*out / "predictions.csv").string() << "\n";
  }
  return 0;
}

int do_resub(const fs::path& manifest, const std::optional<fs::path>& out,
             const SolverFlags& flags) {
  const io::LoadedDataset loaded = io::load_dataset_keyed(manifest);
  const EvalReport report = resubstitution_eval(loaded.dataset, flags.config());
  print_report(report);
  if (out) {
    fs::create_directories(*out);
    write_scores_csv(*out / "scores.csv", loaded.sample_ids, report);
    std::cout << "scores " << (*out / "scores.csv").string() << "\n";
  }
  return 0;
}

int do_synth(const std::optional<std::string>& preset, const std::optional<fs::path>& config_path,
             const fs::path& out, std::optional<std::uint64_t> seed) {
  fs::create_directories(out);
  std::optional<Scenario> scenario;
  if (preset) {
    scenario.emplace(make_scenario(
        *preset == "paper-shaped" ? Preset::paper_shaped : Preset::ci_small, seed.value_or(0)));
  } else {
    std::size_t phases = 0;
    std::size_t samples = 0;
    SynthConfig config = parse_synth_config(*config_path, phases, samples);
    if (seed) config.seed = *seed;
    PhaseNamesPtr names = default_phase_names(phases);
    PhaseLibrary truth = gen_phase_library(config, names);
    Dataset dataset = mix_samples(truth, sample_compositions(samples, names, config.seed), config);
    scenario.emplace(Scenario{std::move(config), std::move(truth), std::move(dataset)});
  }

  const Dataset& dataset = scenario->dataset;
  io::Manifest manifest;
  manifest.phase_names = dataset.phase_names();
  for (std::size_t s = 0; s < dataset.sample_count(); ++s) {
    const std::string id = sample_id_for(s);
    const std::string file = id + ".xy";
    io::write_xy(out / file, *dataset.grid(), dataset.spectrum(s).intensities());
    io::ManifestEntry entry;
    entry.sample_id = id;
    entry.file = file;
    entry.fractions = dataset.label(s).fractions();
    manifest.entries.push_back(std::move(entry));
  }
  io::write_manifest(out / "manifest.csv", manifest);
  io::save_library(scenario->truth, out / "truth.library");
  std::cout << "samples " << dataset.sample_count() << "\n";
  std::cout << "phases " << dataset.phase_count() << "\n";
  std::cout << "angles " << dataset.angle_count() << "\n";
  std::cout << "manifest " << (out / "manifest.csv").string() << "\n";
  std::cout << "truth_library " << (out / "truth.library").string() << "\n";
  return 0;
}

int do_export_phases(const fs::path& library_path, const fs::path& out,
                     const std::vector<std::string>& overlay_specs) {
  const PhaseLibrary library = io::load_library(library_path);
  std::map<std::string, Spectrum> overlays;
  for (const std::string& spec : overlay_specs) {
    const std::size_t eq = spec.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
      raise(errc::parse_error, "--overlay expects NAME=FILE, got '" + spec + "'");
    }
    const std::string name = spec.substr(0, eq);
    const fs::path file = spec.substr(eq + 1);
    overlays.emplace(name, io::read_spectrum(file, library.grid()));
  }
  io::write_phase_curves(out, library, overlays);
  std::cout << "phases " << library.phase_count() << "\n";
  std::cout << "out " << out.string() << "\n";
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Supervised spectral unmixing for powder XRD phase quantification"};
  app.require_subcommand(1);

  SolverFlags train_flags;
  std::string train_manifest;
  std::string train_out;
  CLI::App* train = app.add_subcommand("train", "Learn a phase library from a labelled manifest");
  train->add_option("--manifest", train_manifest, "Dataset manifest")->required();
  train->add_option("--out", train_out, "Library file to write")->required();
  add_solver_flags(train, train_flags);

  SolverFlags predict_flags;
  std::string predict_library;
  std::string predict_spectrum;
  std::string predict_out;
  CLI::App* predict =
      app.add_subcommand("predict", "Estimate phase fractions for one spectrum");
  predict->add_option("--library", predict_library, "Phase library file")->required();
  predict->add_option("--spectrum", predict_spectrum, "Spectrum file (angle, intensity)")
      ->required();
  predict->add_option("--out", predict_out, "Optional predictions CSV");
  add_solver_flags(predict, predict_flags);

  SolverFlags cv_flags;
  std::string cv_manifest;
  std::string cv_out;
  int cv_jobs = 1;
  CLI::App* cv = app.add_subcommand("cv", "Leave-one-out cross-validation");
  cv->add_option("--manifest", cv_manifest, "Dataset manifest")->required();
  cv->add_option("--out", cv_out, "Directory for predictions and bar-chart data");
  cv->add_option("--jobs", cv_jobs, "Parallel folds")->check(CLI::PositiveNumber);
  add_solver_flags(cv, cv_flags);

  SolverFlags resub_flags;
  std::string resub_manifest;
  std::string resub_out;
  CLI::App* resub = app.add_subcommand("resub", "Resubstitution (training-set) evaluation");
  resub->add_option("--manifest", resub_manifest, "Dataset manifest")->required();
  resub->add_option("--out", resub_out, "Directory for per-sample scores");
  add_solver_flags(resub, resub_flags);

  std::string synth_preset;
  std::string synth_config;
  std::string synth_out;
  std::uint64_t synth_seed = 0;
  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic labelled dataset");
  synth->add_option("--preset", synth_preset, "Preset scenario")
      ->check(CLI::IsMember({"ci-small", "paper-shaped"}));
  synth->add_option("--config", synth_config, "Synthesis config file (key value lines)");
  synth->add_option("--out", synth_out, "Output directory")->required();
  CLI::Option* seed_option = synth->add_option("--seed", synth_seed, "Generator seed");

  std::string export_library;
  std::string export_out;
  std::vector<std::string> export_overlays;
  CLI::App* export_phases =
      app.add_subcommand("export-phases", "Write per-phase curves and an SVG overview");
  export_phases->add_option("--library", export_library, "Phase library file")->required();
  export_phases->add_option("--out", export_out, "Output directory")->required();
  export_phases->add_option("--overlay", export_overlays,
                            "NAME=FILE monophase spectrum drawn over its phase");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (app.got_subcommand(train)) return do_train(train_manifest, train_out, train_flags);
    if (app.got_subcommand(predict)) {
      return do_predict(predict_library, predict_spectrum,
                        predict_out.empty() ? std::nullopt
                                            : std::optional<fs::path>(predict_out),
                        predict_flags);
    }
    if (app.got_subcommand(cv)) {
      return do_cv(cv_manifest,
                   cv_out.empty() ? std::nullopt : std::optional<fs::path>(cv_out), cv_flags,
                   cv_jobs);
    }
    if (app.got_subcommand(resub)) {
      return do_resub(resub_manifest,
                      resub_out.empty() ? std::nullopt : std::optional<fs::path>(resub_out),
                      resub_flags);
    }
    if (app.got_subcommand(synth)) {
      if (synth_preset.empty() == synth_config.empty()) {
        std::cerr << "synth: exactly one of --preset or --config is required\n";
        return 1;
      }
      return do_synth(synth_preset.empty() ? std::nullopt
                                           : std::optional<std::string>(synth_preset),
                      synth_config.empty() ? std::nullopt
                                           : std::optional<fs::path>(synth_config),
                      synth_out,
                      seed_option->count() > 0 ? std::optional<std::uint64_t>(synth_seed)
                                               : std::nullopt);
    }
    if (app.got_subcommand(export_phases)) {
      return do_export_phases(export_library, export_out, export_overlays);
    }
    return 1;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return is_solver_error(e.code()) ? 3 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace unmix::cli
