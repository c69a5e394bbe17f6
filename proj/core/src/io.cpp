#include "unmix/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <system_error>

namespace unmix::io {

namespace fs = std::filesystem;

namespace {

std::string strip_comment(const std::string& line) {
  const std::size_t hash = line.find('#');
  std::string out = hash == std::string::npos ? line : line.substr(0, hash);
  const auto begin = out.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return {};
  const auto end = out.find_last_not_of(" \t\r\n");
  return out.substr(begin, end - begin + 1);
}

// Comma-delimited when the line contains a comma, whitespace-delimited
// otherwise. Tokens are trimmed; empty comma fields are rejected upstream by
// token-count checks.
std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> tokens;
  if (line.find(',') != std::string::npos) {
    std::size_t start = 0;
    while (start <= line.size()) {
      std::size_t comma = line.find(',', start);
      if (comma == std::string::npos) comma = line.size();
      std::string field = line.substr(start, comma - start);
      const auto b = field.find_first_not_of(" \t");
      if (b == std::string::npos) {
        field.clear();
      } else {
        const auto e = field.find_last_not_of(" \t");
        field = field.substr(b, e - b + 1);
      }
      tokens.push_back(std::move(field));
      start = comma + 1;
      if (comma == line.size()) break;
    }
  } else {
    std::istringstream stream(line);
    std::string token;
    while (stream >> token) tokens.push_back(token);
  }
  return tokens;
}

double parse_double(const std::string& token, const fs::path& path, std::size_t line_no) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    raise(errc::parse_error,
          path.string() + ":" + std::to_string(line_no) + ": not a number: '" + token + "'");
  }
  return value;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      raise(errc::missing_file, "cannot open " + tmp.string() + " for writing");
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
      raise(errc::missing_file, "write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    raise(errc::missing_file, "cannot move " + tmp.string() + " to " + path.string());
  }
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    raise(errc::missing_file, path.string());
  }
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::string sanitize_name(const std::string& name) {
  std::string out = name;
  for (char& c : out) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '.' || c == '-' || c == '_';
    if (!ok) c = '_';
  }
  return out;
}

}  // namespace

std::string format_double(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  (void)ec;
  return std::string(buffer, ptr);
}

XyData read_xy(const fs::path& path) {
  const std::vector<std::string> raw = read_lines(path);
  XyData data;
  for (std::size_t idx = 0; idx < raw.size(); ++idx) {
    const std::string line = strip_comment(raw[idx]);
    if (line.empty()) continue;
    const std::vector<std::string> tokens = tokenize(line);
    if (tokens.size() != 2) {
      raise(errc::parse_error, path.string() + ":" + std::to_string(idx + 1) +
                                   ": expected two columns (angle, intensity), got " +
                                   std::to_string(tokens.size()));
    }
    data.angles.push_back(parse_double(tokens[0], path, idx + 1));
    data.intensities.push_back(parse_double(tokens[1], path, idx + 1));
  }
  if (data.angles.empty()) {
    raise(errc::parse_error, path.string() + ": no data rows");
  }
  return data;
}

void write_xy(const fs::path& path, const AngleGrid& grid, std::span<const double> intensities) {
  if (intensities.size() != grid.size()) {
    raise(errc::dimension_mismatch, "write_xy: " + std::to_string(intensities.size()) +
                                        " intensities for " + std::to_string(grid.size()) +
                                        " angles");
  }
  std::string content = "# angle intensity\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    content += format_double(grid[i]);
    content += ' ';
    content += format_double(intensities[i]);
    content += '\n';
  }
  write_file_atomic(path, content);
}

Manifest read_manifest(const fs::path& path) {
  const std::vector<std::string> raw = read_lines(path);
  Manifest manifest;
  std::set<std::string> seen_ids;
  bool have_header = false;
  std::size_t phase_count = 0;
  for (std::size_t idx = 0; idx < raw.size(); ++idx) {
    const std::string line = strip_comment(raw[idx]);
    if (line.empty()) continue;
    const std::vector<std::string> tokens = tokenize(line);
    const std::string where = path.string() + ":" + std::to_string(idx + 1);
    if (!have_header) {
      if (tokens.size() < 3 || tokens[0] != "sample_id" || tokens[1] != "file") {
        raise(errc::parse_error,
              where + ": header must be 'sample_id, file, <phase names...>'");
      }
      PhaseNames names(tokens.begin() + 2, tokens.end());
      for (const std::string& name : names) {
        if (name.empty()) raise(errc::parse_error, where + ": empty phase name");
      }
      std::set<std::string> unique(names.begin(), names.end());
      if (unique.size() != names.size()) {
        raise(errc::parse_error, where + ": duplicate phase name");
      }
      phase_count = names.size();
      manifest.phase_names = make_phase_names(std::move(names));
      have_header = true;
      continue;
    }
    if (tokens.size() != 2 + phase_count) {
      raise(errc::parse_error, where + ": expected " + std::to_string(2 + phase_count) +
                                   " fields, got " + std::to_string(tokens.size()));
    }
    ManifestEntry entry;
    entry.sample_id = tokens[0];
    entry.file = tokens[1];
    if (entry.sample_id.empty() || entry.file.empty()) {
      raise(errc::parse_error, where + ": empty sample_id or file");
    }
    if (!seen_ids.insert(entry.sample_id).second) {
      raise(errc::parse_error, where + ": duplicate sample_id '" + entry.sample_id + "'");
    }
    entry.fractions.reserve(phase_count);
    for (std::size_t j = 0; j < phase_count; ++j) {
      entry.fractions.push_back(parse_double(tokens[2 + j], path, idx + 1));
    }
    manifest.entries.push_back(std::move(entry));
  }
  if (!have_header) {
    raise(errc::parse_error, path.string() + ": missing header row");
  }
  if (manifest.entries.empty()) {
    raise(errc::parse_error, path.string() + ": no sample rows");
  }
  return manifest;
}

void write_manifest(const fs::path& path, const Manifest& manifest) {
  if (!manifest.phase_names || manifest.phase_names->empty()) {
    throw std::invalid_argument("write_manifest: no phase names");
  }
  for (const std::string& name : *manifest.phase_names) {
    if (name.find(',') != std::string::npos || name.find('\n') != std::string::npos) {
      throw std::invalid_argument("write_manifest: phase name contains a delimiter: " + name);
    }
  }
  std::string content = "sample_id,file";
  for (const std::string& name : *manifest.phase_names) {
    content += ',';
    content += name;
  }
  content += '\n';
  for (const ManifestEntry& entry : manifest.entries) {
    content += entry.sample_id;
    content += ',';
    content += entry.file;
    for (double f : entry.fractions) {
      content += ',';
      content += format_double(f);
    }
    content += '\n';
  }
  write_file_atomic(path, content);
}

Spectrum read_spectrum(const fs::path& path, const GridPtr& grid) {
  XyData data = read_xy(path);
  if (!grid) throw std::invalid_argument("read_spectrum: null grid");
  if (data.angles != grid->angles()) {
    raise(errc::grid_mismatch, path.string() + " is not on the expected angle grid");
  }
  try {
    return Spectrum(grid, std::move(data.intensities));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.message());
  }
}

LoadedDataset load_dataset_keyed(const fs::path& manifest_path) {
  const Manifest manifest = read_manifest(manifest_path);
  const fs::path base = manifest_path.parent_path();

  GridPtr grid;
  std::string first_file;
  std::vector<Spectrum> spectra;
  std::vector<std::vector<double>> fraction_rows;
  std::vector<std::string> ids;
  spectra.reserve(manifest.entries.size());
  for (const ManifestEntry& entry : manifest.entries) {
    fs::path file = entry.file;
    if (file.is_relative()) file = base / file;
    if (!fs::exists(file)) {
      raise(errc::missing_file, file.string() + " (sample '" + entry.sample_id + "')");
    }
    XyData data = read_xy(file);
    if (!grid) {
      try {
        grid = std::make_shared<const AngleGrid>(std::move(data.angles));
      } catch (const std::invalid_argument& e) {
        raise(errc::parse_error, file.string() + ": bad angle column: " + e.what());
      }
      first_file = file.string();
    } else if (data.angles != grid->angles()) {
      raise(errc::grid_mismatch,
            file.string() + " has a different angle column than " + first_file);
    }
    try {
      spectra.emplace_back(grid, std::move(data.intensities));
    } catch (const Error& e) {
      throw Error(e.code(), file.string() + ": " + e.message());
    }
    fraction_rows.push_back(entry.fractions);
    ids.push_back(entry.sample_id);
  }

  try {
    Dataset dataset = validate_dataset(std::move(spectra), std::move(fraction_rows), grid,
                                       manifest.phase_names);
    return LoadedDataset{std::move(dataset), std::move(ids)};
  } catch (const Error& e) {
    throw Error(e.code(), manifest_path.string() + ": " + e.message());
  }
}

Dataset load_dataset(const fs::path& manifest_path) {
  return load_dataset_keyed(manifest_path).dataset;
}

namespace {
constexpr int kLibraryFormatVersion = 1;
}

void save_library(const PhaseLibrary& library, const fs::path& path) {
  std::string content = "# xrdunmix phase library\n";
  content += "format " + std::to_string(kLibraryFormatVersion) + "\n";
  content += "phases " + std::to_string(library.phase_count()) + "\n";
  content += "angles " + std::to_string(library.angle_count()) + "\n";
  for (const std::string& name : *library.phase_names()) {
    content += "phase " + name + "\n";
  }
  content += "grid";
  for (double v : library.grid()->angles()) {
    content += ' ';
    content += format_double(v);
  }
  content += '\n';
  for (std::size_t j = 0; j < library.phase_count(); ++j) {
    content += "pattern";
    for (double v : library.pattern(j)) {
      content += ' ';
      content += format_double(v);
    }
    content += '\n';
  }
  write_file_atomic(path, content);
}

PhaseLibrary load_library(const fs::path& path) {
  const std::vector<std::string> raw = read_lines(path);

  struct Directive {
    std::string keyword;
    std::string rest;
    std::size_t line_no;
  };
  std::vector<Directive> directives;
  for (std::size_t idx = 0; idx < raw.size(); ++idx) {
    const std::string line = strip_comment(raw[idx]);
    if (line.empty()) continue;
    const std::size_t space = line.find_first_of(" \t");
    Directive d;
    d.keyword = space == std::string::npos ? line : line.substr(0, space);
    d.rest = space == std::string::npos ? std::string() : strip_comment(line.substr(space + 1));
    d.line_no = idx + 1;
    directives.push_back(std::move(d));
  }

  std::size_t pos = 0;
  auto need = [&](const std::string& keyword) -> const Directive& {
    if (pos >= directives.size()) {
      raise(errc::parse_error, path.string() + ": truncated file, expected '" + keyword + "'");
    }
    const Directive& d = directives[pos];
    if (d.keyword != keyword) {
      raise(errc::parse_error, path.string() + ":" + std::to_string(d.line_no) + ": expected '" +
                                   keyword + "', found '" + d.keyword + "'");
    }
    ++pos;
    return d;
  };
  auto parse_count = [&](const Directive& d) -> std::size_t {
    std::size_t value = 0;
    const char* first = d.rest.data();
    const char* last = d.rest.data() + d.rest.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || value == 0) {
      raise(errc::parse_error,
            path.string() + ":" + std::to_string(d.line_no) + ": bad count '" + d.rest + "'");
    }
    return value;
  };

  const Directive& format = need("format");
  if (format.rest != std::to_string(kLibraryFormatVersion)) {
    raise(errc::version_mismatch, path.string() + ": library format '" + format.rest +
                                      "', this build reads format " +
                                      std::to_string(kLibraryFormatVersion));
  }
  const std::size_t phases = parse_count(need("phases"));
  const std::size_t angles = parse_count(need("angles"));

  PhaseNames names;
  names.reserve(phases);
  for (std::size_t j = 0; j < phases; ++j) {
    const Directive& d = need("phase");
    if (d.rest.empty()) {
      raise(errc::parse_error, path.string() + ":" + std::to_string(d.line_no) + ": empty phase name");
    }
    names.push_back(d.rest);
  }

  auto parse_row = [&](const Directive& d, std::size_t expected) {
    const std::vector<std::string> tokens = tokenize(d.rest);
    if (tokens.size() != expected) {
      raise(errc::parse_error, path.string() + ":" + std::to_string(d.line_no) + ": expected " +
                                   std::to_string(expected) + " values, got " +
                                   std::to_string(tokens.size()));
    }
    std::vector<double> values;
    values.reserve(expected);
    for (const std::string& token : tokens) {
      values.push_back(parse_double(token, path, d.line_no));
    }
    return values;
  };

  std::vector<double> grid_values = parse_row(need("grid"), angles);
  std::vector<double> data;
  data.reserve(phases * angles);
  for (std::size_t j = 0; j < phases; ++j) {
    std::vector<double> row = parse_row(need("pattern"), angles);
    data.insert(data.end(), row.begin(), row.end());
  }
  if (pos != directives.size()) {
    raise(errc::parse_error, path.string() + ":" + std::to_string(directives[pos].line_no) +
                                 ": unexpected content after patterns");
  }

  try {
    GridPtr grid = std::make_shared<const AngleGrid>(std::move(grid_values));
    return PhaseLibrary(grid, make_phase_names(std::move(names)), std::move(data));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.message());
  } catch (const std::invalid_argument& e) {
    raise(errc::parse_error, path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Figure exports
// ---------------------------------------------------------------------------

namespace {

class SvgWriter {
 public:
  SvgWriter(double width, double height) {
    body_ += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + format_double(width) +
             "\" height=\"" + format_double(height) + "\" viewBox=\"0 0 " + format_double(width) +
             " " + format_double(height) + "\">\n";
    body_ += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  }

  void rect(double x, double y, double w, double h, const std::string& fill) {
    body_ += "<rect x=\"" + format_double(x) + "\" y=\"" + format_double(y) + "\" width=\"" +
             format_double(w) + "\" height=\"" + format_double(h) + "\" fill=\"" + fill + "\"/>\n";
  }

  void line(double x1, double y1, double x2, double y2, const std::string& stroke,
            double stroke_width) {
    body_ += "<line x1=\"" + format_double(x1) + "\" y1=\"" + format_double(y1) + "\" x2=\"" +
             format_double(x2) + "\" y2=\"" + format_double(y2) + "\" stroke=\"" + stroke +
             "\" stroke-width=\"" + format_double(stroke_width) + "\"/>\n";
  }

  void polyline(const std::vector<std::pair<double, double>>& points, const std::string& stroke) {
    body_ += "<polyline fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"1\" points=\"";
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (i > 0) body_ += ' ';
      body_ += format_double(points[i].first) + "," + format_double(points[i].second);
    }
    body_ += "\"/>\n";
  }

  void text(double x, double y, double size, const std::string& content) {
    std::string escaped;
    for (char c : content) {
      switch (c) {
        case '&': escaped += "&amp;"; break;
        case '<': escaped += "&lt;"; break;
        case '>': escaped += "&gt;"; break;
        default: escaped += c;
      }
    }
    body_ += "<text x=\"" + format_double(x) + "\" y=\"" + format_double(y) + "\" font-size=\"" +
             format_double(size) + "\" font-family=\"sans-serif\">" + escaped + "</text>\n";
  }

  std::string finish() { return body_ + "</svg>\n"; }

 private:
  std::string body_;
};

const char* kActualColor = "#3b6fb6";     // blue: reference values
const char* kPredictedColor = "#d0442e";  // red: model predictions

}  // namespace

void write_composition_bars(const fs::path& csv_path, const fs::path& svg_path,
                            std::span<const std::string> sample_ids,
                            std::span<const Composition> actuals,
                            std::span<const Composition> predictions) {
  if (actuals.size() != predictions.size() || actuals.size() != sample_ids.size() ||
      actuals.empty()) {
    raise(errc::dimension_mismatch, "write_composition_bars: input lists disagree");
  }
  const std::size_t n = actuals.size();
  const std::size_t m = actuals.front().size();
  const PhaseNames& names = *actuals.front().phase_names();

  std::string csv = "sample_id,phase,actual,predicted\n";
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t j = 0; j < m; ++j) {
      csv += sample_ids[s];
      csv += ',';
      csv += names[j];
      csv += ',';
      csv += format_double(actuals[s][j]);
      csv += ',';
      csv += format_double(predictions[s][j]);
      csv += '\n';
    }
  }
  write_file_atomic(csv_path, csv);

  // One mini chart per sample: per phase, a blue (actual) and red (predicted)
  // bar pair on a shared baseline.
  const double bar_w = 7.0;
  const double pair_gap = 1.0;
  const double phase_gap = 5.0;
  const double plot_h = 46.0;
  const double cell_w = 16.0 + static_cast<double>(m) * (2.0 * bar_w + pair_gap + phase_gap);
  const double cell_h = plot_h + 24.0;
  const std::size_t cols = std::max<std::size_t>(1, static_cast<std::size_t>(960.0 / cell_w));
  const std::size_t rows = (n + cols - 1) / cols;

  SvgWriter svg(static_cast<double>(cols) * cell_w + 16.0,
                static_cast<double>(rows) * cell_h + 16.0);
  for (std::size_t s = 0; s < n; ++s) {
    const double x0 = 8.0 + static_cast<double>(s % cols) * cell_w;
    const double y0 = 8.0 + static_cast<double>(s / cols) * cell_h;
    const double base = y0 + plot_h;
    svg.line(x0, base, x0 + cell_w - 12.0, base, "#888888", 0.6);
    for (std::size_t j = 0; j < m; ++j) {
      const double gx = x0 + static_cast<double>(j) * (2.0 * bar_w + pair_gap + phase_gap);
      const double ha = actuals[s][j] * plot_h;
      const double hp = predictions[s][j] * plot_h;
      if (ha > 0.0) svg.rect(gx, base - ha, bar_w, ha, kActualColor);
      if (hp > 0.0) svg.rect(gx + bar_w + pair_gap, base - hp, bar_w, hp, kPredictedColor);
    }
    svg.text(x0, base + 12.0, 9.0, sample_ids[s]);
  }
  write_file_atomic(svg_path, svg.finish());
}

void write_predictions_csv(const fs::path& path, std::span<const std::string> sample_ids,
                           std::span<const Composition> predictions,
                           std::span<const Composition> actuals) {
  if (predictions.empty() || predictions.size() != sample_ids.size()) {
    raise(errc::dimension_mismatch, "write_predictions_csv: input lists disagree");
  }
  const bool with_actuals = !actuals.empty();
  if (with_actuals && actuals.size() != predictions.size()) {
    raise(errc::dimension_mismatch, "write_predictions_csv: label list disagrees");
  }
  const PhaseNames& names = *predictions.front().phase_names();
  std::string content = "sample_id";
  for (const std::string& name : names) content += ",pred_" + name;
  if (with_actuals) {
    for (const std::string& name : names) content += ",actual_" + name;
    content += ",rho";
  }
  content += '\n';
  for (std::size_t s = 0; s < predictions.size(); ++s) {
    content += sample_ids[s];
    for (std::size_t j = 0; j < names.size(); ++j) {
      content += ',';
      content += format_double(predictions[s][j]);
    }
    if (with_actuals) {
      for (std::size_t j = 0; j < names.size(); ++j) {
        content += ',';
        content += format_double(actuals[s][j]);
      }
      content += ',';
      content += format_double(rho(actuals[s], predictions[s]));
    }
    content += '\n';
  }
  write_file_atomic(path, content);
}

void write_phase_curves(const fs::path& out_dir, const PhaseLibrary& library,
                        const std::map<std::string, Spectrum>& overlays) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  for (const auto& [name, spectrum] : overlays) {
    if (std::find(library.phase_names()->begin(), library.phase_names()->end(), name) ==
        library.phase_names()->end()) {
      raise(errc::phase_mismatch, "overlay phase '" + name + "' is not in the library");
    }
    if (!same_grid(spectrum.grid(), library.grid())) {
      raise(errc::grid_mismatch, "overlay for '" + name + "' is not on the library grid");
    }
  }

  const AngleGrid& grid = *library.grid();
  const std::size_t m = library.phase_count();
  for (std::size_t j = 0; j < m; ++j) {
    const std::string file_name =
        "phase_" + std::to_string(j + 1) + "_" + sanitize_name((*library.phase_names())[j]) + ".xy";
    write_xy(out_dir / file_name, grid, library.pattern(j));
  }

  const double panel_w = 760.0;
  const double panel_h = 110.0;
  const double gap = 26.0;
  const double left = 60.0;
  SvgWriter svg(left + panel_w + 20.0,
                static_cast<double>(m) * (panel_h + gap) + 10.0);
  const double a_min = grid.front();
  const double a_span = std::max(grid.back() - grid.front(), 1e-12);
  for (std::size_t j = 0; j < m; ++j) {
    const double top = 10.0 + static_cast<double>(j) * (panel_h + gap);
    const std::span<const double> pattern = library.pattern(j);
    const std::string& name = (*library.phase_names())[j];
    double y_max = 0.0;
    for (double v : pattern) y_max = std::max(y_max, v);
    const auto overlay = overlays.find(name);
    if (overlay != overlays.end()) {
      for (double v : overlay->second.intensities()) y_max = std::max(y_max, v);
    }
    if (y_max <= 0.0) y_max = 1.0;

    auto to_points = [&](std::span<const double> values) {
      std::vector<std::pair<double, double>> points;
      points.reserve(values.size());
      for (std::size_t i = 0; i < values.size(); ++i) {
        const double px = left + (grid[i] - a_min) / a_span * panel_w;
        const double py = top + panel_h - values[i] / y_max * panel_h;
        points.emplace_back(px, py);
      }
      return points;
    };

    svg.line(left, top + panel_h, left + panel_w, top + panel_h, "#888888", 0.6);
    if (overlay != overlays.end()) {
      svg.polyline(to_points(overlay->second.intensities()), "#e6862a");
    }
    svg.polyline(to_points(pattern), kActualColor);
    svg.text(4.0, top + 12.0, 10.0, name);
  }
  write_file_atomic(out_dir / "phases.svg", svg.finish());
}

}  // namespace unmix::io
