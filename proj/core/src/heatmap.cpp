#include "fouriermix/heatmap.hpp"

#include "fouriermix/error.hpp"
#include "fouriermix/io.hpp"
#include "fouriermix/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace fouriermix {

namespace {

PredictionSet checked_predict(const Predictor& predictor, const LabeledDataset& ds, const EvalContext& ctx) {
  PredictionSet preds = predictor.predict(ds, ctx);
  if (preds.size() != ds.size())
    throw PredictorError(predictor.describe() + " returned " + std::to_string(preds.size()) +
                         " predictions for " + std::to_string(ds.size()) + " examples");
  preds.validate();
  return preds;
}

std::string k_string(WaveVector k) { return "k=(" + std::to_string(k.kx) + ", " + std::to_string(k.ky) + ")"; }

} // namespace

std::string_view to_string(HeatMetric metric) { return metric == HeatMetric::Error ? "error" : "rms"; }

HeatMetric parse_heat_metric(std::string_view text) {
  if (text == "error")
    return HeatMetric::Error;
  if (text == "rms" || text == "rms_cal")
    return HeatMetric::RmsCalibration;
  throw ConfigError("unknown metric '" + std::string(text) + "' (expected error|rms)");
}

SweepResult sweep_catalog(const Predictor& predictor, const LabeledDataset& ds, const SweepOptions& opts,
                          const BasisCatalog* catalog) {
  if (ds.empty())
    throw ConfigError("cannot sweep an empty dataset");
  ds.validate();
  const GridShape shape{ds.images.front().width, ds.images.front().height};

  BasisCatalog owned;
  if (!catalog) {
    owned = enumerate_catalog(shape);
    catalog = &owned;
  }
  if (catalog->shape != shape)
    throw ShapeMismatch("basis catalog shape " + catalog->shape.to_string() + " does not match image shape " +
                        shape.to_string() + " (width x height)");

  SweepResult result;
  result.shape = shape;
  result.options = opts;
  result.clean = evaluate(checked_predict(predictor, ds, EvalContext{std::nullopt, 0.0, opts.mode, opts.phase}),
                          opts.bins);
  result.entries.resize(catalog->size());

  auto run_entry = [&](std::size_t i) {
    const CatalogEntry& entry = catalog->entries[i];
    EntryResult& out = result.entries[i];
    out.k = entry.k;
    out.frequency = entry.frequency;
    std::optional<BasisMatrix> basis;
    try {
      basis.emplace(plane_wave(BasisSpec{shape, entry.k, opts.phase, opts.norm}));
    } catch (const DegenerateBasis&) {
      out.degenerate = true;
      out.report = result.clean;
      return;
    }
    const LabeledDataset perturbed = perturb_dataset(ds, *basis, PerturbOptions{opts.mode, opts.seed, opts.fixed_signs});
    try {
      out.report = evaluate(checked_predict(predictor, perturbed, EvalContext{entry.k, opts.norm, opts.mode, opts.phase}),
                            opts.bins);
    } catch (const std::exception& e) {
      throw PredictorError(k_string(entry.k) + ": " + e.what());
    }
  };

  if (opts.serial || !predictor.concurrent_safe()) {
    for (std::size_t i = 0; i < result.entries.size(); ++i)
      run_entry(i);
  } else {
    parallel_for(result.entries.size(), run_entry);
  }
  return result;
}

Heatmap to_heatmap(const SweepResult& result, HeatMetric metric) {
  Heatmap hm;
  hm.shape = result.shape;
  hm.metric = metric;
  hm.norm = result.options.norm;
  hm.mode = result.options.mode;
  hm.phase = result.options.phase;
  hm.values.assign(result.shape.cells(), std::numeric_limits<double>::quiet_NaN());

  for (const auto& e : result.entries) {
    const double v =
        metric == HeatMetric::Error ? e.report.classification_error : e.report.rms_calibration_error;
    const WaveVector c = conjugate(e.k, hm.shape);
    hm.at(e.k.kx, e.k.ky) = v;
    hm.at(c.kx, c.ky) = v;
  }
  for (int kx = 0; kx < hm.shape.dx; ++kx)
    for (int ky = 0; ky < hm.shape.dy; ++ky)
      if (std::isnan(hm.at(kx, ky))) {
        const WaveVector c = conjugate({kx, ky}, hm.shape);
        hm.at(kx, ky) = hm.at(c.kx, c.ky);
      }
  return hm;
}

Heatmap sweep(const Predictor& predictor, const LabeledDataset& ds, const SweepOptions& opts, HeatMetric metric) {
  return to_heatmap(sweep_catalog(predictor, ds, opts), metric);
}

Heatmap shift_center(const Heatmap& hm) {
  Heatmap out = hm;
  const int sx = hm.shape.dx / 2;
  const int sy = hm.shape.dy / 2;
  for (int kx = 0; kx < hm.shape.dx; ++kx)
    for (int ky = 0; ky < hm.shape.dy; ++ky)
      out.at((kx + sx) % hm.shape.dx, (ky + sy) % hm.shape.dy) = hm.at(kx, ky);
  out.centered = true;
  return out;
}

AttackRow summarize(const SweepResult& result) {
  AttackRow row;
  row.norm = result.options.norm;
  double sum_error = 0.0;
  double sum_rms = 0.0;
  for (const auto& e : result.entries) {
    if (e.degenerate) {
      ++row.degenerate;
      continue;
    }
    ++row.evaluated;
    sum_error += e.report.classification_error;
    sum_rms += e.report.rms_calibration_error;
    if (row.evaluated == 1 || e.report.classification_error > row.max_error) {
      row.max_error = e.report.classification_error;
      row.worst_error_k = e.k;
    }
    row.max_rms = std::max(row.max_rms, e.report.rms_calibration_error);
  }
  if (row.evaluated > 0) {
    row.mean_error = sum_error / static_cast<double>(row.evaluated);
    row.mean_rms = sum_rms / static_cast<double>(row.evaluated);
  }
  return row;
}

std::vector<AttackRow> attack_summary(const Predictor& predictor, const LabeledDataset& ds,
                                      std::span<const double> norms, SweepOptions base) {
  if (norms.empty())
    throw ConfigError("attack summary needs at least one norm");
  if (ds.empty())
    throw ConfigError("cannot sweep an empty dataset");
  const BasisCatalog catalog = enumerate_catalog({ds.images.front().width, ds.images.front().height});
  std::vector<AttackRow> rows;
  for (double norm : norms) {
    base.norm = norm;
    rows.push_back(summarize(sweep_catalog(predictor, ds, base, &catalog)));
  }
  return rows;
}

std::array<std::uint8_t, 3> colormap(double value) {
  static constexpr std::array<std::array<double, 3>, 5> stops{{
      {0.0, 0.0, 4.0},
      {87.0, 16.0, 110.0},
      {188.0, 55.0, 84.0},
      {249.0, 142.0, 9.0},
      {252.0, 255.0, 164.0},
  }};
  const double t = std::isnan(value) ? 0.0 : std::clamp(value, 0.0, 1.0) * (stops.size() - 1);
  const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(t), stops.size() - 2);
  const double f = t - static_cast<double>(i);
  std::array<std::uint8_t, 3> rgb{};
  for (int c = 0; c < 3; ++c)
    rgb[c] = static_cast<std::uint8_t>(std::lround(stops[i][c] + f * (stops[i + 1][c] - stops[i][c])));
  return rgb;
}

void write_heatmap_csv(const Heatmap& hm, const std::filesystem::path& path) {
  const Heatmap view = hm.centered ? hm : shift_center(hm);
  std::ofstream out(path);
  if (!out)
    throw IoError("cannot write " + path.string());
  out << std::fixed << std::setprecision(10);
  for (int kx = 0; kx < view.shape.dx; ++kx) {
    for (int ky = 0; ky < view.shape.dy; ++ky) {
      if (ky)
        out << ',';
      out << view.at(kx, ky);
    }
    out << '\n';
  }
  if (!out)
    throw IoError("failed writing " + path.string());
}

std::vector<std::vector<double>> read_csv_grid(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot open " + path.string());
  std::vector<std::vector<double>> grid;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty())
      continue;
    std::vector<double> row;
    std::stringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ','))
      row.push_back(std::stod(cell));
    grid.push_back(std::move(row));
  }
  return grid;
}

void write_heatmap_png(const Heatmap& hm, const std::filesystem::path& path, int scale) {
  if (scale < 1)
    throw ConfigError("heatmap scale must be >= 1");
  const Heatmap view = hm.centered ? hm : shift_center(hm);
  Image img(view.shape.dx * scale, view.shape.dy * scale, 3);
  for (int row = 0; row < img.height; ++row)
    for (int col = 0; col < img.width; ++col) {
      const auto rgb = colormap(view.at(row / scale, col / scale));
      for (int c = 0; c < 3; ++c)
        img.at(row, col, c) = rgb[c] / 255.0;
    }
  write_png(img, path);
}

void render(const Heatmap& hm, const std::string& prefix, int scale) {
  write_heatmap_csv(hm, prefix + ".csv");
  write_heatmap_png(hm, prefix + ".png", scale);
}

} // namespace fouriermix
