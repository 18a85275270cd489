#pragma once

#include "fouriermix/fourier_basis.hpp"
#include "fouriermix/image.hpp"
#include "fouriermix/metrics.hpp"
#include "fouriermix/perturb.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fouriermix {

// What the predictor is being asked to score. `k` is empty for the clean set.
struct EvalContext {
  std::optional<WaveVector> k;
  double norm = 0.0;
  ChannelMode mode = ChannelMode::Aligned;
  double phase = 0.0;
};

// Evaluation contract: one PredictionSet per dataset, same length and order.
// Implementations must be deterministic for a fixed dataset and model state.
class Predictor {
public:
  virtual ~Predictor() = default;
  virtual PredictionSet predict(const LabeledDataset& ds, const EvalContext& ctx) const = 0;
  // False serializes sweep evaluations.
  virtual bool concurrent_safe() const { return true; }
  virtual std::string describe() const { return "predictor"; }
};

enum class HeatMetric { Error, RmsCalibration };
std::string_view to_string(HeatMetric metric);
HeatMetric parse_heat_metric(std::string_view text); // "error" | "rms"

struct SweepOptions {
  double norm = 2.0;
  ChannelMode mode = ChannelMode::Aligned;
  double phase = kEvalPhase;
  std::uint64_t seed = 0;
  bool fixed_signs = false;
  int bins = kDefaultCalibrationBins;
  bool serial = false;
};

struct EntryResult {
  WaveVector k;
  double frequency = 0.0;
  // The plane wave vanishes at the sweep phase; the entry holds the clean metrics
  // and is left out of attack aggregates.
  bool degenerate = false;
  MetricReport report;
};

struct SweepResult {
  GridShape shape;
  SweepOptions options;
  MetricReport clean;
  std::vector<EntryResult> entries; // catalog order
};

// Perturbs the whole dataset with every catalog entry and scores it.
SweepResult sweep_catalog(const Predictor& predictor, const LabeledDataset& ds, const SweepOptions& opts,
                          const BasisCatalog* catalog = nullptr);

// Grid indexed [kx][ky] (dx rows, dy columns).
struct Heatmap {
  GridShape shape;
  HeatMetric metric = HeatMetric::Error;
  double norm = 0.0;
  ChannelMode mode = ChannelMode::Aligned;
  double phase = 0.0;
  bool centered = false;
  std::vector<double> values;

  double at(int kx, int ky) const { return values[static_cast<std::size_t>(kx) * shape.dy + ky]; }
  double& at(int kx, int ky) { return values[static_cast<std::size_t>(kx) * shape.dy + ky]; }
};

// Writes each entry's metric at k and at its conjugate cell; any cell left
// empty copies its conjugate.
Heatmap to_heatmap(const SweepResult& result, HeatMetric metric);
Heatmap sweep(const Predictor& predictor, const LabeledDataset& ds, const SweepOptions& opts, HeatMetric metric);

// Cyclic roll by (floor(dx/2), floor(dy/2)): cell (0,0) lands in the centre.
Heatmap shift_center(const Heatmap& hm);

struct AttackRow {
  double norm = 0.0;
  double mean_error = 0.0;
  double max_error = 0.0;
  double mean_rms = 0.0;
  double max_rms = 0.0;
  std::size_t evaluated = 0;  // non-degenerate catalog entries
  std::size_t degenerate = 0;
  WaveVector worst_error_k;
};

// Unweighted mean and worst case over the non-degenerate entries.
AttackRow summarize(const SweepResult& result);
std::vector<AttackRow> attack_summary(const Predictor& predictor, const LabeledDataset& ds,
                                      std::span<const double> norms, SweepOptions base = {});

// Monotone dark-to-bright map of [0, 1] (inferno-like; five linear stops).
std::array<std::uint8_t, 3> colormap(double value);

// CSV: dx rows by dy columns, centre-shifted, 10 decimals.
void write_heatmap_csv(const Heatmap& hm, const std::filesystem::path& path);
std::vector<std::vector<double>> read_csv_grid(const std::filesystem::path& path);
// PNG of height dx * scale and width dy * scale, centre-shifted.
void write_heatmap_png(const Heatmap& hm, const std::filesystem::path& path, int scale = 1);
// prefix.csv and prefix.png
void render(const Heatmap& hm, const std::string& prefix, int scale = 1);

} // namespace fouriermix
