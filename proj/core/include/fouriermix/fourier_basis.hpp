#pragma once

#include "fouriermix/rng.hpp"

#include <compare>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fouriermix {

// Grid of a basis matrix. x runs along the width (dx columns), y along the
// height (dy rows), so an image of height H and width W has GridShape{W, H}.
struct GridShape {
  int dx = 0;
  int dy = 0;

  std::size_t cells() const { return static_cast<std::size_t>(dx) * dy; }
  std::string to_string() const; // "dxxdy"
  friend auto operator<=>(const GridShape&, const GridShape&) = default;
};

struct WaveVector {
  int kx = 0;
  int ky = 0;
  friend auto operator<=>(const WaveVector&, const WaveVector&) = default;
};

// (-kx mod dx, -ky mod dy): the wave vector occupying the mirrored DFT bin.
WaveVector conjugate(WaveVector k, GridShape shape);

struct BasisSpec {
  GridShape shape;
  WaveVector k;
  double phase = std::numbers::pi / 4; // radians
  double target_norm = 1.0;            // Frobenius norm of the matrix

  // Throws ConfigError for non-positive norm, out-of-grid k, or a non-finite phase.
  void validate() const;
};

// Row-major (y, x) plane wave with an exactly controlled Frobenius norm.
class BasisMatrix {
public:
  BasisMatrix(BasisSpec spec, std::vector<double> values)
      : spec_(spec), values_(std::move(values)) {}

  const BasisSpec& spec() const { return spec_; }
  GridShape shape() const { return spec_.shape; }
  std::span<const double> values() const { return values_; }
  double at(int x, int y) const { return values_[static_cast<std::size_t>(y) * spec_.shape.dx + x]; }
  double frobenius_norm() const;

private:
  BasisSpec spec_;
  std::vector<double> values_;
};

// sqrt((kx/dx)^2 + (ky/dy)^2), in cycles per pixel.
double frequency(WaveVector k, GridShape shape);

// Exact integer key ordering frequencies: (kx*dy)^2 + (ky*dx)^2.
std::int64_t frequency_key(WaveVector k, GridShape shape);

// U[y][x] = A * cos(2*pi*(x*kx/dx + y*ky/dy) - phase), i.e. A cos(2 pi f r.khat - phase)
// with khat the direction of (kx/dx, ky/dy). A = target_norm / ||cos field||_F.
// Throws DegenerateBasis when the cosine field is numerically zero.
BasisMatrix plane_wave(const BasisSpec& spec);

struct CatalogEntry {
  WaveVector k;
  double frequency = 0.0;
};

// Non-degenerate wave vectors of a grid, in (kx, ky) lexicographic order.
struct BasisCatalog {
  GridShape shape;
  std::vector<CatalogEntry> entries;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
};

// dx * (floor(dy / 2) + 1)
std::int64_t catalog_upper_bound(GridShape shape);

inline constexpr double kReferencePhase = std::numbers::pi / 4;
// Held-out evaluation phase (3/4 of a turn).
inline constexpr double kEvalPhase = 1.5 * std::numbers::pi;
inline constexpr double kTrainPhases[3] = {0.0, 2.0 * std::numbers::pi / 3.0, 4.0 * std::numbers::pi / 3.0};

// Candidates kx in [0, dx), ky in [0, floor(dy/2)]. A candidate is dropped when
// its reference matrix (phase pi/4, norm 1) matches, up to sign and within
// 1e-9, the matrix of an earlier entry at phase +pi/4 or -pi/4. The -pi/4
// comparison is what catches conjugate pairs k and -k.
BasisCatalog enumerate_catalog(GridShape shape);

struct TrainSampling {
  double norm_lo = 1.0;
  double norm_hi = 2.0;
  std::vector<double> phases{std::begin(kTrainPhases), std::end(kTrainPhases)};
};

// Two-stage, frequency-uniform sampler: pick a distinct frequency uniformly,
// then a wave vector uniformly among the catalog entries sharing it.
class TrainBasisSampler {
public:
  TrainBasisSampler(BasisCatalog catalog, TrainSampling sampling = {});

  BasisSpec sample(Rng& rng) const;

  const BasisCatalog& catalog() const { return catalog_; }
  const TrainSampling& sampling() const { return sampling_; }
  std::size_t group_count() const { return groups_.size(); }
  // Catalog indices belonging to frequency group g (groups sorted by frequency).
  std::span<const std::size_t> group(std::size_t g) const { return groups_[g]; }

private:
  BasisCatalog catalog_;
  TrainSampling sampling_;
  std::vector<std::vector<std::size_t>> groups_;
};

BasisSpec sample_train_basis(const BasisCatalog& catalog, Rng& rng, std::pair<double, double> norm_range,
                             std::span<const double> phase_set);

} // namespace fouriermix
