#include "fouriermix/fourier_basis.hpp"

#include "fouriermix/error.hpp"

#include <cmath>
#include <map>
#include <numeric>

namespace fouriermix {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kDegenerateNorm = 1e-12;
constexpr double kDuplicateTolerance = 1e-9;

// Unscaled cos(2*pi*(x*kx/dx + y*ky/dy) - phase). The products are reduced
// modulo the grid before the division so that conjugate wave vectors produce
// bit-identical arguments up to the sign flip.
std::vector<double> cosine_field(GridShape shape, WaveVector k, double phase) {
  std::vector<double> field(shape.cells());
  for (int y = 0; y < shape.dy; ++y) {
    const double fy = static_cast<double>((static_cast<std::int64_t>(y) * k.ky) % shape.dy) / shape.dy;
    for (int x = 0; x < shape.dx; ++x) {
      const double fx = static_cast<double>((static_cast<std::int64_t>(x) * k.kx) % shape.dx) / shape.dx;
      field[static_cast<std::size_t>(y) * shape.dx + x] = std::cos(kTwoPi * (fx + fy) - phase);
    }
  }
  return field;
}

double l2(std::span<const double> v) {
  return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

// max |a - sign * b| < tol, with early exit.
bool matches(std::span<const double> a, std::span<const double> b, double sign) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i] - sign * b[i]) >= kDuplicateTolerance)
      return false;
  return true;
}

} // namespace

std::string GridShape::to_string() const { return std::to_string(dx) + "x" + std::to_string(dy); }

WaveVector conjugate(WaveVector k, GridShape shape) {
  return {(shape.dx - k.kx % shape.dx) % shape.dx, (shape.dy - k.ky % shape.dy) % shape.dy};
}

void BasisSpec::validate() const {
  if (shape.dx < 1 || shape.dy < 1)
    throw ConfigError("basis shape " + shape.to_string() + " must be at least 1x1");
  if (k.kx < 0 || k.kx >= shape.dx || k.ky < 0 || k.ky >= shape.dy)
    throw ConfigError("wave vector (" + std::to_string(k.kx) + ", " + std::to_string(k.ky) +
                      ") outside grid " + shape.to_string());
  if (!(target_norm > 0.0) || !std::isfinite(target_norm))
    throw ConfigError("basis norm must be positive and finite, got " + std::to_string(target_norm));
  if (!std::isfinite(phase))
    throw ConfigError("basis phase must be finite");
}

double BasisMatrix::frobenius_norm() const { return l2(values_); }

double frequency(WaveVector k, GridShape shape) {
  const double fx = static_cast<double>(k.kx) / shape.dx;
  const double fy = static_cast<double>(k.ky) / shape.dy;
  return std::sqrt(fx * fx + fy * fy);
}

std::int64_t frequency_key(WaveVector k, GridShape shape) {
  const std::int64_t a = static_cast<std::int64_t>(k.kx) * shape.dy;
  const std::int64_t b = static_cast<std::int64_t>(k.ky) * shape.dx;
  return a * a + b * b;
}

BasisMatrix plane_wave(const BasisSpec& spec) {
  spec.validate();
  auto field = cosine_field(spec.shape, spec.k, spec.phase);
  const double raw = l2(field);
  if (raw < kDegenerateNorm)
    throw DegenerateBasis("plane wave k=(" + std::to_string(spec.k.kx) + ", " + std::to_string(spec.k.ky) +
                          ") on " + spec.shape.to_string() + " vanishes at phase " + std::to_string(spec.phase));
  const double amplitude = spec.target_norm / raw;
  for (double& v : field)
    v *= amplitude;
  return BasisMatrix(spec, std::move(field));
}

std::int64_t catalog_upper_bound(GridShape shape) {
  return static_cast<std::int64_t>(shape.dx) * (shape.dy / 2 + 1);
}

BasisCatalog enumerate_catalog(GridShape shape) {
  if (shape.dx < 1 || shape.dy < 1)
    throw ConfigError("catalog shape " + shape.to_string() + " must be at least 1x1");

  struct Reference {
    std::vector<double> plus;  // phase +pi/4
    std::vector<double> minus; // phase -pi/4
  };
  auto reference = [&](WaveVector k, double phase) {
    const auto basis = plane_wave(BasisSpec{shape, k, phase, 1.0});
    return std::vector<double>(basis.values().begin(), basis.values().end());
  };

  BasisCatalog catalog{shape, {}};
  std::vector<Reference> kept;
  for (int kx = 0; kx < shape.dx; ++kx) {
    for (int ky = 0; ky <= shape.dy / 2; ++ky) {
      const WaveVector k{kx, ky};
      auto plus = reference(k, kReferencePhase);
      bool duplicate = false;
      for (const auto& ref : kept) {
        if (matches(plus, ref.plus, 1.0) || matches(plus, ref.plus, -1.0) || matches(plus, ref.minus, 1.0) ||
            matches(plus, ref.minus, -1.0)) {
          duplicate = true;
          break;
        }
      }
      if (duplicate)
        continue;
      kept.push_back({std::move(plus), reference(k, kTwoPi - kReferencePhase)});
      catalog.entries.push_back({k, frequency(k, shape)});
    }
  }
  return catalog;
}

TrainBasisSampler::TrainBasisSampler(BasisCatalog catalog, TrainSampling sampling)
    : catalog_(std::move(catalog)), sampling_(std::move(sampling)) {
  if (catalog_.empty())
    throw ConfigError("cannot sample from an empty basis catalog");
  if (sampling_.phases.empty())
    throw ConfigError("phase set must not be empty");
  if (!(sampling_.norm_lo <= sampling_.norm_hi) || !(sampling_.norm_lo > 0.0))
    throw ConfigError("norm range must satisfy 0 < lo <= hi");

  std::map<std::int64_t, std::vector<std::size_t>> by_key;
  for (std::size_t i = 0; i < catalog_.entries.size(); ++i)
    by_key[frequency_key(catalog_.entries[i].k, catalog_.shape)].push_back(i);
  groups_.reserve(by_key.size());
  for (auto& [key, members] : by_key)
    groups_.push_back(std::move(members));
}

BasisSpec TrainBasisSampler::sample(Rng& rng) const {
  const auto& members = groups_[uniform_index(rng, groups_.size())];
  const auto& entry = catalog_.entries[members[uniform_index(rng, members.size())]];
  BasisSpec spec;
  spec.shape = catalog_.shape;
  spec.k = entry.k;
  spec.target_norm = uniform_real(rng, sampling_.norm_lo, sampling_.norm_hi);
  spec.phase = sampling_.phases[uniform_index(rng, sampling_.phases.size())];
  return spec;
}

BasisSpec sample_train_basis(const BasisCatalog& catalog, Rng& rng, std::pair<double, double> norm_range,
                             std::span<const double> phase_set) {
  TrainSampling sampling{norm_range.first, norm_range.second, {phase_set.begin(), phase_set.end()}};
  return TrainBasisSampler(catalog, std::move(sampling)).sample(rng);
}

} // namespace fouriermix
