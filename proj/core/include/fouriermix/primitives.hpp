#pragma once

#include "fouriermix/fourier_basis.hpp"
#include "fouriermix/image.hpp"
#include "fouriermix/perturb.hpp"
#include "fouriermix/rng.hpp"

#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace fouriermix {

// Primitive families: spatial (S), vision (V), CIFAR-C overlap (C), Fourier (F).
enum class SetTag : char { Spatial = 'S', Vision = 'V', CorruptionOverlap = 'C', Fourier = 'F' };

// magnitude in [0, 1]; the rng supplies sign flips and any other draws.
using Transform = std::function<Image(const Image&, double magnitude, Rng&)>;

struct Primitive {
  std::string name;
  SetTag set = SetTag::Spatial;
  Transform transform;

  Image operator()(const Image& img, double magnitude, Rng& rng) const { return transform(img, magnitude, rng); }
};

class PrimitiveSet {
public:
  PrimitiveSet() = default;
  explicit PrimitiveSet(std::vector<Primitive> members);

  // Throws ConfigError if the name is already present.
  void add(Primitive p);
  // Adds every member of `other` whose name is not present yet.
  void merge(const PrimitiveSet& other);

  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  const Primitive& operator[](std::size_t i) const { return members_[i]; }
  const Primitive* find(std::string_view name) const;
  std::vector<std::string> names() const;

  auto begin() const { return members_.begin(); }
  auto end() const { return members_.end(); }

private:
  std::vector<Primitive> members_;
};

struct FourierPrimitiveOptions {
  TrainSampling sampling;
  // Probability of a random-flip (vs channel-aligned) application.
  double flip_probability = 0.5;
};

PrimitiveSet spatial_primitives();            // rotate, shear_x, shear_y, translate_x, translate_y
PrimitiveSet vision_primitives();             // contrast, equalize, posterize, solarize
PrimitiveSet corruption_overlap_primitives(); // brightness, color, contrast, sharpness
PrimitiveSet fourier_primitives(const FourierPrimitiveOptions& opts = {});

// Union of the sets named by letters from "svcf" (case-insensitive), in that
// order; "none" or "" yields an empty set. Shared names (contrast) appear once.
PrimitiveSet primitive_set_from_letters(std::string_view letters, const FourierPrimitiveOptions& opts = {});

// Deterministic parameterised operations. Geometric ops sample bilinearly and
// fill out-of-bounds samples with 0.5.
namespace ops {

inline constexpr double kFill = 0.5;
inline constexpr double kMaxRotateDegrees = 30.0;
inline constexpr double kMaxShear = 0.3;
inline constexpr double kMaxTranslateFraction = 1.0 / 3.0;
inline constexpr double kMaxEnhanceDelta = 0.9; // factor in [0.1, 1.9]
inline constexpr int kMinPosterizeBits = 4;
inline constexpr double kMinSolarizeThreshold = 0.43;

// Affine resampling: output (x, y) samples the input at
// (a*x + b*y + c, d*x + e*y + f).
struct AffineMap {
  double a = 1, b = 0, c = 0;
  double d = 0, e = 1, f = 0;
};
Image affine(const Image& img, const AffineMap& map, double fill = kFill);
double sample_bilinear(const Image& img, double u, double v, int channel, double fill = kFill);

Image rotate_degrees(const Image& img, double degrees);
Image shear_x_by(const Image& img, double shear);
Image shear_y_by(const Image& img, double shear);
Image translate_x_by(const Image& img, double pixels);
Image translate_y_by(const Image& img, double pixels);

// out = clip(f * img + (1 - f) * base)
Image enhance_brightness(const Image& img, double factor); // base: zeros
Image enhance_color(const Image& img, double factor);      // base: per-pixel luminance
Image enhance_contrast(const Image& img, double factor);   // base: mean luminance
Image enhance_sharpness(const Image& img, double factor);  // base: 3x3 smoothed image

Image posterize_bits(const Image& img, int bits);
Image solarize_threshold(const Image& img, double threshold); // inverts values > threshold
Image equalize(const Image& img);                              // per channel, 256 bins

double luminance(const Image& img, int y, int x);

} // namespace ops

// The draw behind the Fourier primitive, exposed for distribution tests.
struct FourierDraw {
  BasisSpec spec;
  ChannelMode mode = ChannelMode::Aligned;
};
FourierDraw draw_fourier(const TrainBasisSampler& sampler, double flip_probability, Rng& rng);

// Shared, lazily built per-shape samplers (catalog enumeration is not free).
std::shared_ptr<const TrainBasisSampler> cached_sampler(GridShape shape, const TrainSampling& sampling);

} // namespace fouriermix
