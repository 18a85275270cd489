#include "fouriermix/primitives.hpp"

#include "fouriermix/error.hpp"
#include "fouriermix/io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

namespace fouriermix {

// ---------------------------------------------------------------------------
// PrimitiveSet
// ---------------------------------------------------------------------------

PrimitiveSet::PrimitiveSet(std::vector<Primitive> members) {
  for (auto& p : members)
    add(std::move(p));
}

void PrimitiveSet::add(Primitive p) {
  if (find(p.name))
    throw ConfigError("duplicate primitive '" + p.name + "'");
  members_.push_back(std::move(p));
}

void PrimitiveSet::merge(const PrimitiveSet& other) {
  for (const auto& p : other)
    if (!find(p.name))
      members_.push_back(p);
}

const Primitive* PrimitiveSet::find(std::string_view name) const {
  for (const auto& p : members_)
    if (p.name == name)
      return &p;
  return nullptr;
}

std::vector<std::string> PrimitiveSet::names() const {
  std::vector<std::string> out;
  for (const auto& p : members_)
    out.push_back(p.name);
  return out;
}

// ---------------------------------------------------------------------------
// Deterministic operations
// ---------------------------------------------------------------------------

namespace ops {

double sample_bilinear(const Image& img, double u, double v, int channel, double fill) {
  const double fx = std::floor(u);
  const double fy = std::floor(v);
  const double ax = u - fx;
  const double ay = v - fy;
  const int x0 = static_cast<int>(fx);
  const int y0 = static_cast<int>(fy);
  const std::array<double, 2> wx{1.0 - ax, ax};
  const std::array<double, 2> wy{1.0 - ay, ay};
  double acc = 0.0;
  for (int j = 0; j < 2; ++j) {
    if (wy[j] == 0.0)
      continue;
    for (int i = 0; i < 2; ++i) {
      if (wx[i] == 0.0)
        continue;
      const int x = x0 + i;
      const int y = y0 + j;
      const bool inside = x >= 0 && x < img.width && y >= 0 && y < img.height;
      acc += wx[i] * wy[j] * (inside ? img.at(y, x, channel) : fill);
    }
  }
  return acc;
}

Image affine(const Image& img, const AffineMap& m, double fill) {
  Image out(img.height, img.width, img.channels);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const double u = m.a * x + m.b * y + m.c;
      const double v = m.d * x + m.e * y + m.f;
      for (int c = 0; c < img.channels; ++c)
        out.at(y, x, c) = sample_bilinear(img, u, v, c, fill);
    }
  clip_in_place(out);
  return out;
}

Image rotate_degrees(const Image& img, double degrees) {
  const double t = degrees * std::numbers::pi / 180.0;
  const double cs = std::cos(t);
  const double sn = std::sin(t);
  const double cx = (img.width - 1) / 2.0;
  const double cy = (img.height - 1) / 2.0;
  // Inverse map about the image centre.
  AffineMap m{cs, sn, cx - cs * cx - sn * cy, -sn, cs, cy + sn * cx - cs * cy};
  return affine(img, m);
}

Image shear_x_by(const Image& img, double shear) { return affine(img, {1, shear, 0, 0, 1, 0}); }
Image shear_y_by(const Image& img, double shear) { return affine(img, {1, 0, 0, shear, 1, 0}); }
Image translate_x_by(const Image& img, double pixels) { return affine(img, {1, 0, pixels, 0, 1, 0}); }
Image translate_y_by(const Image& img, double pixels) { return affine(img, {1, 0, 0, 0, 1, pixels}); }

double luminance(const Image& img, int y, int x) {
  if (img.channels < 3)
    return img.at(y, x, 0);
  return 0.299 * img.at(y, x, 0) + 0.587 * img.at(y, x, 1) + 0.114 * img.at(y, x, 2);
}

namespace {

template <typename Base>
Image blend(const Image& img, double factor, Base base) {
  Image out = img;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < img.channels; ++c) {
        double& v = out.at(y, x, c);
        v = std::min(1.0, std::max(0.0, factor * v + (1.0 - factor) * base(y, x, c)));
      }
  return out;
}

} // namespace

Image enhance_brightness(const Image& img, double factor) {
  return blend(img, factor, [](int, int, int) { return 0.0; });
}

Image enhance_color(const Image& img, double factor) {
  return blend(img, factor, [&](int y, int x, int) { return luminance(img, y, x); });
}

Image enhance_contrast(const Image& img, double factor) {
  double mean = 0.0;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      mean += luminance(img, y, x);
  if (img.height > 0 && img.width > 0)
    mean /= static_cast<double>(img.height) * img.width;
  return blend(img, factor, [mean](int, int, int) { return mean; });
}

Image enhance_sharpness(const Image& img, double factor) {
  // 3x3 smoothing kernel [[1,1,1],[1,5,1],[1,1,1]] / 13; border pixels are kept.
  Image smooth = img;
  for (int y = 1; y + 1 < img.height; ++y)
    for (int x = 1; x + 1 < img.width; ++x)
      for (int c = 0; c < img.channels; ++c) {
        double acc = 4.0 * img.at(y, x, c);
        for (int j = -1; j <= 1; ++j)
          for (int i = -1; i <= 1; ++i)
            acc += img.at(y + j, x + i, c);
        smooth.at(y, x, c) = acc / 13.0;
      }
  return blend(img, factor, [&](int y, int x, int c) { return smooth.at(y, x, c); });
}

Image posterize_bits(const Image& img, int bits) {
  if (bits < 0 || bits > 8)
    throw ConfigError("posterize bits must lie in [0, 8]");
  if (bits == 8)
    return img;
  const int mask = ~((1 << (8 - bits)) - 1) & 0xFF;
  Image out = img;
  for (double& v : out.data)
    v = (to_byte(v) & mask) / 255.0;
  return out;
}

Image solarize_threshold(const Image& img, double threshold) {
  Image out = img;
  for (double& v : out.data)
    if (v > threshold)
      v = 1.0 - v;
  return out;
}

Image equalize(const Image& img) {
  Image out = img;
  const std::size_t pixels = static_cast<std::size_t>(img.height) * img.width;
  for (int c = 0; c < img.channels; ++c) {
    std::array<std::size_t, 256> hist{};
    for (std::size_t p = 0; p < pixels; ++p)
      ++hist[to_byte(img.data[p * img.channels + c])];

    // Lookup table in the style of the common imaging-library equalizer:
    // step = (total - count of the last occupied bin) / 255.
    std::size_t last = 0;
    std::size_t occupied = 0;
    for (std::size_t b = 0; b < 256; ++b)
      if (hist[b]) {
        last = hist[b];
        ++occupied;
      }
    std::array<int, 256> lut{};
    const std::size_t step = occupied > 1 ? (pixels - last) / 255 : 0;
    if (step == 0) {
      for (int b = 0; b < 256; ++b)
        lut[b] = b;
    } else {
      std::size_t n = step / 2;
      for (std::size_t b = 0; b < 256; ++b) {
        lut[b] = static_cast<int>(std::min<std::size_t>(255, n / step));
        n += hist[b];
      }
    }
    for (std::size_t p = 0; p < pixels; ++p) {
      double& v = out.data[p * img.channels + c];
      v = lut[to_byte(v)] / 255.0;
    }
  }
  return out;
}

} // namespace ops

// ---------------------------------------------------------------------------
// Magnitude-parameterised primitives
// ---------------------------------------------------------------------------

namespace {

void check_magnitude(double magnitude) {
  if (!(magnitude >= 0.0 && magnitude <= 1.0))
    throw ConfigError("primitive magnitude must lie in [0, 1], got " + std::to_string(magnitude));
}

double signed_level(double magnitude, double max_value, Rng& rng) {
  check_magnitude(magnitude);
  const double level = magnitude * max_value;
  return coin_flip(rng) ? -level : level;
}

double enhance_factor(double magnitude, Rng& rng) {
  return 1.0 + signed_level(magnitude, ops::kMaxEnhanceDelta, rng);
}

Primitive make(std::string name, SetTag tag, Transform fn) { return Primitive{std::move(name), tag, std::move(fn)}; }

Primitive contrast_primitive(SetTag tag) {
  return make("contrast", tag, [](const Image& img, double m, Rng& rng) {
    return ops::enhance_contrast(img, enhance_factor(m, rng));
  });
}

} // namespace

PrimitiveSet spatial_primitives() {
  PrimitiveSet set;
  set.add(make("rotate", SetTag::Spatial, [](const Image& img, double m, Rng& rng) {
    return ops::rotate_degrees(img, signed_level(m, ops::kMaxRotateDegrees, rng));
  }));
  set.add(make("shear_x", SetTag::Spatial, [](const Image& img, double m, Rng& rng) {
    return ops::shear_x_by(img, signed_level(m, ops::kMaxShear, rng));
  }));
  set.add(make("shear_y", SetTag::Spatial, [](const Image& img, double m, Rng& rng) {
    return ops::shear_y_by(img, signed_level(m, ops::kMaxShear, rng));
  }));
  set.add(make("translate_x", SetTag::Spatial, [](const Image& img, double m, Rng& rng) {
    return ops::translate_x_by(img, signed_level(m, ops::kMaxTranslateFraction * img.width, rng));
  }));
  set.add(make("translate_y", SetTag::Spatial, [](const Image& img, double m, Rng& rng) {
    return ops::translate_y_by(img, signed_level(m, ops::kMaxTranslateFraction * img.height, rng));
  }));
  return set;
}

PrimitiveSet vision_primitives() {
  PrimitiveSet set;
  set.add(contrast_primitive(SetTag::Vision));
  set.add(make("equalize", SetTag::Vision, [](const Image& img, double m, Rng&) {
    check_magnitude(m);
    return ops::equalize(img);
  }));
  set.add(make("posterize", SetTag::Vision, [](const Image& img, double m, Rng&) {
    check_magnitude(m);
    const int reduction = static_cast<int>(std::lround(m * (8 - ops::kMinPosterizeBits)));
    return ops::posterize_bits(img, 8 - reduction);
  }));
  set.add(make("solarize", SetTag::Vision, [](const Image& img, double m, Rng&) {
    check_magnitude(m);
    return ops::solarize_threshold(img, 1.0 - m * (1.0 - ops::kMinSolarizeThreshold));
  }));
  return set;
}

PrimitiveSet corruption_overlap_primitives() {
  PrimitiveSet set;
  set.add(make("brightness", SetTag::CorruptionOverlap, [](const Image& img, double m, Rng& rng) {
    return ops::enhance_brightness(img, enhance_factor(m, rng));
  }));
  set.add(make("color", SetTag::CorruptionOverlap, [](const Image& img, double m, Rng& rng) {
    return ops::enhance_color(img, enhance_factor(m, rng));
  }));
  set.add(contrast_primitive(SetTag::CorruptionOverlap));
  set.add(make("sharpness", SetTag::CorruptionOverlap, [](const Image& img, double m, Rng& rng) {
    return ops::enhance_sharpness(img, enhance_factor(m, rng));
  }));
  return set;
}

FourierDraw draw_fourier(const TrainBasisSampler& sampler, double flip_probability, Rng& rng) {
  FourierDraw draw;
  draw.spec = sampler.sample(rng);
  draw.mode = std::bernoulli_distribution(flip_probability)(rng) ? ChannelMode::RandomFlip : ChannelMode::Aligned;
  return draw;
}

std::shared_ptr<const TrainBasisSampler> cached_sampler(GridShape shape, const TrainSampling& sampling) {
  using Key = std::tuple<int, int, double, double, std::vector<double>>;
  static std::mutex mutex;
  static std::map<Key, std::shared_ptr<const TrainBasisSampler>> cache;

  Key key{shape.dx, shape.dy, sampling.norm_lo, sampling.norm_hi, sampling.phases};
  std::lock_guard lock(mutex);
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, std::make_shared<const TrainBasisSampler>(enumerate_catalog(shape), sampling)).first;
  return it->second;
}

PrimitiveSet fourier_primitives(const FourierPrimitiveOptions& opts) {
  PrimitiveSet set;
  set.add(make("fourier", SetTag::Fourier, [opts](const Image& img, double m, Rng& rng) {
    // The AugMix magnitude does not apply; strength comes from the norm range.
    check_magnitude(m);
    const auto sampler = cached_sampler(GridShape{img.width, img.height}, opts.sampling);
    const FourierDraw draw = draw_fourier(*sampler, opts.flip_probability, rng);
    return apply_perturbation(img, plane_wave(draw.spec), draw.mode, rng).first;
  }));
  return set;
}

PrimitiveSet primitive_set_from_letters(std::string_view letters, const FourierPrimitiveOptions& opts) {
  std::string lower;
  for (char ch : letters)
    lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  PrimitiveSet set;
  if (lower.empty() || lower == "none")
    return set;
  for (char ch : lower)
    if (std::string_view("svcf").find(ch) == std::string_view::npos)
      throw ConfigError("unknown primitive set letter '" + std::string(1, ch) + "' in '" + std::string(letters) +
                        "' (expected a combination of s, v, c, f)");
  if (lower.find('s') != std::string::npos)
    set.merge(spatial_primitives());
  if (lower.find('v') != std::string::npos)
    set.merge(vision_primitives());
  if (lower.find('c') != std::string::npos)
    set.merge(corruption_overlap_primitives());
  if (lower.find('f') != std::string::npos)
    set.merge(fourier_primitives(opts));
  return set;
}

} // namespace fouriermix
