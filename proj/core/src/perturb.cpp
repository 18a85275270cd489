#include "fouriermix/perturb.hpp"

#include "fouriermix/error.hpp"
#include "fouriermix/parallel.hpp"

#include <algorithm>
#include <limits>

namespace fouriermix {

namespace {

constexpr std::uint64_t kFixedSignStream = std::numeric_limits<std::uint64_t>::max();

void check_shape(const Image& img, const BasisMatrix& basis) {
  const GridShape s = basis.shape();
  if (s.dx != img.width || s.dy != img.height)
    throw ShapeMismatch("basis shape " + s.to_string() + " (width x height) does not match image " +
                        std::to_string(img.width) + "x" + std::to_string(img.height));
}

} // namespace

std::string_view to_string(ChannelMode mode) { return mode == ChannelMode::Aligned ? "aligned" : "flip"; }

ChannelMode parse_channel_mode(std::string_view text) {
  if (text == "aligned")
    return ChannelMode::Aligned;
  if (text == "flip" || text == "random-flip")
    return ChannelMode::RandomFlip;
  throw ConfigError("unknown channel mode '" + std::string(text) + "' (expected aligned|flip)");
}

FlipSigns draw_signs(int channels, ChannelMode mode, Rng& rng) {
  FlipSigns out;
  out.signs.assign(static_cast<std::size_t>(channels), 1);
  if (mode == ChannelMode::RandomFlip)
    for (int& s : out.signs)
      s = coin_flip(rng) ? 1 : -1;
  return out;
}

Image apply_with_signs(const Image& img, const BasisMatrix& basis, std::span<const int> signs) {
  check_shape(img, basis);
  if (signs.size() != static_cast<std::size_t>(img.channels))
    throw ShapeMismatch("got " + std::to_string(signs.size()) + " flip signs for " +
                        std::to_string(img.channels) + " channels");
  Image out = img;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const double u = basis.at(x, y);
      for (int c = 0; c < img.channels; ++c) {
        double& v = out.at(y, x, c);
        v = std::min(1.0, std::max(0.0, v + signs[c] * u));
      }
    }
  return out;
}

std::pair<Image, FlipSigns> apply_perturbation(const Image& img, const BasisMatrix& basis, ChannelMode mode,
                                               Rng& rng) {
  check_shape(img, basis);
  FlipSigns signs = draw_signs(img.channels, mode, rng);
  Image out = apply_with_signs(img, basis, signs.signs);
  return {std::move(out), std::move(signs)};
}

LabeledDataset perturb_dataset(const LabeledDataset& ds, const BasisMatrix& basis, const PerturbOptions& opts) {
  LabeledDataset out;
  out.num_classes = ds.num_classes;
  out.labels = ds.labels;
  out.images.resize(ds.size());
  if (ds.empty())
    return out;
  check_shape(ds.images.front(), basis);

  std::optional<FlipSigns> shared;
  if (opts.fixed_signs || opts.mode == ChannelMode::Aligned) {
    Rng rng = make_rng(opts.seed, kFixedSignStream);
    shared = draw_signs(ds.images.front().channels, opts.mode, rng);
  }

  parallel_for(ds.size(), [&](std::size_t i) {
    const Image& img = ds.images[i];
    if (!img.same_shape(ds.images.front()))
      throw ShapeMismatch("image " + std::to_string(i) + " has shape " + img.shape_string() + ", expected " +
                          ds.images.front().shape_string());
    if (shared) {
      out.images[i] = apply_with_signs(img, basis, shared->signs);
    } else {
      Rng rng = make_rng(opts.seed, i);
      out.images[i] = apply_perturbation(img, basis, opts.mode, rng).first;
    }
  });
  return out;
}

LabeledDataset perturb_dataset(const LabeledDataset& ds, const BasisSpec& spec, ChannelMode mode,
                               std::uint64_t seed, bool fixed_signs) {
  return perturb_dataset(ds, plane_wave(spec), PerturbOptions{mode, seed, fixed_signs});
}

} // namespace fouriermix
