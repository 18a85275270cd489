#pragma once

#include "fouriermix/image.hpp"
#include "fouriermix/primitives.hpp"
#include "fouriermix/rng.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fouriermix {

struct AugmentConfig {
  PrimitiveSet primitives;
  int chains = 3;
  std::vector<int> depth_choices{1, 2, 3};
  double dirichlet_alpha = 1.0;
  double beta_a = 1.0;
  double beta_b = 1.0;
  double magnitude = 0.3; // severity 3 of 10

  // Throws ConfigError on an empty primitive set or invalid parameters.
  void validate() const;
};

// Builds a config over primitive_set_from_letters(letters) with default mixing.
AugmentConfig augment_config_for(std::string_view letters, const FourierPrimitiveOptions& fourier = {});

struct ChainStep {
  std::string primitive;
  std::uint64_t seed = 0;

  friend bool operator==(const ChainStep&, const ChainStep&) = default;
};

// Every random draw of one augmix call. replay() consumes only this record.
struct MixTrace {
  std::vector<double> weights; // Dirichlet chain weights
  double m = 0.0;              // Beta mix coefficient
  std::vector<std::vector<ChainStep>> chains;

  friend bool operator==(const MixTrace&, const MixTrace&) = default;
};

std::vector<double> sample_dirichlet(Rng& rng, std::size_t k, double alpha);
double sample_beta(Rng& rng, double a, double b);

MixTrace draw_trace(const AugmentConfig& cfg, Rng& rng);

// clip((1 - m) * img + m * sum_i w_i * chain_i(img)); chain_i composes its
// steps in order, each primitive seeded from its recorded seed.
Image replay(const Image& img, const AugmentConfig& cfg, const MixTrace& trace);

std::pair<Image, MixTrace> augmix(const Image& img, const AugmentConfig& cfg, Rng& rng);

Image hflip(const Image& img);
// Zero-pads by `pad` on every side, then crops the original size at (off_y, off_x)
// in padded coordinates. off = pad returns the input.
Image pad_crop(const Image& img, int pad, int off_y, int off_x);
Image random_flip_crop(const Image& img, Rng& rng, int pad = 4);

// v -> (v - 0.5) / 0.5, per channel; output is the model-input tensor in [-1, 1].
std::vector<double> normalize(const Image& img);

// Flip-and-crop, optional augmix, normalize.
std::vector<double> preprocess_train(const Image& img, const AugmentConfig* cfg, Rng& rng);

// One clean and `aug_views` augmented normalized views of the same flip-cropped
// image, as consumed by consistency training.
struct TrainViews {
  std::vector<double> clean;
  std::vector<std::vector<double>> augmented;
};
TrainViews make_train_views(const Image& img, const AugmentConfig* cfg, int aug_views, bool flip_crop, Rng& rng);

// Mean of KL(p_i || M) over the three inputs, M their average, natural log,
// 0 ln 0 = 0 and M clamped below at 1e-12. Result in [0, ln 3].
double jsd_consistency(std::span<const double> p_clean, std::span<const double> p_aug1,
                       std::span<const double> p_aug2);

} // namespace fouriermix
