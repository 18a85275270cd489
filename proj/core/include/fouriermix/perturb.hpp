#pragma once

#include "fouriermix/fourier_basis.hpp"
#include "fouriermix/image.hpp"
#include "fouriermix/rng.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fouriermix {

enum class ChannelMode { Aligned, RandomFlip };

std::string_view to_string(ChannelMode mode);
// Accepts "aligned" and "flip" / "random-flip".
ChannelMode parse_channel_mode(std::string_view text);

struct FlipSigns {
  std::vector<int> signs; // one of {-1, +1} per channel

  friend bool operator==(const FlipSigns&, const FlipSigns&) = default;
};

FlipSigns draw_signs(int channels, ChannelMode mode, Rng& rng);

// out[y,x,c] = clip01(img[y,x,c] + s_c * U[y,x]).
Image apply_with_signs(const Image& img, const BasisMatrix& basis, std::span<const int> signs);

// Draws the signs (all +1 for Aligned), applies them, and reports which were used.
std::pair<Image, FlipSigns> apply_perturbation(const Image& img, const BasisMatrix& basis, ChannelMode mode,
                                               Rng& rng);

struct PerturbOptions {
  ChannelMode mode = ChannelMode::Aligned;
  std::uint64_t seed = 0;
  // RandomFlip only: one sign draw shared by the whole dataset instead of one per image.
  bool fixed_signs = false;
};

// Same basis for every image. Image i draws its signs from make_rng(seed, i),
// so the result does not depend on worker scheduling.
LabeledDataset perturb_dataset(const LabeledDataset& ds, const BasisMatrix& basis, const PerturbOptions& opts);
LabeledDataset perturb_dataset(const LabeledDataset& ds, const BasisSpec& spec, ChannelMode mode,
                               std::uint64_t seed, bool fixed_signs = false);

} // namespace fouriermix
