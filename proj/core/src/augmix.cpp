#include "fouriermix/augmix.hpp"

#include "fouriermix/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace fouriermix {

void AugmentConfig::validate() const {
  if (primitives.empty())
    throw ConfigError("augmix needs at least one primitive");
  if (chains < 1)
    throw ConfigError("augmix needs at least one chain");
  if (depth_choices.empty() || std::any_of(depth_choices.begin(), depth_choices.end(), [](int d) { return d < 1; }))
    throw ConfigError("chain depths must be positive");
  if (!(dirichlet_alpha > 0.0) || !(beta_a > 0.0) || !(beta_b > 0.0))
    throw ConfigError("mixing distribution parameters must be positive");
  if (!(magnitude >= 0.0 && magnitude <= 1.0))
    throw ConfigError("augmix magnitude must lie in [0, 1]");
}

AugmentConfig augment_config_for(std::string_view letters, const FourierPrimitiveOptions& fourier) {
  AugmentConfig cfg;
  cfg.primitives = primitive_set_from_letters(letters, fourier);
  return cfg;
}

std::vector<double> sample_dirichlet(Rng& rng, std::size_t k, double alpha) {
  std::gamma_distribution<double> gamma(alpha, 1.0);
  std::vector<double> w(k);
  double sum = 0.0;
  do {
    sum = 0.0;
    for (double& v : w) {
      v = gamma(rng);
      sum += v;
    }
  } while (!(sum > 0.0));
  for (double& v : w)
    v /= sum;
  return w;
}

double sample_beta(Rng& rng, double a, double b) {
  std::gamma_distribution<double> ga(a, 1.0);
  std::gamma_distribution<double> gb(b, 1.0);
  for (;;) {
    const double x = ga(rng);
    const double y = gb(rng);
    if (x + y > 0.0)
      return x / (x + y);
  }
}

MixTrace draw_trace(const AugmentConfig& cfg, Rng& rng) {
  cfg.validate();
  MixTrace trace;
  trace.weights = sample_dirichlet(rng, static_cast<std::size_t>(cfg.chains), cfg.dirichlet_alpha);
  trace.m = sample_beta(rng, cfg.beta_a, cfg.beta_b);
  trace.chains.resize(static_cast<std::size_t>(cfg.chains));
  for (auto& chain : trace.chains) {
    const int depth = cfg.depth_choices[uniform_index(rng, cfg.depth_choices.size())];
    for (int d = 0; d < depth; ++d) {
      const auto& p = cfg.primitives[uniform_index(rng, cfg.primitives.size())];
      chain.push_back({p.name, rng()});
    }
  }
  return trace;
}

Image replay(const Image& img, const AugmentConfig& cfg, const MixTrace& trace) {
  if (trace.weights.size() != trace.chains.size())
    throw ConfigError("trace has " + std::to_string(trace.weights.size()) + " weights for " +
                      std::to_string(trace.chains.size()) + " chains");
  std::vector<double> mixed(img.data.size(), 0.0);
  for (std::size_t i = 0; i < trace.chains.size(); ++i) {
    Image chain = img;
    for (const auto& step : trace.chains[i]) {
      const Primitive* p = cfg.primitives.find(step.primitive);
      if (!p)
        throw ConfigError("trace references unknown primitive '" + step.primitive + "'");
      Rng rng(step.seed);
      chain = (*p)(chain, cfg.magnitude, rng);
    }
    for (std::size_t j = 0; j < mixed.size(); ++j)
      mixed[j] += trace.weights[i] * chain.data[j];
  }
  Image out = img;
  for (std::size_t j = 0; j < mixed.size(); ++j)
    out.data[j] = (1.0 - trace.m) * img.data[j] + trace.m * mixed[j];
  clip_in_place(out);
  return out;
}

std::pair<Image, MixTrace> augmix(const Image& img, const AugmentConfig& cfg, Rng& rng) {
  MixTrace trace = draw_trace(cfg, rng);
  Image out = replay(img, cfg, trace);
  return {std::move(out), std::move(trace)};
}

Image hflip(const Image& img) {
  Image out(img.height, img.width, img.channels);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < img.channels; ++c)
        out.at(y, x, c) = img.at(y, img.width - 1 - x, c);
  return out;
}

Image pad_crop(const Image& img, int pad, int off_y, int off_x) {
  if (pad < 0 || off_y < 0 || off_x < 0 || off_y > 2 * pad || off_x > 2 * pad)
    throw ConfigError("crop offset outside the padded image");
  Image out(img.height, img.width, img.channels, 0.0);
  for (int y = 0; y < img.height; ++y) {
    const int sy = y + off_y - pad;
    if (sy < 0 || sy >= img.height)
      continue;
    for (int x = 0; x < img.width; ++x) {
      const int sx = x + off_x - pad;
      if (sx < 0 || sx >= img.width)
        continue;
      for (int c = 0; c < img.channels; ++c)
        out.at(y, x, c) = img.at(sy, sx, c);
    }
  }
  return out;
}

Image random_flip_crop(const Image& img, Rng& rng, int pad) {
  const bool flip = coin_flip(rng);
  std::uniform_int_distribution<int> offset(0, 2 * pad);
  const int oy = offset(rng);
  const int ox = offset(rng);
  return pad_crop(flip ? hflip(img) : img, pad, oy, ox);
}

std::vector<double> normalize(const Image& img) {
  std::vector<double> out(img.data.size());
  std::transform(img.data.begin(), img.data.end(), out.begin(), [](double v) { return (v - 0.5) / 0.5; });
  return out;
}

std::vector<double> preprocess_train(const Image& img, const AugmentConfig* cfg, Rng& rng) {
  Image x = random_flip_crop(img, rng);
  if (cfg)
    x = augmix(x, *cfg, rng).first;
  return normalize(x);
}

TrainViews make_train_views(const Image& img, const AugmentConfig* cfg, int aug_views, bool flip_crop, Rng& rng) {
  const Image base = flip_crop ? random_flip_crop(img, rng) : img;
  TrainViews views;
  views.clean = normalize(base);
  if (cfg)
    for (int i = 0; i < aug_views; ++i)
      views.augmented.push_back(normalize(augmix(base, *cfg, rng).first));
  return views;
}

double jsd_consistency(std::span<const double> p0, std::span<const double> p1, std::span<const double> p2) {
  const std::size_t n = p0.size();
  if (n == 0 || p1.size() != n || p2.size() != n)
    throw ConfigError("jsd_consistency needs three probability vectors of equal, nonzero length");
  for (auto p : {p0, p1, p2}) {
    double sum = 0.0;
    for (double v : p) {
      if (!(v >= 0.0) || !std::isfinite(v))
        throw ConfigError("jsd_consistency input has a negative or non-finite entry");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-6)
      throw ConfigError("jsd_consistency input sums to " + std::to_string(sum));
  }
  double total = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    const double mix = std::max((p0[c] + p1[c] + p2[c]) / 3.0, 1e-12);
    const double log_mix = std::log(mix);
    for (double p : {p0[c], p1[c], p2[c]})
      if (p > 0.0)
        total += p * (std::log(p) - log_mix);
  }
  return total / 3.0;
}

} // namespace fouriermix
