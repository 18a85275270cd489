#pragma once

#include "fouriermix/image.hpp"
#include "fouriermix/rng.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

namespace testing_util {

inline fouriermix::Image random_image(int h, int w, int c, std::uint64_t seed) {
  fouriermix::Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  fouriermix::Image img(h, w, c);
  for (double& v : img.data)
    v = u(rng);
  return img;
}

// Smooth image: low-frequency gradients with values well inside (0, 1).
inline fouriermix::Image smooth_image(int h, int w, int c) {
  fouriermix::Image img(h, w, c);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int ch = 0; ch < c; ++ch)
        img.at(y, x, ch) = 0.5 + 0.3 * std::sin(0.15 * x + 0.1 * y + ch) * std::cos(0.12 * y - 0.05 * x);
  return img;
}

// Two classes separated by mean brightness plus a class-specific stripe.
inline fouriermix::LabeledDataset synthetic_dataset(int n, int side, std::uint64_t seed, int classes = 2) {
  fouriermix::Rng rng(seed);
  std::uniform_real_distribution<double> noise(-0.15, 0.15);
  fouriermix::LabeledDataset ds;
  ds.num_classes = classes;
  for (int i = 0; i < n; ++i) {
    const int label = i % classes;
    fouriermix::Image img(side, side, 3);
    for (int y = 0; y < side; ++y)
      for (int x = 0; x < side; ++x)
        for (int c = 0; c < 3; ++c) {
          const double base = 0.3 + 0.4 * label / std::max(1, classes - 1);
          const double stripe = (label % 2 == 0 ? (x % 4 < 2) : (y % 4 < 2)) ? 0.1 : -0.1;
          img.at(y, x, c) = std::clamp(base + stripe + noise(rng), 0.0, 1.0);
        }
    ds.images.push_back(std::move(img));
    ds.labels.push_back(label);
  }
  return ds;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("fouriermix_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
  std::filesystem::path path_;
};

} // namespace testing_util
