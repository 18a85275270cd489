#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace fouriermix {

// H x W x C image with interleaved (y, x, channel) double-precision samples.
// Pixel values are expected in [0, 1]; clip() enforces it.
struct Image {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> data;

  Image() = default;
  Image(int height, int width, int channels, double fill = 0.0);

  std::size_t index(int y, int x, int c) const {
    return (static_cast<std::size_t>(y) * width + x) * channels + c;
  }
  double& at(int y, int x, int c) { return data[index(y, x, c)]; }
  double at(int y, int x, int c) const { return data[index(y, x, c)]; }

  std::size_t size() const { return data.size(); }
  bool same_shape(const Image& other) const {
    return height == other.height && width == other.width && channels == other.channels;
  }
  std::string shape_string() const;

  friend bool operator==(const Image&, const Image&) = default;
};

Image clip(Image img);
void clip_in_place(Image& img);

// Images share one shape; every label < num_classes.
struct LabeledDataset {
  std::vector<Image> images;
  std::vector<int> labels;
  int num_classes = 0;

  std::size_t size() const { return images.size(); }
  bool empty() const { return images.empty(); }
  // Throws ShapeMismatch / ConfigError on a violated invariant.
  void validate() const;
};

// First `count` examples (or all, if fewer).
LabeledDataset take_first(const LabeledDataset& ds, std::size_t count);
// Keeps examples whose label < keep_classes and sets num_classes accordingly.
LabeledDataset keep_classes(const LabeledDataset& ds, int keep_classes);

// Per-example class probabilities with the true label.
struct PredictionSet {
  std::vector<std::vector<double>> probs;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  int num_classes() const { return probs.empty() ? 0 : static_cast<int>(probs.front().size()); }
  // Rows sum to 1 +- 1e-6, entries >= 0, labels in range. Throws FormatError.
  void validate() const;
};

std::vector<double> softmax(std::span<const double> logits);

} // namespace fouriermix
