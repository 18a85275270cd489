#include "fouriermix/image.hpp"

#include "fouriermix/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fouriermix {

Image::Image(int h, int w, int c, double fill) : height(h), width(w), channels(c) {
  if (h < 0 || w < 0 || c < 0)
    throw ConfigError("negative image dimension");
  data.assign(static_cast<std::size_t>(h) * w * c, fill);
}

std::string Image::shape_string() const {
  return std::to_string(height) + "x" + std::to_string(width) + "x" + std::to_string(channels);
}

void clip_in_place(Image& img) {
  for (double& v : img.data)
    v = std::min(1.0, std::max(0.0, v));
}

Image clip(Image img) {
  clip_in_place(img);
  return img;
}

void LabeledDataset::validate() const {
  if (images.size() != labels.size())
    throw ConfigError("dataset has " + std::to_string(images.size()) + " images but " +
                      std::to_string(labels.size()) + " labels");
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (!images[i].same_shape(images.front()))
      throw ShapeMismatch("image " + std::to_string(i) + " has shape " + images[i].shape_string() +
                          ", expected " + images.front().shape_string());
    if (labels[i] < 0 || labels[i] >= num_classes)
      throw ConfigError("label " + std::to_string(labels[i]) + " of example " + std::to_string(i) +
                        " outside [0, " + std::to_string(num_classes) + ")");
  }
}

LabeledDataset take_first(const LabeledDataset& ds, std::size_t count) {
  LabeledDataset out;
  out.num_classes = ds.num_classes;
  const std::size_t n = std::min(count, ds.size());
  out.images.assign(ds.images.begin(), ds.images.begin() + static_cast<std::ptrdiff_t>(n));
  out.labels.assign(ds.labels.begin(), ds.labels.begin() + static_cast<std::ptrdiff_t>(n));
  return out;
}

LabeledDataset keep_classes(const LabeledDataset& ds, int keep) {
  if (keep < 1)
    throw ConfigError("must keep at least one class");
  LabeledDataset out;
  out.num_classes = std::min(keep, ds.num_classes);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.labels[i] < keep) {
      out.images.push_back(ds.images[i]);
      out.labels.push_back(ds.labels[i]);
    }
  }
  return out;
}

void PredictionSet::validate() const {
  if (probs.size() != labels.size())
    throw FormatError("prediction set has " + std::to_string(probs.size()) + " probability rows but " +
                      std::to_string(labels.size()) + " labels");
  const std::size_t classes = probs.empty() ? 0 : probs.front().size();
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const auto& row = probs[i];
    if (row.size() != classes)
      throw FormatError("record " + std::to_string(i) + " has " + std::to_string(row.size()) +
                        " classes, expected " + std::to_string(classes));
    double sum = 0.0;
    for (double p : row) {
      if (!std::isfinite(p) || p < 0.0)
        throw FormatError("record " + std::to_string(i) + " has an invalid probability");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-6)
      throw FormatError("record " + std::to_string(i) + " probabilities sum to " + std::to_string(sum));
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= classes)
      throw FormatError("record " + std::to_string(i) + " label " + std::to_string(labels[i]) +
                        " outside [0, " + std::to_string(classes) + ")");
  }
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.size());
  if (logits.empty())
    return out;
  const double peak = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - peak);
    sum += out[i];
  }
  for (double& v : out)
    v /= sum;
  return out;
}

} // namespace fouriermix
