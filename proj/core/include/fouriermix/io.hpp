#pragma once

#include "fouriermix/image.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace fouriermix {

enum class CifarVariant { Cifar10, Cifar100 };

constexpr std::size_t cifar_record_size(CifarVariant v) {
  return v == CifarVariant::Cifar10 ? 3073 : 3074;
}

// Standard CIFAR binary batches: each record is the label byte(s) followed by
// 3072 bytes of planar R, G, B 32x32 planes. CIFAR-100 records carry a coarse
// label byte before the fine label; only the fine label is kept.
LabeledDataset parse_cifar_binary(std::span<const std::uint8_t> bytes, CifarVariant variant);
LabeledDataset load_cifar_binary(const std::filesystem::path& path, CifarVariant variant);

// Prediction files:
//   #format=logits|probs classes=<n>
//   <label> <v1> ... <vn>
// Logit rows are softmaxed; probability rows must already satisfy
// PredictionSet's invariants.
PredictionSet parse_predictions(std::istream& in, const std::string& source = "<stream>");
PredictionSet read_predictions(const std::filesystem::path& path);
void write_predictions(const PredictionSet& preds, const std::filesystem::path& path);

// 8 bits per channel; 1 (gray) or 3 (RGB) channels. v -> round(v * 255).
void write_png(const Image& img, const std::filesystem::path& path);
Image read_png(const std::filesystem::path& path);

std::uint8_t to_byte(double v);

// A directory of PNG files plus labels.txt ("#classes=<n>" header, then
// "<file> <label>" per line). Without labels.txt every PNG (sorted by name)
// is loaded with label 0.
LabeledDataset load_png_dataset(const std::filesystem::path& dir);
void save_png_dataset(const LabeledDataset& ds, const std::filesystem::path& dir);

// Accepts a PNG dataset directory, a single CIFAR .bin file, or a
// comma-separated list of .bin files (concatenated in order).
LabeledDataset load_dataset(const std::string& source, CifarVariant variant = CifarVariant::Cifar10);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

// Version string of the libpng the library was built against.
std::string libpng_version();

} // namespace fouriermix
