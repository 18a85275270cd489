#pragma once

#include "fouriermix/image.hpp"

#include <cstddef>
#include <span>

namespace fouriermix {

inline constexpr int kDefaultCalibrationBins = 15;

struct MetricReport {
  double classification_error = 0.0;
  double rms_calibration_error = 0.0;
  std::size_t n = 0;
  int bins = 0;
};

// Index of the largest entry; ties go to the lowest index.
std::size_t argmax(std::span<const double> probs);

// Fraction of examples whose argmax differs from the label. Throws on an empty set.
double classification_error(const PredictionSet& preds);

// Top-label RMS calibration error with equal-mass binning. Examples are sorted
// by (confidence, original index); bin b holds sorted ranks
// [floor(b*n/bins), floor((b+1)*n/bins)). Returns
// sqrt(sum_b (n_b / n) * (acc_b - conf_b)^2). Throws when n < bins or bins < 1.
double rms_calibration_error(const PredictionSet& preds, int bins = kDefaultCalibrationBins);

// Both metrics; the bin count is reduced to n when the set is smaller than `bins`.
MetricReport evaluate(const PredictionSet& preds, int bins = kDefaultCalibrationBins);

} // namespace fouriermix
