#include "fouriermix/metrics.hpp"

#include "fouriermix/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace fouriermix {

std::size_t argmax(std::span<const double> probs) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < probs.size(); ++i)
    if (probs[i] > probs[best])
      best = i;
  return best;
}

double classification_error(const PredictionSet& preds) {
  if (preds.size() == 0)
    throw ConfigError("classification error of an empty prediction set");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < preds.size(); ++i)
    if (static_cast<int>(argmax(preds.probs[i])) != preds.labels[i])
      ++wrong;
  return static_cast<double>(wrong) / static_cast<double>(preds.size());
}

double rms_calibration_error(const PredictionSet& preds, int bins) {
  const std::size_t n = preds.size();
  if (bins < 1)
    throw ConfigError("calibration needs at least one bin");
  if (n < static_cast<std::size_t>(bins))
    throw ConfigError("calibration with " + std::to_string(bins) + " bins needs at least that many examples, got " +
                      std::to_string(n));

  std::vector<double> confidence(n);
  std::vector<double> correct(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t top = argmax(preds.probs[i]);
    confidence[i] = preds.probs[i][top];
    correct[i] = static_cast<int>(top) == preds.labels[i] ? 1.0 : 0.0;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return confidence[a] < confidence[b]; });

  double sum_sq = 0.0;
  for (int b = 0; b < bins; ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * n / bins;
    const std::size_t hi = static_cast<std::size_t>(b + 1) * n / bins;
    if (hi == lo)
      continue;
    double acc = 0.0;
    double conf = 0.0;
    for (std::size_t r = lo; r < hi; ++r) {
      acc += correct[order[r]];
      conf += confidence[order[r]];
    }
    const double count = static_cast<double>(hi - lo);
    const double gap = acc / count - conf / count;
    sum_sq += count / static_cast<double>(n) * gap * gap;
  }
  return std::sqrt(sum_sq);
}

MetricReport evaluate(const PredictionSet& preds, int bins) {
  MetricReport report;
  report.n = preds.size();
  report.bins = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(std::max(bins, 1)), preds.size()));
  report.classification_error = classification_error(preds);
  report.rms_calibration_error = rms_calibration_error(preds, report.bins);
  return report;
}

} // namespace fouriermix
