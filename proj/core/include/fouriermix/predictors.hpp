#pragma once

#include "fouriermix/heatmap.hpp"

#include <filesystem>
#include <functional>
#include <string>

namespace fouriermix {

// Wraps a callable. Handy for tests and in-process models.
class FunctionPredictor : public Predictor {
public:
  using Fn = std::function<PredictionSet(const LabeledDataset&, const EvalContext&)>;

  explicit FunctionPredictor(Fn fn, bool concurrent_safe = true, std::string name = "function")
      : fn_(std::move(fn)), concurrent_safe_(concurrent_safe), name_(std::move(name)) {}

  PredictionSet predict(const LabeledDataset& ds, const EvalContext& ctx) const override { return fn_(ds, ctx); }
  bool concurrent_safe() const override { return concurrent_safe_; }
  std::string describe() const override { return name_; }

private:
  Fn fn_;
  bool concurrent_safe_;
  std::string name_;
};

// External-process protocol. For each evaluation the harness writes
//   <work>/eval_<tag>/            PNG dataset (see save_png_dataset)
//   <work>/eval_<tag>/manifest.json   {"k":[kx,ky]|null,"norm":..,"mode":..,"phase":..,"n":..}
// then runs `<command> <dir>` through the shell and reads <dir>/predictions.txt
// (prediction file format). A non-zero exit status is a PredictorError.
class CommandPredictor : public Predictor {
public:
  CommandPredictor(std::string command, std::filesystem::path work_dir, bool concurrent_safe = false,
                   bool keep_files = false);

  PredictionSet predict(const LabeledDataset& ds, const EvalContext& ctx) const override;
  bool concurrent_safe() const override { return concurrent_safe_; }
  std::string describe() const override { return "command '" + command_ + "'"; }

private:
  std::string command_;
  std::filesystem::path work_dir_;
  bool concurrent_safe_;
  bool keep_files_;
};

// Precomputed predictions: <dir>/clean.txt for the unperturbed set and
// <dir>/k_<kx>_<ky>.txt for each wave vector.
class PrecomputedPredictor : public Predictor {
public:
  explicit PrecomputedPredictor(std::filesystem::path dir) : dir_(std::move(dir)) {}

  PredictionSet predict(const LabeledDataset& ds, const EvalContext& ctx) const override;
  std::string describe() const override { return "predictions in " + dir_.string(); }

  static std::string file_name(const EvalContext& ctx);

private:
  std::filesystem::path dir_;
};

} // namespace fouriermix
