#include "fouriermix/predictors.hpp"

#include "fouriermix/error.hpp"
#include "fouriermix/io.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <cstdlib>
#include <fstream>

namespace fouriermix {

namespace fs = std::filesystem;

namespace {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'')
      out += "'\\''";
    else
      out += c;
  }
  return out + "'";
}

std::string context_tag(const EvalContext& ctx) {
  if (!ctx.k)
    return "clean";
  return "k_" + std::to_string(ctx.k->kx) + "_" + std::to_string(ctx.k->ky);
}

} // namespace

CommandPredictor::CommandPredictor(std::string command, fs::path work_dir, bool concurrent_safe, bool keep_files)
    : command_(std::move(command)), work_dir_(std::move(work_dir)), concurrent_safe_(concurrent_safe),
      keep_files_(keep_files) {
  if (command_.empty())
    throw ConfigError("predictor command must not be empty");
}

PredictionSet CommandPredictor::predict(const LabeledDataset& ds, const EvalContext& ctx) const {
  static std::atomic<unsigned long> counter{0};
  const fs::path dir = work_dir_ / ("eval_" + context_tag(ctx) + "_" + std::to_string(counter.fetch_add(1)));
  fs::create_directories(dir);
  save_png_dataset(ds, dir);

  nlohmann::json manifest;
  manifest["k"] = ctx.k ? nlohmann::json::array({ctx.k->kx, ctx.k->ky}) : nlohmann::json(nullptr);
  manifest["norm"] = ctx.norm;
  manifest["mode"] = std::string(to_string(ctx.mode));
  manifest["phase"] = ctx.phase;
  manifest["n"] = ds.size();
  manifest["predictions"] = "predictions.txt";
  std::ofstream(dir / "manifest.json") << manifest.dump(2) << '\n';

  const std::string cmd = command_ + " " + shell_quote(dir.string());
  const int status = std::system(cmd.c_str());
  if (status != 0)
    throw PredictorError("command '" + cmd + "' exited with status " + std::to_string(status));
  PredictionSet preds = read_predictions(dir / "predictions.txt");
  if (!keep_files_)
    fs::remove_all(dir);
  return preds;
}

std::string PrecomputedPredictor::file_name(const EvalContext& ctx) { return context_tag(ctx) + ".txt"; }

PredictionSet PrecomputedPredictor::predict(const LabeledDataset& ds, const EvalContext& ctx) const {
  const fs::path path = dir_ / file_name(ctx);
  if (!fs::exists(path))
    throw PredictorError("missing precomputed predictions " + path.string());
  PredictionSet preds = read_predictions(path);
  if (preds.size() != ds.size())
    throw PredictorError(path.string() + " holds " + std::to_string(preds.size()) + " predictions for " +
                         std::to_string(ds.size()) + " examples");
  return preds;
}

} // namespace fouriermix
