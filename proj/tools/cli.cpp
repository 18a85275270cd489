#include "cli.hpp"

#include "fouriermix/augmix.hpp"
#include "fouriermix/error.hpp"
#include "fouriermix/fourier_basis.hpp"
#include "fouriermix/heatmap.hpp"
#include "fouriermix/io.hpp"
#include "fouriermix/metrics.hpp"
#include "fouriermix/parallel.hpp"
#include "fouriermix/perturb.hpp"
#include "fouriermix/predictors.hpp"
#include "fouriermix/toy_model.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#ifndef FOURIERMIX_VERSION
#define FOURIERMIX_VERSION "unknown"
#endif

namespace fouriermix::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Bad flag values that CLI11 cannot see (shape strings, letter sets, ...).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::uint64_t seed = 0;
  unsigned threads = 0;
  bool quiet = false;
};

struct Env {
  const Globals& g;
  CLI::App& app;
  CLI::App& sub;
  std::ostream& out;
  std::ostream& err;

  void log(const std::string& line) const {
    if (!g.quiet)
      err << "[" << sub.get_name() << "] " << line << '\n';
  }
};

GridShape parse_shape(const std::string& text) {
  const auto x = text.find_first_of("xX");
  int w = 0;
  int h = 0;
  if (x != std::string::npos) {
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto rw = std::from_chars(begin, begin + x, w);
    const auto rh = std::from_chars(begin + x + 1, end, h);
    if (rw.ec == std::errc{} && rw.ptr == begin + x && rh.ec == std::errc{} && rh.ptr == end && w > 0 && h > 0)
      return {w, h};
  }
  throw UsageError("--shape expects WIDTHxHEIGHT with positive integers, got '" + text + "'");
}

// Defaults are recorded with round-trip precision so manifests are exact.
template <class T>
std::string exact_string(const T& v) {
  if constexpr (std::is_floating_point_v<T>) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
  } else {
    std::ostringstream s;
    s << v;
    return s.str();
  }
}

template <class T>
CLI::Option* add_with_default(CLI::App* app, const std::string& name, T& var, const std::string& help = "") {
  return app->add_option(name, var, help)->default_str(exact_string(var));
}

json option_value(const CLI::Option& opt) {
  if (opt.get_expected_min() == 0)
    return opt.count() > 0;
  std::vector<std::string> values = opt.reduced_results();
  if (values.empty()) {
    if (opt.get_default_str().empty())
      return nullptr;
    return opt.get_default_str();
  }
  if (values.size() == 1)
    return values.front();
  return values;
}

json resolved_flags(const CLI::App& app) {
  json flags = json::object();
  for (const CLI::Option* opt : app.get_options()) {
    const std::string& name = opt->get_single_name();
    if (name == "help" || name == "h")
      continue;
    flags[name] = option_value(*opt);
  }
  return flags;
}

json versions() {
  return {{"fouriermix", FOURIERMIX_VERSION},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"libpng", libpng_version()},
          {"cli11", CLI11_VERSION},
#if defined(__clang__)
          {"compiler", "clang " __clang_version__}
#elif defined(__GNUC__)
          {"compiler", "gcc " __VERSION__}
#else
          {"compiler", "unknown"}
#endif
  };
}

void write_json(const json& j, const fs::path& path) {
  std::ofstream f(path);
  if (!f)
    throw IoError("cannot write " + path.string());
  f << j.dump(2) << '\n';
  if (!f)
    throw IoError("failed writing " + path.string());
}

// Seed, thread count, versions and every resolved flag, plus command-specific extras.
void write_manifest(const Env& env, const fs::path& path, const std::vector<std::string>& outputs,
                    json extra = json::object()) {
  json m;
  m["tool"] = "fouriermix";
  m["command"] = env.sub.get_name();
  m["seed"] = env.g.seed;
  m["threads"] = thread_count();
  m["versions"] = versions();
  m["global_flags"] = resolved_flags(env.app);
  m["flags"] = resolved_flags(env.sub);
  m["outputs"] = outputs;
  for (auto& [key, value] : extra.items())
    m[key] = value;
  write_json(m, path);
}

// File outputs get "<file>.manifest.json"; directory outputs get "<dir>/manifest.json".
fs::path manifest_for_file(const fs::path& out) { return fs::path(out.string() + ".manifest.json"); }

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path())
    fs::create_directories(p.parent_path());
}

json report_json(const MetricReport& r) {
  return {{"classification_error", r.classification_error},
          {"rms_calibration_error", r.rms_calibration_error},
          {"n", r.n},
          {"bins", r.bins}};
}

json trace_json(std::size_t index, const MixTrace& t) {
  json chains = json::array();
  for (const auto& chain : t.chains) {
    json steps = json::array();
    for (const auto& step : chain)
      steps.push_back({{"op", step.primitive}, {"seed", step.seed}});
    chains.push_back(steps);
  }
  return {{"index", index}, {"weights", t.weights}, {"m", t.m}, {"chains", chains}};
}

struct DataFlags {
  std::string source;
  std::size_t subset = 0;
  int classes_keep = 0;
  bool cifar100 = false;

  void add_to(CLI::App& sub, const std::string& flag, const std::string& help) {
    sub.add_option(flag, source, help)->required();
    sub.add_option("--subset", subset, "Keep only the first N examples (0 keeps all)");
    sub.add_option("--classes-keep", classes_keep, "Keep only labels < k (0 keeps all)")->check(CLI::NonNegativeNumber);
    sub.add_flag("--cifar100", cifar100, "Read .bin inputs as CIFAR-100 (fine labels)");
  }

  LabeledDataset load() const {
    LabeledDataset ds = load_dataset(source, cifar100 ? CifarVariant::Cifar100 : CifarVariant::Cifar10);
    if (classes_keep > 0)
      ds = keep_classes(ds, classes_keep);
    if (subset > 0)
      ds = take_first(ds, subset);
    if (ds.empty())
      throw ConfigError("no examples left in '" + source + "' after filtering");
    return ds;
  }
};

// gen-basis --------------------------------------------------------------

struct GenBasisFlags {
  std::string shape;
  int kx = 0;
  int ky = 0;
  double phase = kReferencePhase;
  double norm = 1.0;
  std::string out;
  std::string out_raw;
};

int gen_basis(const Env& env, const GenBasisFlags& f) {
  if (f.out.empty() && f.out_raw.empty())
    throw UsageError("gen-basis needs --out and/or --out-raw");
  const GridShape shape = parse_shape(f.shape);
  const BasisMatrix basis = plane_wave(BasisSpec{shape, {f.kx, f.ky}, f.phase, f.norm});
  const auto values = basis.values();
  std::vector<std::string> outputs;

  if (!f.out.empty()) {
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    const double span = *hi - *lo;
    Image img(shape.dy, shape.dx, 1);
    for (int y = 0; y < shape.dy; ++y)
      for (int x = 0; x < shape.dx; ++x)
        img.at(y, x, 0) = span > 0 ? (basis.at(x, y) - *lo) / span : 0.5;
    ensure_parent(f.out);
    write_png(img, f.out);
    outputs.push_back(f.out);
  }
  if (!f.out_raw.empty()) {
    ensure_parent(f.out_raw);
    std::ofstream raw(f.out_raw, std::ios::binary);
    if (!raw)
      throw IoError("cannot write " + f.out_raw);
    for (double v : values) {
      const auto bits = std::bit_cast<std::uint64_t>(v);
      for (int i = 0; i < 8; ++i)
        raw.put(static_cast<char>((bits >> (8 * i)) & 0xFF));
    }
    if (!raw)
      throw IoError("failed writing " + f.out_raw);
    outputs.push_back(f.out_raw);
  }
  const json extra = {{"frobenius_norm", basis.frobenius_norm()}, {"frequency", frequency({f.kx, f.ky}, shape)}};
  write_manifest(env, manifest_for_file(outputs.front()), outputs, extra);
  if (!env.g.quiet)
    env.out << "k=(" << f.kx << "," << f.ky << ") frequency=" << frequency({f.kx, f.ky}, shape)
            << " norm=" << basis.frobenius_norm() << '\n';
  return kExitOk;
}

// perturb ----------------------------------------------------------------

struct PerturbFlags {
  DataFlags data;
  std::string out;
  int kx = 0;
  int ky = 0;
  double phase = kEvalPhase;
  double norm = 2.0;
  std::string mode = "aligned";
  bool fixed_signs = false;
};

int perturb(const Env& env, const PerturbFlags& f) {
  const ChannelMode mode = parse_channel_mode(f.mode);
  const LabeledDataset ds = f.data.load();
  const GridShape shape{ds.images.front().width, ds.images.front().height};
  const BasisSpec spec{shape, {f.kx, f.ky}, f.phase, f.norm};
  env.log("perturbing " + std::to_string(ds.size()) + " images at k=(" + std::to_string(f.kx) + "," +
          std::to_string(f.ky) + ")");
  const LabeledDataset out = perturb_dataset(ds, spec, mode, env.g.seed, f.fixed_signs);
  save_png_dataset(out, f.out);
  write_manifest(env, fs::path(f.out) / "manifest.json", {f.out}, {{"n", out.size()}});
  return kExitOk;
}

// augment ----------------------------------------------------------------

struct AugmentFlags {
  DataFlags data;
  std::string set;
  std::string out;
  std::string trace;
  double magnitude = 0.3;
};

int augment(const Env& env, const AugmentFlags& f) {
  AugmentConfig cfg = augment_config_for(f.set);
  cfg.magnitude = f.magnitude;
  cfg.validate();
  const LabeledDataset ds = f.data.load();
  env.log("augmenting " + std::to_string(ds.size()) + " images with " + std::to_string(cfg.primitives.size()) +
          " primitives");

  LabeledDataset out = ds;
  std::vector<MixTrace> traces(ds.size());
  parallel_for(ds.size(), [&](std::size_t i) {
    Rng rng = make_rng(env.g.seed, i);
    auto [img, trace] = augmix(ds.images[i], cfg, rng);
    out.images[i] = std::move(img);
    traces[i] = std::move(trace);
  });
  save_png_dataset(out, f.out);
  std::vector<std::string> outputs{f.out};
  if (!f.trace.empty()) {
    ensure_parent(f.trace);
    std::ofstream t(f.trace);
    if (!t)
      throw IoError("cannot write " + f.trace);
    for (std::size_t i = 0; i < traces.size(); ++i)
      t << trace_json(i, traces[i]).dump() << '\n';
    outputs.push_back(f.trace);
  }
  write_manifest(env, fs::path(f.out) / "manifest.json", outputs,
                 {{"n", out.size()}, {"primitives", cfg.primitives.names()}});
  return kExitOk;
}

// augment-one ------------------------------------------------------------

struct AugmentOneFlags {
  std::string op;
  double magnitude = 0.3;
  std::string in;
  std::string out;
};

int augment_one(const Env& env, const AugmentOneFlags& f) {
  const PrimitiveSet all = primitive_set_from_letters("svcf");
  const Primitive* prim = all.find(f.op);
  if (!prim) {
    std::string known;
    for (const auto& n : all.names())
      known += (known.empty() ? "" : ", ") + n;
    throw UsageError("unknown --op '" + f.op + "' (known: " + known + ")");
  }
  if (!(f.magnitude >= 0.0 && f.magnitude <= 1.0))
    throw UsageError("--magnitude must lie in [0, 1]");
  const Image img = read_png(f.in);
  Rng rng = make_rng(env.g.seed, 0);
  const Image result = (*prim)(img, f.magnitude, rng);
  ensure_parent(f.out);
  write_png(result, f.out);
  write_manifest(env, manifest_for_file(f.out), {f.out});
  return kExitOk;
}

// eval -------------------------------------------------------------------

struct EvalFlags {
  std::string preds;
  int bins = kDefaultCalibrationBins;
  std::string out;
};

int eval(const Env& env, const EvalFlags& f) {
  const PredictionSet preds = read_predictions(f.preds);
  const MetricReport report = evaluate(preds, f.bins);
  const json j = report_json(report);
  if (!f.out.empty()) {
    ensure_parent(f.out);
    write_json(j, f.out);
    write_manifest(env, manifest_for_file(f.out), {f.out});
  }
  if (!env.g.quiet || f.out.empty())
    env.out << j.dump() << '\n';
  return kExitOk;
}

// heatmap ----------------------------------------------------------------

struct HeatmapFlags {
  DataFlags data;
  std::string predictor;
  double norm = 2.0;
  std::vector<double> norms;
  std::string mode = "aligned";
  double phase = kEvalPhase;
  std::string metric = "error";
  std::string out;
  std::string shape;
  int bins = kDefaultCalibrationBins;
  int scale = 8;
  bool serial = false;
  bool fixed_signs = false;
  bool keep_files = false;
};

std::unique_ptr<Predictor> make_predictor(const std::string& text, const fs::path& work, bool keep_files) {
  if (text.rfind("toy:", 0) == 0)
    return std::make_unique<ToyPredictor>(load_toy(text.substr(4)));
  if (text.rfind("preds:", 0) == 0)
    return std::make_unique<PrecomputedPredictor>(text.substr(6));
  if (text.rfind("cmd:", 0) == 0)
    return std::make_unique<CommandPredictor>(text.substr(4), work, false, keep_files);
  std::error_code ec;
  if (fs::is_directory(text, ec))
    return std::make_unique<PrecomputedPredictor>(text);
  return std::make_unique<CommandPredictor>(text, work, false, keep_files);
}

json row_json(const AttackRow& r) {
  return {{"norm", r.norm},
          {"mean_error", r.mean_error},
          {"max_error", r.max_error},
          {"mean_rms", r.mean_rms},
          {"max_rms", r.max_rms},
          {"evaluated", r.evaluated},
          {"degenerate", r.degenerate},
          {"worst_error_k", {r.worst_error_k.kx, r.worst_error_k.ky}}};
}

int heatmap(const Env& env, const HeatmapFlags& f) {
  const HeatMetric metric = parse_heat_metric(f.metric);
  SweepOptions opts;
  opts.norm = f.norm;
  opts.mode = parse_channel_mode(f.mode);
  opts.phase = f.phase;
  opts.seed = env.g.seed;
  opts.fixed_signs = f.fixed_signs;
  opts.bins = f.bins;
  opts.serial = f.serial;
  if (f.scale < 1)
    throw UsageError("--scale must be >= 1");

  const LabeledDataset ds = f.data.load();
  const GridShape image_shape{ds.images.front().width, ds.images.front().height};
  const BasisCatalog catalog = enumerate_catalog(f.shape.empty() ? image_shape : parse_shape(f.shape));
  const fs::path work = f.out + ".work";
  const auto predictor = make_predictor(f.predictor, work, f.keep_files);
  env.log("sweeping " + std::to_string(catalog.size()) + " wave vectors over " + std::to_string(ds.size()) +
          " images with " + predictor->describe());

  const SweepResult result = sweep_catalog(*predictor, ds, opts, &catalog);
  const Heatmap hm = to_heatmap(result, metric);
  ensure_parent(f.out);
  render(hm, f.out, f.scale);

  json rows = json::array();
  rows.push_back(row_json(summarize(result)));
  for (double n : f.norms) {
    if (n == f.norm)
      continue;
    env.log("extra sweep at norm " + std::to_string(n));
    SweepOptions extra = opts;
    extra.norm = n;
    rows.push_back(row_json(summarize(sweep_catalog(*predictor, ds, extra, &catalog))));
  }
  std::sort(rows.begin(), rows.end(), [](const json& a, const json& b) { return a["norm"] < b["norm"]; });

  json entries = json::array();
  for (const auto& e : result.entries)
    entries.push_back({{"k", {e.k.kx, e.k.ky}},
                       {"frequency", e.frequency},
                       {"degenerate", e.degenerate},
                       {"classification_error", e.report.classification_error},
                       {"rms_calibration_error", e.report.rms_calibration_error}});
  const json summary = {{"shape", {result.shape.dx, result.shape.dy}},
                        {"metric", std::string(to_string(metric))},
                        {"norm", opts.norm},
                        {"mode", std::string(to_string(opts.mode))},
                        {"phase", opts.phase},
                        {"clean", report_json(result.clean)},
                        {"attack", rows},
                        {"entries", entries}};
  const std::string summary_path = f.out + ".summary.json";
  write_json(summary, summary_path);
  write_manifest(env, f.out + ".manifest.json", {f.out + ".csv", f.out + ".png", summary_path},
                 {{"predictor", predictor->describe()}, {"catalog_size", catalog.size()}});
  if (fs::exists(work) && !f.keep_files)
    fs::remove_all(work);
  if (!env.g.quiet) {
    const AttackRow row = summarize(result);
    env.out << "clean_error=" << result.clean.classification_error << " mean_error=" << row.mean_error
            << " max_error=" << row.max_error << '\n';
  }
  return kExitOk;
}

// train-toy / predict-toy -----------------------------------------------

struct TrainFlags {
  DataFlags data;
  std::string aug = "none";
  std::string out;
  int epochs = 30;
  int batch = 64;
  double lr = 0.05;
  double momentum = 0.9;
  double jsd_weight = 12.0;
  int hidden = 128;
  double magnitude = 0.3;
  bool no_flip_crop = false;
};

int train_toy(const Env& env, const TrainFlags& f) {
  TrainConfig cfg;
  cfg.epochs = f.epochs;
  cfg.batch_size = f.batch;
  cfg.learning_rate = f.lr;
  cfg.momentum = f.momentum;
  cfg.jsd_weight = f.jsd_weight;
  cfg.hidden = f.hidden;
  cfg.seed = env.g.seed;
  cfg.flip_crop = !f.no_flip_crop;
  if (f.aug != "none") {
    cfg.augmentation = augment_config_for(f.aug);
    cfg.augmentation->magnitude = f.magnitude;
  }
  cfg.validate();

  const LabeledDataset ds = f.data.load();
  env.log("training on " + std::to_string(ds.size()) + " images, " + std::to_string(ds.num_classes) +
          " classes, aug=" + f.aug);
  json history = json::array();
  const ToyNet net = train(ds, cfg, [&](const EpochStats& s) {
    history.push_back({{"epoch", s.epoch},
                       {"loss", s.loss},
                       {"cross_entropy", s.cross_entropy},
                       {"jsd", s.jsd},
                       {"train_error", s.train_error}});
    std::ostringstream line;
    line << "epoch " << s.epoch + 1 << "/" << cfg.epochs << " loss=" << s.loss << " ce=" << s.cross_entropy
         << " jsd=" << s.jsd << " train_error=" << s.train_error;
    env.log(line.str());
  });
  ensure_parent(f.out);
  save_toy(net, f.out);
  write_manifest(env, manifest_for_file(f.out), {f.out},
                 {{"n", ds.size()}, {"classes", ds.num_classes}, {"history", history}});
  return kExitOk;
}

struct PredictFlags {
  DataFlags data;
  std::string model;
  std::string out;
};

int predict_toy(const Env& env, const PredictFlags& f) {
  const ToyNet net = load_toy(f.model);
  const LabeledDataset ds = f.data.load();
  const PredictionSet preds = predict(net, ds);
  ensure_parent(f.out);
  write_predictions(preds, f.out);
  const MetricReport r = evaluate(preds);
  write_manifest(env, manifest_for_file(f.out), {f.out}, {{"report", report_json(r)}});
  if (!env.g.quiet)
    env.out << "n=" << r.n << " error=" << r.classification_error << '\n';
  return kExitOk;
}

// Unknown-flag hints ------------------------------------------------------

std::string suggestion(const std::string& word, const std::vector<std::string>& candidates) {
  std::string best;
  std::size_t best_d = std::numeric_limits<std::size_t>::max();
  for (const auto& c : candidates) {
    const std::size_t d = levenshtein(word, c);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  if (best.empty() || best_d > std::max<std::size_t>(2, word.size() / 3))
    return {};
  return best;
}

std::vector<std::string> long_flags(const CLI::App& app) {
  std::vector<std::string> out;
  for (const CLI::Option* opt : app.get_options())
    for (const auto& name : opt->get_lnames())
      out.push_back("--" + name);
  return out;
}

} // namespace

std::size_t levenshtein(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1);
  std::vector<std::size_t> cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fourier-basis perturbations, AugMix augmentation and robustness heatmaps", "fouriermix"};
  app.set_version_flag("--version", FOURIERMIX_VERSION);
  app.allow_extras();
  app.set_config("--config", "", "key=value file; explicit flags take precedence");

  Globals g;
  add_with_default(&app, "--seed", g.seed, "Base seed for every random stream");
  add_with_default(&app, "--threads", g.threads, "Worker threads (0 = all cores)");
  app.add_flag("--quiet,-q", g.quiet, "Suppress progress lines");

  auto sub = [&](const std::string& name, const std::string& help) {
    CLI::App* s = app.add_subcommand(name, help);
    s->fallthrough();
    s->allow_extras();
    s->configurable();
    return s;
  };

  GenBasisFlags gb;
  CLI::App* gen = sub("gen-basis", "Render one Fourier-basis matrix");
  gen->add_option("--shape", gb.shape, "Grid as WIDTHxHEIGHT")->required();
  gen->add_option("--kx", gb.kx, "Horizontal wave number")->required();
  gen->add_option("--ky", gb.ky, "Vertical wave number")->required();
  add_with_default(gen, "--phase", gb.phase, "Phase in radians");
  add_with_default(gen, "--norm", gb.norm, "Frobenius norm");
  gen->add_option("--out", gb.out, "PNG rendering (min-max scaled)");
  gen->add_option("--out-raw", gb.out_raw, "Little-endian row-major float64 dump");

  PerturbFlags pf;
  CLI::App* per = sub("perturb", "Add one basis matrix to every image of a dataset");
  pf.data.add_to(*per, "--in", "PNG dataset directory or CIFAR .bin file(s)");
  per->add_option("--out", pf.out, "Output PNG dataset directory")->required();
  per->add_option("--kx", pf.kx)->required();
  per->add_option("--ky", pf.ky)->required();
  add_with_default(per, "--phase", pf.phase, "Radians");
  add_with_default(per, "--norm", pf.norm, "Frobenius norm of the basis");
  add_with_default(per, "--mode", pf.mode, "aligned|flip");
  per->add_flag("--fixed-signs", pf.fixed_signs, "flip mode: one sign draw for the whole dataset");

  AugmentFlags af;
  CLI::App* aug = sub("augment", "AugMix every image of a dataset");
  af.data.add_to(*aug, "--in", "PNG dataset directory or CIFAR .bin file(s)");
  aug->add_option("--set", af.set, "Primitive sets, letters from svcf")->required();
  aug->add_option("--out", af.out, "Output PNG dataset directory")->required();
  aug->add_option("--trace", af.trace, "JSON-lines file, one mixing trace per image");
  add_with_default(aug, "--magnitude", af.magnitude, "Primitive severity in [0, 1]")->check(CLI::Range(0.0, 1.0));

  AugmentOneFlags ao;
  CLI::App* one = sub("augment-one", "Apply a single primitive to one PNG");
  one->add_option("--op", ao.op, "Primitive name")->required();
  add_with_default(one, "--magnitude", ao.magnitude, "Primitive severity in [0, 1]");
  one->add_option("--in", ao.in)->required();
  one->add_option("--out", ao.out)->required();

  EvalFlags ef;
  CLI::App* ev = sub("eval", "Classification and RMS calibration error of a predictions file");
  ev->add_option("--preds", ef.preds)->required();
  add_with_default(ev, "--bins", ef.bins, "Equal-mass calibration bins")->check(CLI::PositiveNumber);
  ev->add_option("--out", ef.out, "report.json");

  HeatmapFlags hf;
  CLI::App* heat = sub("heatmap", "Sweep the basis catalog and render a susceptibility heatmap");
  hf.data.add_to(*heat, "--data", "PNG dataset directory or CIFAR .bin file(s)");
  heat->add_option("--predictor", hf.predictor, "toy:model.bin | preds:dir | cmd:command | dir | command")
      ->required();
  add_with_default(heat, "--norm", hf.norm, "Frobenius norm of every basis");
  heat->add_option("--norms", hf.norms, "Extra norms for the attack summary")->delimiter(',');
  add_with_default(heat, "--mode", hf.mode, "aligned|flip");
  add_with_default(heat, "--phase", hf.phase, "Radians");
  add_with_default(heat, "--metric", hf.metric, "error|rms");
  heat->add_option("--out", hf.out, "Output prefix")->required();
  heat->add_option("--shape", hf.shape, "Basis grid WIDTHxHEIGHT (defaults to the image shape)");
  add_with_default(heat, "--bins", hf.bins, "Equal-mass calibration bins")->check(CLI::PositiveNumber);
  add_with_default(heat, "--scale", hf.scale, "PNG pixels per cell");
  heat->add_flag("--serial", hf.serial, "Evaluate wave vectors one at a time");
  heat->add_flag("--fixed-signs", hf.fixed_signs, "One flip-sign draw for the whole dataset");
  heat->add_flag("--keep-files", hf.keep_files, "Keep the datasets written for command predictors");

  TrainFlags tf;
  CLI::App* tr = sub("train-toy", "Train the small MLP classifier");
  tf.data.add_to(*tr, "--data", "PNG dataset directory or CIFAR .bin file(s)");
  add_with_default(tr, "--aug", tf.aug, "none or primitive-set letters (sv, svf, ...)");
  tr->add_option("--out", tf.out, "model.bin")->required();
  add_with_default(tr, "--epochs", tf.epochs);
  add_with_default(tr, "--batch", tf.batch);
  add_with_default(tr, "--lr", tf.lr, "Initial learning rate (cosine decay)");
  add_with_default(tr, "--momentum", tf.momentum);
  add_with_default(tr, "--jsd-weight", tf.jsd_weight, "Consistency loss weight");
  add_with_default(tr, "--hidden", tf.hidden, "Hidden units");
  add_with_default(tr, "--magnitude", tf.magnitude, "Primitive severity in [0, 1]")->check(CLI::Range(0.0, 1.0));
  tr->add_flag("--no-flip-crop", tf.no_flip_crop, "Skip the random flip and pad-4 crop");

  PredictFlags pr;
  CLI::App* pt = sub("predict-toy", "Write a predictions file for a trained model");
  pr.data.add_to(*pt, "--data", "PNG dataset directory or CIFAR .bin file(s)");
  pt->add_option("--model", pr.model)->required();
  pt->add_option("--out", pr.out)->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    return kExitUsage;
  }

  CLI::App* active = nullptr;
  for (CLI::App* s : app.get_subcommands())
    active = s;

  std::vector<std::string> extras = active ? active->remaining() : std::vector<std::string>{};
  const std::vector<std::string> top = app.remaining();
  extras.insert(extras.end(), top.begin(), top.end());
  if (!extras.empty()) {
    const std::string& word = extras.front();
    if (!active && word.rfind('-', 0) != 0) {
      std::vector<std::string> names;
      for (const CLI::App* s : app.get_subcommands({}))
        names.push_back(s->get_name());
      const std::string hint = suggestion(word, names);
      err << "error: unknown subcommand '" << word << "'" << (hint.empty() ? "" : "; did you mean '" + hint + "'?")
          << '\n';
      return kExitUsage;
    }
    std::vector<std::string> known = long_flags(app);
    if (active) {
      const auto more = long_flags(*active);
      known.insert(known.end(), more.begin(), more.end());
    }
    const std::string flag = word.substr(0, word.find('='));
    const std::string hint = suggestion(flag, known);
    err << "error: unexpected argument '" << word << "'" << (hint.empty() ? "" : "; did you mean '" + hint + "'?")
        << '\n';
    return kExitUsage;
  }
  if (!active) {
    err << "error: a subcommand is required\n" << app.help();
    return kExitUsage;
  }

  set_thread_count(g.threads);
  const Env env{g, app, *active, out, err};
  try {
    const std::string& name = active->get_name();
    if (name == "gen-basis")
      return gen_basis(env, gb);
    if (name == "perturb")
      return perturb(env, pf);
    if (name == "augment")
      return augment(env, af);
    if (name == "augment-one")
      return augment_one(env, ao);
    if (name == "eval")
      return eval(env, ef);
    if (name == "heatmap")
      return heatmap(env, hf);
    if (name == "train-toy")
      return train_toy(env, tf);
    if (name == "predict-toy")
      return predict_toy(env, pr);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

} // namespace fouriermix::cli
