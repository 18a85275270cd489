#include "fouriermix/error.hpp"
#include "fouriermix/heatmap.hpp"
#include "fouriermix/io.hpp"
#include "fouriermix/parallel.hpp"
#include "fouriermix/predictors.hpp"
#include "fouriermix/toy_model.hpp"

#include "helpers.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>

using namespace fouriermix;
using testing_util::TempDir;

namespace {

FunctionPredictor constant_class(int cls, int classes) {
  return FunctionPredictor([=](const LabeledDataset& ds, const EvalContext&) {
    PredictionSet p;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      std::vector<double> row(classes, 0.0);
      row[cls] = 1.0;
      p.probs.push_back(row);
      p.labels.push_back(ds.labels[i]);
    }
    return p;
  });
}

// Scores brightness of the red channel's top-left quadrant; sensitive to perturbations.
FunctionPredictor brightness_predictor() {
  return FunctionPredictor([](const LabeledDataset& ds, const EvalContext&) {
    PredictionSet p;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const Image& img = ds.images[i];
      double s = 0.0;
      for (int y = 0; y < img.height / 2; ++y)
        for (int x = 0; x < img.width / 2; ++x)
          s += img.at(y, x, 0) + 0.5 * img.at(y, x, 1) * (x % 2);
      s /= img.height * img.width / 4.0;
      const double z = 12.0 * (s - 0.5);
      const double p1 = 1.0 / (1.0 + std::exp(-z));
      p.probs.push_back({1.0 - p1, p1});
      p.labels.push_back(ds.labels[i]);
    }
    return p;
  });
}

LabeledDataset with_labels(int label, int n = 16) {
  LabeledDataset ds = testing_util::synthetic_dataset(n, 8, 3);
  for (int& l : ds.labels)
    l = label;
  return ds;
}

} // namespace

TEST(Sweep, ConstantCorrectPredictorGivesZero) {
  const auto pred = constant_class(0, 2);
  const Heatmap hm = sweep(pred, with_labels(0), SweepOptions{}, HeatMetric::Error);
  ASSERT_EQ(hm.values.size(), 64u);
  for (double v : hm.values)
    EXPECT_EQ(v, 0.0);
}

TEST(Sweep, ConstantWrongPredictorGivesOne) {
  const auto pred = constant_class(0, 2);
  const Heatmap hm = sweep(pred, with_labels(1), SweepOptions{}, HeatMetric::Error);
  for (double v : hm.values)
    EXPECT_EQ(v, 1.0);
}

TEST(Sweep, SymmetricUnderNegation) {
  const auto pred = brightness_predictor();
  const LabeledDataset ds = testing_util::synthetic_dataset(32, 8, 4);
  for (HeatMetric metric : {HeatMetric::Error, HeatMetric::RmsCalibration}) {
    const Heatmap hm = sweep(pred, ds, SweepOptions{}, metric);
    for (int kx = 0; kx < 8; ++kx)
      for (int ky = 0; ky < 8; ++ky)
        EXPECT_EQ(hm.at(kx, ky), hm.at((8 - kx) % 8, (8 - ky) % 8));
  }
}

TEST(Sweep, ValuesVaryAndStayInUnitInterval) {
  const auto pred = brightness_predictor();
  const LabeledDataset ds = testing_util::synthetic_dataset(32, 8, 4);
  SweepOptions opts;
  opts.norm = 4.0;
  const Heatmap hm = sweep(pred, ds, opts, HeatMetric::Error);
  const auto [lo, hi] = std::minmax_element(hm.values.begin(), hm.values.end());
  EXPECT_GE(*lo, 0.0);
  EXPECT_LE(*hi, 1.0);
  EXPECT_LT(*lo, *hi);
}

TEST(Sweep, OddShapesFillEveryCell) {
  const auto pred = brightness_predictor();
  LabeledDataset ds = testing_util::synthetic_dataset(8, 8, 5);
  for (auto& img : ds.images) {
    Image cropped(7, 5, 3);
    for (int y = 0; y < 7; ++y)
      for (int x = 0; x < 5; ++x)
        for (int c = 0; c < 3; ++c)
          cropped.at(y, x, c) = img.at(y, x, c);
    img = cropped;
  }
  const Heatmap hm = sweep(pred, ds, SweepOptions{}, HeatMetric::Error);
  EXPECT_EQ(hm.shape, (GridShape{5, 7}));
  for (double v : hm.values)
    EXPECT_FALSE(std::isnan(v));
  for (int kx = 0; kx < 5; ++kx)
    for (int ky = 0; ky < 7; ++ky)
      EXPECT_EQ(hm.at(kx, ky), hm.at((5 - kx) % 5, (7 - ky) % 7));
}

TEST(Sweep, DegenerateEntriesCarryCleanMetrics) {
  const auto pred = brightness_predictor();
  const LabeledDataset ds = testing_util::synthetic_dataset(16, 8, 6);
  const SweepResult r = sweep_catalog(pred, ds, SweepOptions{});
  std::size_t degenerate = 0;
  for (const auto& e : r.entries)
    if (e.degenerate) {
      ++degenerate;
      EXPECT_EQ(e.report.classification_error, r.clean.classification_error);
      // At 3pi/2 the field is -sin, which vanishes on the four self-conjugate wave vectors.
      EXPECT_EQ((2 * e.k.kx) % 8, 0);
      EXPECT_EQ((2 * e.k.ky) % 8, 0);
    }
  EXPECT_EQ(degenerate, 4u);
  EXPECT_EQ(r.entries.size(), 34u);
}

TEST(Sweep, ReproducibleAndThreadIndependent) {
  const auto pred = brightness_predictor();
  const LabeledDataset ds = testing_util::synthetic_dataset(24, 8, 7);
  SweepOptions opts;
  opts.mode = ChannelMode::RandomFlip;
  opts.seed = 5;
  set_thread_count(1);
  const Heatmap a = sweep(pred, ds, opts, HeatMetric::RmsCalibration);
  set_thread_count(4);
  const Heatmap b = sweep(pred, ds, opts, HeatMetric::RmsCalibration);
  opts.serial = true;
  const Heatmap c = sweep(pred, ds, opts, HeatMetric::RmsCalibration);
  set_thread_count(0);
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.values, c.values);
}

TEST(Sweep, PredictorFailureNamesWaveVector) {
  const FunctionPredictor failing(
      [](const LabeledDataset& ds, const EvalContext& ctx) -> PredictionSet {
        if (ctx.k && ctx.k->kx == 2 && ctx.k->ky == 1)
          throw std::runtime_error("model exploded");
        PredictionSet p;
        for (std::size_t i = 0; i < ds.size(); ++i) {
          p.probs.push_back({1.0, 0.0});
          p.labels.push_back(ds.labels[i]);
        }
        return p;
      },
      false);
  try {
    sweep(failing, with_labels(0), SweepOptions{}, HeatMetric::Error);
    FAIL();
  } catch (const PredictorError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("k=(2, 1)"), std::string::npos) << msg;
    EXPECT_NE(msg.find("model exploded"), std::string::npos) << msg;
  }
}

TEST(Sweep, WrongPredictionCountRejected) {
  const FunctionPredictor short_pred([](const LabeledDataset&, const EvalContext&) {
    PredictionSet p;
    p.probs = {{1.0, 0.0}};
    p.labels = {0};
    return p;
  });
  EXPECT_THROW(sweep(short_pred, with_labels(0), SweepOptions{}, HeatMetric::Error), PredictorError);
}

TEST(Sweep, CatalogShapeMismatchNamesBothShapes) {
  const auto pred = constant_class(0, 2);
  const BasisCatalog cat = enumerate_catalog({16, 16});
  try {
    sweep_catalog(pred, with_labels(0), SweepOptions{}, &cat);
    FAIL();
  } catch (const ShapeMismatch& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("16x16"), std::string::npos);
    EXPECT_NE(msg.find("8x8"), std::string::npos);
  }
}

TEST(ShiftCenter, OriginMovesToCenter) {
  for (auto [dx, dy] : {std::pair{8, 8}, {5, 7}}) {
    Heatmap hm;
    hm.shape = {dx, dy};
    hm.values.resize(hm.shape.cells());
    for (std::size_t i = 0; i < hm.values.size(); ++i)
      hm.values[i] = static_cast<double>(i);
    const Heatmap s = shift_center(hm);
    EXPECT_EQ(s.at(dx / 2, dy / 2), hm.at(0, 0));
    EXPECT_TRUE(s.centered);
    auto a = hm.values;
    auto b = s.values;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    EXPECT_EQ(a, b);
    if (dx % 2 == 0 && dy % 2 == 0)
      EXPECT_EQ(shift_center(s).values, hm.values);
  }
}

TEST(AttackSummary, MeanMatchesSweepEntries) {
  const auto pred = brightness_predictor();
  const LabeledDataset ds = testing_util::synthetic_dataset(24, 8, 8);
  const std::vector<double> norms{1.0, 2.0, 4.0};
  const auto rows = attack_summary(pred, ds, norms);
  ASSERT_EQ(rows.size(), 3u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    SweepOptions opts;
    opts.norm = norms[i];
    const SweepResult r = sweep_catalog(pred, ds, opts);
    double sum = 0.0;
    double max = 0.0;
    int n = 0;
    for (const auto& e : r.entries) {
      if (e.degenerate)
        continue;
      sum += e.report.classification_error;
      max = std::max(max, e.report.classification_error);
      ++n;
    }
    EXPECT_NEAR(rows[i].mean_error, sum / n, 1e-12);
    EXPECT_EQ(rows[i].max_error, max);
    EXPECT_LE(rows[i].mean_error, rows[i].max_error);
    EXPECT_LE(rows[i].mean_rms, rows[i].max_rms);
    EXPECT_EQ(rows[i].evaluated, 30u);
  }
  EXPECT_THROW(attack_summary(pred, ds, {}), ConfigError);
}

TEST(AttackSummary, ConstantCorrectPredictorAllZero) {
  const auto pred = constant_class(1, 2);
  const std::vector<double> norms{1.0, 3.0};
  for (const auto& row : attack_summary(pred, with_labels(1), norms)) {
    EXPECT_EQ(row.mean_error, 0.0);
    EXPECT_EQ(row.max_error, 0.0);
  }
}

TEST(Colormap, MonotoneDarkToBright) {
  auto brightness = [](std::array<std::uint8_t, 3> c) { return 0.299 * c[0] + 0.587 * c[1] + 0.114 * c[2]; };
  double prev = -1.0;
  for (int i = 0; i <= 100; ++i) {
    const double b = brightness(colormap(i / 100.0));
    EXPECT_GE(b, prev);
    prev = b;
  }
  EXPECT_EQ(colormap(0.0), (std::array<std::uint8_t, 3>{0, 0, 4}));
  EXPECT_EQ(colormap(1.0), (std::array<std::uint8_t, 3>{252, 255, 164}));
  EXPECT_EQ(colormap(-1.0), colormap(0.0));
  EXPECT_EQ(colormap(2.0), colormap(1.0));
}

TEST(Render, CsvRoundTripAndPngSize) {
  TempDir dir("render");
  Heatmap hm;
  hm.shape = {6, 4};
  Rng rng(3);
  for (std::size_t i = 0; i < 24; ++i)
    hm.values.push_back(uniform_real(rng, 0.0, 1.0));
  const std::string prefix = (dir / "hm").string();
  render(hm, prefix, 3);
  const auto grid = read_csv_grid(prefix + ".csv");
  const Heatmap shifted = shift_center(hm);
  ASSERT_EQ(grid.size(), 6u);
  for (int kx = 0; kx < 6; ++kx) {
    ASSERT_EQ(grid[kx].size(), 4u);
    for (int ky = 0; ky < 4; ++ky)
      EXPECT_NEAR(grid[kx][ky], shifted.at(kx, ky), 1e-6);
  }
  const Image png = read_png(prefix + ".png");
  EXPECT_EQ(png.height, 18);
  EXPECT_EQ(png.width, 12);
  EXPECT_THROW(write_heatmap_png(hm, prefix + "2.png", 0), ConfigError);
}

TEST(Predictors, PrecomputedDirectory) {
  TempDir dir("precomputed");
  const LabeledDataset ds = with_labels(0, 4);
  PredictionSet p;
  for (int i = 0; i < 4; ++i) {
    p.probs.push_back({0.9, 0.1});
    p.labels.push_back(0);
  }
  write_predictions(p, dir / "clean.txt");
  for (const auto& e : enumerate_catalog({8, 8}).entries) {
    PredictionSet q = p;
    if (e.k.kx == 1 && e.k.ky == 0)
      q.probs[0] = {0.1, 0.9};
    write_predictions(q, dir / ("k_" + std::to_string(e.k.kx) + "_" + std::to_string(e.k.ky) + ".txt"));
  }
  const PrecomputedPredictor pred(dir.path());
  const Heatmap hm = sweep(pred, ds, SweepOptions{}, HeatMetric::Error);
  EXPECT_EQ(hm.at(1, 0), 0.25);
  EXPECT_EQ(hm.at(7, 0), 0.25);
  EXPECT_EQ(hm.at(2, 3), 0.0);
  std::filesystem::remove(dir / "k_2_3.txt");
  EXPECT_THROW(sweep(pred, ds, SweepOptions{}, HeatMetric::Error), PredictorError);
}

TEST(Predictors, ExternalCommandProtocol) {
  TempDir dir("command");
  const auto script = dir / "predict.sh";
  {
    // Predicts class 0 for every image listed in labels.txt.
    std::ofstream s(script);
    s << "#!/bin/sh\n"
         "set -e\n"
         "test -f \"$1/manifest.json\"\n"
         "{ echo '#format=logits classes=2'; grep -v '^#' \"$1/labels.txt\" | "
         "while read f l; do echo \"$l 3 0\"; done; } > \"$1/predictions.txt\"\n";
  }
  std::filesystem::permissions(script, std::filesystem::perms::owner_all);
  const CommandPredictor pred(script.string(), dir / "work");
  const LabeledDataset ds = testing_util::synthetic_dataset(6, 8, 9);
  const SweepResult r = sweep_catalog(pred, ds, SweepOptions{});
  EXPECT_NEAR(r.clean.classification_error, 0.5, 1e-12);
  for (const auto& e : r.entries)
    EXPECT_NEAR(e.report.classification_error, 0.5, 1e-12);
  EXPECT_TRUE(std::filesystem::is_empty(dir / "work"));

  const CommandPredictor failing("false", dir / "work");
  EXPECT_THROW(failing.predict(ds, EvalContext{}), PredictorError);
}

TEST(Predictors, ToyModelSweepIsSymmetric) {
  const LabeledDataset ds = testing_util::synthetic_dataset(64, 8, 10);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.hidden = 16;
  cfg.seed = 2;
  const ToyPredictor pred(train(ds, cfg));
  const Heatmap hm = sweep(pred, ds, SweepOptions{}, HeatMetric::Error);
  for (int kx = 0; kx < 8; ++kx)
    for (int ky = 0; ky < 8; ++ky)
      EXPECT_EQ(hm.at(kx, ky), hm.at((8 - kx) % 8, (8 - ky) % 8));
}
