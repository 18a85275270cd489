#include "fouriermix/error.hpp"
#include "fouriermix/io.hpp"
#include "fouriermix/parallel.hpp"
#include "fouriermix/toy_model.hpp"

#include "helpers.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>

using namespace fouriermix;
using testing_util::TempDir;

namespace {

TrainBatch random_batch(int input, int n, int classes, bool views, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto fill = [&](Eigen::MatrixXd& m) {
    m.resize(input, n);
    for (Eigen::Index i = 0; i < m.size(); ++i)
      m.data()[i] = u(rng);
  };
  TrainBatch b;
  fill(b.clean);
  if (views) {
    fill(b.aug1);
    fill(b.aug2);
  }
  for (int i = 0; i < n; ++i)
    b.labels.push_back(static_cast<int>(uniform_index(rng, classes)));
  return b;
}

std::vector<double> flatten(const Gradients& g) {
  ToyNet as_net{g.w1, g.b1, g.w2, g.b2};
  return as_net.flatten();
}

// Two classes of 4x4 single-channel images, linearly separable by a fixed direction.
LabeledDataset separable_dataset(int n, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  LabeledDataset ds;
  ds.num_classes = 2;
  while (static_cast<int>(ds.size()) < n) {
    Image img(4, 4, 1);
    double score = 0.0;
    for (int i = 0; i < 16; ++i) {
      img.data[i] = u(rng);
      score += (i % 3 == 0 ? 1.0 : -0.5) * (img.data[i] - 0.5);
    }
    if (std::abs(score) < 0.3)
      continue;
    ds.images.push_back(std::move(img));
    ds.labels.push_back(score > 0 ? 1 : 0);
  }
  return ds;
}

} // namespace

TEST(ToyNet, ZeroNetIsUniform) {
  const ToyNet net = ToyNet::zeros(12, 5, 4);
  const std::vector<double> x(12, 0.3);
  const Eigen::VectorXd p = forward(net, x);
  for (int c = 0; c < 4; ++c)
    EXPECT_DOUBLE_EQ(p[c], 0.25);
  EXPECT_EQ(net.parameter_count(), 12u * 5 + 5 + 5 * 4 + 4);
}

TEST(ToyNet, OutputsAreDistributions) {
  const ToyNet net = ToyNet::random(20, 8, 3, 1);
  const TrainBatch b = random_batch(20, 50, 3, false, 2);
  const Eigen::MatrixXd p = forward_batch(net, b.clean * 50.0);
  for (Eigen::Index j = 0; j < p.cols(); ++j) {
    EXPECT_NEAR(p.col(j).sum(), 1.0, 1e-9);
    EXPECT_GE(p.col(j).minCoeff(), 0.0);
  }
}

TEST(ToyNet, SoftmaxShiftInvariance) {
  ToyNet net = ToyNet::random(6, 4, 3, 3);
  const std::vector<double> x{0.1, -0.2, 0.3, 0.5, -0.7, 0.9};
  const Eigen::VectorXd before = forward(net, x);
  net.b2.array() += 123.0;
  const Eigen::VectorXd after = forward(net, x);
  EXPECT_LT((before - after).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ToyNet, WrongInputLengthRejected) {
  const ToyNet net = ToyNet::zeros(6, 2, 2);
  EXPECT_THROW(forward(net, std::vector<double>(5)), ShapeMismatch);
  EXPECT_THROW(ToyNet::zeros(0, 2, 2), ConfigError);
}

TEST(ToyNet, FlattenRoundTrip) {
  const ToyNet a = ToyNet::random(7, 3, 2, 4);
  ToyNet b = ToyNet::zeros(7, 3, 2);
  b.unflatten(a.flatten());
  EXPECT_EQ(a, b);
  EXPECT_THROW(b.unflatten(std::vector<double>(3)), ConfigError);
}

TEST(ToyLoss, GradientMatchesFiniteDifferences) {
  for (bool views : {false, true}) {
    const TrainBatch batch = random_batch(10, 3, 4, views, views ? 5 : 6);
    ToyNet net = ToyNet::random(10, 6, 4, 7);
    // Keep pre-activations away from the ReLU kink so the central difference is smooth.
    net.b1.setConstant(0.05);
    Gradients g;
    toy_loss(net, batch, 12.0, &g);
    const std::vector<double> analytic = flatten(g);
    const auto loss_at = [&](const std::vector<double>& params) {
      ToyNet probe = net;
      probe.unflatten(params);
      return toy_loss(probe, batch, 12.0).total;
    };
    const std::vector<double> numeric = oracle::numeric_gradient(loss_at, net.flatten(), 1e-5);
    ASSERT_EQ(analytic.size(), numeric.size());
    double max_rel = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
      const double denom = std::max({std::abs(analytic[i]), std::abs(numeric[i]), 1e-6});
      max_rel = std::max(max_rel, std::abs(analytic[i] - numeric[i]) / denom);
    }
    EXPECT_LT(max_rel, 1e-5) << (views ? "with" : "without") << " consistency term";
  }
}

TEST(ToyLoss, PartsAreBounded) {
  const TrainBatch batch = random_batch(10, 16, 3, true, 8);
  const ToyNet net = ToyNet::random(10, 6, 3, 9);
  const LossParts parts = toy_loss(net, batch, 2.0);
  EXPECT_GE(parts.cross_entropy, 0.0);
  EXPECT_GE(parts.jsd, 0.0);
  EXPECT_LE(parts.jsd, std::log(3.0));
  EXPECT_NEAR(parts.total, parts.cross_entropy + 2.0 * parts.jsd, 1e-12);
}

TEST(ToyLoss, ZeroWeightIgnoresViews) {
  const TrainBatch with = random_batch(10, 5, 3, true, 10);
  TrainBatch without = with;
  without.aug1.resize(0, 0);
  without.aug2.resize(0, 0);
  const ToyNet net = ToyNet::random(10, 6, 3, 11);
  Gradients ga;
  Gradients gb;
  const LossParts a = toy_loss(net, with, 0.0, &ga);
  const LossParts b = toy_loss(net, without, 0.0, &gb);
  EXPECT_EQ(a.total, b.total);
  EXPECT_EQ(flatten(ga), flatten(gb));
}

TEST(ToyLoss, LabelCountChecked) {
  TrainBatch batch = random_batch(4, 3, 2, false, 12);
  batch.labels.pop_back();
  EXPECT_THROW(toy_loss(ToyNet::zeros(4, 2, 2), batch, 0.0), ConfigError);
}

TEST(Train, ZeroJsdWeightMatchesPlainTraining) {
  const LabeledDataset ds = testing_util::synthetic_dataset(40, 8, 13);
  TrainConfig plain;
  plain.epochs = 2;
  plain.hidden = 8;
  plain.batch_size = 16;
  plain.seed = 3;
  TrainConfig zero = plain;
  zero.augmentation = augment_config_for("svf");
  zero.jsd_weight = 0.0;
  EXPECT_EQ(train(ds, zero), train(ds, plain));
}

TEST(Train, ReproducibleAndThreadIndependent) {
  const LabeledDataset ds = testing_util::synthetic_dataset(24, 8, 14);
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.hidden = 8;
  cfg.batch_size = 8;
  cfg.seed = 5;
  cfg.augmentation = augment_config_for("svf");
  set_thread_count(1);
  const ToyNet a = train(ds, cfg);
  set_thread_count(4);
  const ToyNet b = train(ds, cfg);
  set_thread_count(0);
  EXPECT_EQ(a, b);
  cfg.seed = 6;
  EXPECT_FALSE(train(ds, cfg) == a);
}

TEST(Train, LearnsSeparableProblem) {
  const LabeledDataset ds = separable_dataset(400, 15);
  TrainConfig cfg;
  cfg.epochs = 50;
  cfg.hidden = 16;
  cfg.batch_size = 32;
  cfg.flip_crop = false;
  cfg.seed = 1;
  double last_error = 1.0;
  const ToyNet net = train(ds, cfg, [&](const EpochStats& s) { last_error = s.train_error; });
  EXPECT_LT(classification_error(predict(net, ds)), 0.05);
  EXPECT_LT(last_error, 0.05);
}

TEST(Train, EpochStatsReported) {
  const LabeledDataset ds = testing_util::synthetic_dataset(20, 8, 16);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.hidden = 4;
  cfg.augmentation = augment_config_for("sv");
  std::vector<EpochStats> seen;
  train(ds, cfg, [&](const EpochStats& s) { seen.push_back(s); });
  ASSERT_EQ(seen.size(), 3u);
  for (int e = 0; e < 3; ++e) {
    EXPECT_EQ(seen[e].epoch, e);
    EXPECT_NEAR(seen[e].loss, seen[e].cross_entropy + cfg.jsd_weight * seen[e].jsd, 1e-9);
    EXPECT_GE(seen[e].train_error, 0.0);
    EXPECT_LE(seen[e].train_error, 1.0);
  }
}

TEST(Train, ConfigValidation) {
  const LabeledDataset ds = testing_util::synthetic_dataset(4, 8, 17);
  TrainConfig cfg;
  cfg.momentum = 1.0;
  EXPECT_THROW(train(ds, cfg), ConfigError);
  cfg = TrainConfig{};
  cfg.learning_rate = 0.0;
  EXPECT_THROW(train(ds, cfg), ConfigError);
  cfg = TrainConfig{};
  cfg.jsd_weight = -1.0;
  EXPECT_THROW(train(ds, cfg), ConfigError);
  EXPECT_THROW(train(LabeledDataset{}, TrainConfig{}), ConfigError);
}

TEST(Train, DivergenceReported) {
  const LabeledDataset ds = testing_util::synthetic_dataset(16, 8, 18);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.learning_rate = 1e200;
  cfg.hidden = 4;
  EXPECT_THROW(train(ds, cfg), TrainingError);
}

TEST(ToyModelFile, RoundTrip) {
  TempDir dir("toyfile");
  const ToyNet net = ToyNet::random(9, 4, 3, 19);
  save_toy(net, dir / "m.toy");
  EXPECT_EQ(load_toy(dir / "m.toy"), net);
  EXPECT_EQ(std::filesystem::file_size(dir / "m.toy"), 4 + 12 + 8 * net.parameter_count());
}

TEST(ToyModelFile, CorruptFilesRejected) {
  TempDir dir("toycorrupt");
  const ToyNet net = ToyNet::random(9, 4, 3, 20);
  save_toy(net, dir / "m.toy");
  const auto bytes = read_file_bytes(dir / "m.toy");
  auto write = [&](const std::string& name, std::vector<std::uint8_t> data) {
    std::ofstream out(dir / name, std::ios::binary);
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  };
  write("truncated.toy", std::vector<std::uint8_t>(bytes.begin(), bytes.end() - 3));
  EXPECT_THROW(load_toy(dir / "truncated.toy"), FormatError);
  auto trailing = bytes;
  trailing.push_back(0);
  write("trailing.toy", trailing);
  EXPECT_THROW(load_toy(dir / "trailing.toy"), FormatError);
  auto magic = bytes;
  magic[0] = 'X';
  write("magic.toy", magic);
  EXPECT_THROW(load_toy(dir / "magic.toy"), FormatError);
  auto nan = bytes;
  std::fill(nan.begin() + 16, nan.begin() + 24, std::uint8_t{0xFF});
  write("nan.toy", nan);
  EXPECT_THROW(load_toy(dir / "nan.toy"), FormatError);
  EXPECT_THROW(load_toy(dir / "missing.toy"), IoError);
}

TEST(ToyPredictor, MatchesPredict) {
  const LabeledDataset ds = testing_util::synthetic_dataset(10, 8, 21);
  const ToyNet net = ToyNet::random(192, 5, 2, 22);
  const ToyPredictor pred(net);
  const PredictionSet a = pred.predict(ds, EvalContext{});
  const PredictionSet b = predict(net, ds);
  EXPECT_EQ(a.probs, b.probs);
  EXPECT_EQ(a.labels, ds.labels);
}
