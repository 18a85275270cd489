#include "fouriermix/error.hpp"
#include "fouriermix/image.hpp"
#include "fouriermix/io.hpp"

#include "helpers.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

using namespace fouriermix;
using testing_util::TempDir;

TEST(Clip, ClampsBothEnds) {
  Image img(1, 3, 1);
  img.data = {1.3, -0.2, 0.4};
  const Image out = clip(img);
  EXPECT_EQ(out.data, (std::vector<double>{1.0, 0.0, 0.4}));
  EXPECT_TRUE(out.same_shape(img));
}

TEST(Clip, InRangeImageUnchanged) {
  const Image img = testing_util::random_image(5, 4, 3, 1);
  EXPECT_EQ(clip(img), img);
}

TEST(Clip, Idempotent) {
  Image img = testing_util::random_image(6, 6, 3, 2);
  for (double& v : img.data)
    v = v * 3.0 - 1.0;
  const Image once = clip(img);
  EXPECT_EQ(clip(once), once);
  for (double v : once.data) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

namespace {

std::vector<std::uint8_t> cifar_records(int n, CifarVariant variant) {
  std::vector<std::uint8_t> bytes;
  for (int r = 0; r < n; ++r) {
    if (variant == CifarVariant::Cifar100)
      bytes.push_back(static_cast<std::uint8_t>(19)); // coarse
    bytes.push_back(static_cast<std::uint8_t>(r % 10));
    for (int i = 0; i < 3072; ++i)
      bytes.push_back(static_cast<std::uint8_t>((i * 7 + r * 13) % 256));
  }
  return bytes;
}

} // namespace

TEST(Cifar, TenRecordsGiveTenImages) {
  const auto bytes = cifar_records(10, CifarVariant::Cifar10);
  ASSERT_EQ(bytes.size(), 30730u);
  const LabeledDataset ds = parse_cifar_binary(bytes, CifarVariant::Cifar10);
  EXPECT_EQ(ds.size(), 10u);
  EXPECT_EQ(ds.num_classes, 10);
  for (int i = 0; i < 10; ++i)
    EXPECT_EQ(ds.labels[i], i);
}

TEST(Cifar, PlanarBytesMapToInterleavedPixels) {
  const auto bytes = cifar_records(1, CifarVariant::Cifar10);
  const LabeledDataset ds = parse_cifar_binary(bytes, CifarVariant::Cifar10);
  const Image& img = ds.images.front();
  ASSERT_EQ(img.height, 32);
  ASSERT_EQ(img.width, 32);
  ASSERT_EQ(img.channels, 3);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 32; ++x)
        ASSERT_EQ(img.at(y, x, c), bytes[1 + c * 1024 + y * 32 + x] / 255.0);
}

TEST(Cifar, ByteEndpoints) {
  std::vector<std::uint8_t> bytes(3073, 0);
  bytes[1] = 255;
  const LabeledDataset ds = parse_cifar_binary(bytes, CifarVariant::Cifar10);
  EXPECT_EQ(ds.images[0].at(0, 0, 0), 1.0);
  EXPECT_EQ(ds.images[0].at(0, 1, 0), 0.0);
}

TEST(Cifar, HundredUsesFineLabel) {
  const auto bytes = cifar_records(3, CifarVariant::Cifar100);
  const LabeledDataset ds = parse_cifar_binary(bytes, CifarVariant::Cifar100);
  EXPECT_EQ(ds.num_classes, 100);
  EXPECT_EQ(ds.labels, (std::vector<int>{0, 1, 2}));
}

TEST(Cifar, TruncatedFileNamesBothSizes) {
  auto bytes = cifar_records(2, CifarVariant::Cifar10);
  bytes.pop_back();
  try {
    parse_cifar_binary(bytes, CifarVariant::Cifar10);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("6145"), std::string::npos) << msg;
    EXPECT_NE(msg.find("3073"), std::string::npos) << msg;
  }
}

TEST(Cifar, LoadsFromDisk) {
  TempDir dir("cifar");
  const auto bytes = cifar_records(4, CifarVariant::Cifar10);
  std::ofstream(dir / "batch.bin", std::ios::binary).write(reinterpret_cast<const char*>(bytes.data()),
                                                            static_cast<std::streamsize>(bytes.size()));
  const LabeledDataset ds = load_dataset((dir / "batch.bin").string());
  EXPECT_EQ(ds.size(), 4u);
  const std::string both = (dir / "batch.bin").string() + "," + (dir / "batch.bin").string();
  EXPECT_EQ(load_dataset(both).size(), 8u);
}

TEST(Predictions, LogitsAreSoftmaxed) {
  std::istringstream in("#format=logits classes=2\n1 0 0\n");
  const PredictionSet p = parse_predictions(in);
  ASSERT_EQ(p.size(), 1u);
  EXPECT_DOUBLE_EQ(p.probs[0][0], 0.5);
  EXPECT_DOUBLE_EQ(p.probs[0][1], 0.5);
  EXPECT_EQ(p.labels[0], 1);
}

TEST(Predictions, ProbabilitiesPassThrough) {
  std::istringstream in("#format=probs classes=3\n2 0.25 0.25 0.5\n0 1 0 0\n");
  const PredictionSet p = parse_predictions(in);
  EXPECT_EQ(p.probs[0], (std::vector<double>{0.25, 0.25, 0.5}));
  EXPECT_EQ(p.probs[1], (std::vector<double>{1, 0, 0}));
}

TEST(Predictions, RaggedRowsRejected) {
  std::ostringstream text;
  text << "#format=logits classes=10\n0";
  for (int i = 0; i < 10; ++i)
    text << " 0.1";
  text << "\n1";
  for (int i = 0; i < 9; ++i)
    text << " 0.1";
  text << "\n";
  std::istringstream in(text.str());
  EXPECT_THROW(parse_predictions(in), FormatError);
}

TEST(Predictions, NonFiniteRejected) {
  std::istringstream a("#format=logits classes=2\n0 nan 1\n");
  EXPECT_THROW(parse_predictions(a), FormatError);
  std::istringstream b("#format=logits classes=2\n0 inf 1\n");
  EXPECT_THROW(parse_predictions(b), FormatError);
}

TEST(Predictions, MissingHeaderAndBadRowsRejected) {
  std::istringstream a("0 0.5 0.5\n");
  EXPECT_THROW(parse_predictions(a), FormatError);
  std::istringstream b("#format=probs classes=2\n0 0.7 0.7\n");
  EXPECT_THROW(parse_predictions(b), FormatError);
  std::istringstream c("#format=probs classes=2\n5 0.5 0.5\n");
  EXPECT_THROW(parse_predictions(c), FormatError);
}

TEST(Predictions, SoftmaxShiftInvariant) {
  fouriermix::Rng rng(3);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> logits(7);
    for (double& v : logits)
      v = u(rng);
    const double shift = u(rng) * 100.0;
    std::ostringstream a;
    std::ostringstream b;
    a.precision(17);
    b.precision(17);
    a << "#format=logits classes=7\n0";
    b << "#format=logits classes=7\n0";
    for (double v : logits) {
      a << ' ' << v;
      b << ' ' << v + shift;
    }
    std::istringstream ia(a.str());
    std::istringstream ib(b.str());
    const auto pa = parse_predictions(ia);
    const auto pb = parse_predictions(ib);
    for (int c = 0; c < 7; ++c)
      EXPECT_NEAR(pa.probs[0][c], pb.probs[0][c], 1e-9);
  }
}

TEST(Predictions, WriteReadRoundTrip) {
  TempDir dir("preds");
  PredictionSet p;
  p.probs = {{0.1, 0.9}, {0.3333333333333333, 0.6666666666666667}};
  p.labels = {1, 0};
  write_predictions(p, dir / "p.txt");
  const PredictionSet q = read_predictions(dir / "p.txt");
  EXPECT_EQ(q.labels, p.labels);
  EXPECT_EQ(q.probs, p.probs);
}

TEST(Png, RoundTripWithinQuantization) {
  TempDir dir("png");
  const Image img = testing_util::random_image(7, 9, 3, 11);
  write_png(img, dir / "a.png");
  const Image back = read_png(dir / "a.png");
  ASSERT_TRUE(back.same_shape(img));
  for (std::size_t i = 0; i < img.size(); ++i)
    EXPECT_LE(std::abs(back.data[i] - img.data[i]), 1.0 / 255 + 1e-9);
}

TEST(Png, EndpointsAndGray) {
  TempDir dir("png");
  Image img(2, 2, 1);
  img.data = {0.0, 1.0, 0.5, 0.25};
  EXPECT_EQ(to_byte(0.0), 0);
  EXPECT_EQ(to_byte(1.0), 255);
  write_png(img, dir / "g.png");
  const Image back = read_png(dir / "g.png");
  EXPECT_EQ(back.channels, 1);
  EXPECT_EQ(back.data[0], 0.0);
  EXPECT_EQ(back.data[1], 1.0);
  EXPECT_EQ(back.data[2], 128 / 255.0);
}

TEST(PngDataset, RoundTripKeepsLabels) {
  TempDir dir("pngds");
  const LabeledDataset ds = testing_util::synthetic_dataset(6, 8, 5, 3);
  save_png_dataset(ds, dir.path());
  const LabeledDataset back = load_dataset(dir.path().string());
  EXPECT_EQ(back.labels, ds.labels);
  EXPECT_EQ(back.num_classes, 3);
  ASSERT_EQ(back.size(), ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i)
    for (std::size_t j = 0; j < ds.images[i].size(); ++j)
      EXPECT_EQ(back.images[i].data[j], to_byte(ds.images[i].data[j]) / 255.0);
}

TEST(Dataset, FilteringHelpers) {
  const LabeledDataset ds = testing_util::synthetic_dataset(12, 4, 1, 4);
  const LabeledDataset two = keep_classes(ds, 2);
  EXPECT_EQ(two.num_classes, 2);
  EXPECT_EQ(two.size(), 6u);
  for (int l : two.labels)
    EXPECT_LT(l, 2);
  EXPECT_EQ(take_first(ds, 5).size(), 5u);
  EXPECT_EQ(take_first(ds, 50).size(), 12u);
}

TEST(Dataset, ValidateRejectsMixedShapes) {
  LabeledDataset ds = testing_util::synthetic_dataset(2, 4, 1);
  ds.images[1] = Image(5, 4, 3);
  EXPECT_THROW(ds.validate(), ShapeMismatch);
}

TEST(PredictionSet, ValidateChecksRows) {
  PredictionSet p;
  p.probs = {{0.5, 0.5}};
  p.labels = {0};
  EXPECT_NO_THROW(p.validate());
  p.probs = {{0.5, 0.6}};
  EXPECT_THROW(p.validate(), FormatError);
  p.probs = {{1.5, -0.5}};
  EXPECT_THROW(p.validate(), FormatError);
}
