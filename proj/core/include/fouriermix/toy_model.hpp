#pragma once

#include "fouriermix/augmix.hpp"
#include "fouriermix/heatmap.hpp"
#include "fouriermix/image.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace fouriermix {

// softmax(W2 relu(W1 x + b1) + b2). Column-vector convention: W1 is hidden x input.
struct ToyNet {
  Eigen::MatrixXd w1;
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;
  Eigen::VectorXd b2;

  int input_dim() const { return static_cast<int>(w1.cols()); }
  int hidden_dim() const { return static_cast<int>(w1.rows()); }
  int classes() const { return static_cast<int>(w2.rows()); }

  static ToyNet zeros(int input, int hidden, int classes);
  // He-uniform first layer, uniform(+-1/sqrt(hidden)) second layer, zero biases.
  static ToyNet random(int input, int hidden, int classes, std::uint64_t seed);

  bool all_finite() const;
  std::size_t parameter_count() const;
  // Flat views in declaration order (w1, b1, w2, b2), column-major matrices.
  std::vector<double> flatten() const;
  void unflatten(std::span<const double> params);

  friend bool operator==(const ToyNet& a, const ToyNet& b);
};

Eigen::VectorXd forward(const ToyNet& net, std::span<const double> input);
// Columns are examples.
Eigen::MatrixXd forward_batch(const ToyNet& net, const Eigen::MatrixXd& inputs);

// Normalized inputs, one column per example. aug1/aug2 are empty without augmentation.
struct TrainBatch {
  Eigen::MatrixXd clean;
  Eigen::MatrixXd aug1;
  Eigen::MatrixXd aug2;
  std::vector<int> labels;

  bool has_views() const { return aug1.size() > 0 && aug2.size() > 0; }
};

struct LossParts {
  double total = 0.0;
  double cross_entropy = 0.0;
  double jsd = 0.0; // batch mean, before the weight
};

struct Gradients {
  Eigen::MatrixXd w1;
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;
  Eigen::VectorXd b2;
};

// Batch-mean cross-entropy on the clean view plus jsd_weight times the batch-mean
// Jensen-Shannon consistency over (clean, aug1, aug2). Fills `grad` by backprop.
LossParts toy_loss(const ToyNet& net, const TrainBatch& batch, double jsd_weight, Gradients* grad = nullptr);

struct TrainConfig {
  int epochs = 30;
  int batch_size = 64;
  double learning_rate = 0.05; // cosine-decayed per step
  double momentum = 0.9;
  double jsd_weight = 12.0;
  int hidden = 128;
  std::uint64_t seed = 0;
  std::optional<AugmentConfig> augmentation;
  bool flip_crop = true;

  void validate() const;
};

struct EpochStats {
  int epoch = 0;
  double loss = 0.0;
  double cross_entropy = 0.0;
  double jsd = 0.0;
  double train_error = 0.0; // on the clean views
};

// Minibatch SGD with momentum. Augmented views are built in parallel from
// per-(epoch, example) RNG streams, so results do not depend on thread count.
ToyNet train(const LabeledDataset& ds, const TrainConfig& cfg,
             const std::function<void(const EpochStats&)>& on_epoch = {});

// Inputs are normalize(image); no flip or crop.
PredictionSet predict(const ToyNet& net, const LabeledDataset& ds);

// "TOY1", uint32 input/hidden/classes, then w1, b1, w2, b2 as little-endian
// doubles (matrices row-major).
void save_toy(const ToyNet& net, const std::filesystem::path& path);
ToyNet load_toy(const std::filesystem::path& path);

class ToyPredictor : public Predictor {
public:
  explicit ToyPredictor(ToyNet net) : net_(std::move(net)) {}

  PredictionSet predict(const LabeledDataset& ds, const EvalContext&) const override {
    return fouriermix::predict(net_, ds);
  }
  std::string describe() const override { return "toy model"; }
  const ToyNet& net() const { return net_; }

private:
  ToyNet net_;
};

} // namespace fouriermix
