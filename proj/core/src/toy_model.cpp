#include "fouriermix/toy_model.hpp"

#include "fouriermix/error.hpp"
#include "fouriermix/parallel.hpp"
#include "fouriermix/rng.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

namespace fouriermix {

namespace {

constexpr char kMagic[4] = {'T', 'O', 'Y', '1'};
constexpr double kMixtureFloor = 1e-12;
constexpr int kPredictChunk = 256;

// Column-wise log-softmax.
Eigen::MatrixXd log_softmax(const Eigen::MatrixXd& z) {
  Eigen::MatrixXd out(z.rows(), z.cols());
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    const double peak = z.col(j).maxCoeff();
    const double lse = peak + std::log((z.col(j).array() - peak).exp().sum());
    out.col(j) = z.col(j).array() - lse;
  }
  return out;
}

struct ViewPass {
  Eigen::MatrixXd pre;    // W1 x + b1
  Eigen::MatrixXd hidden; // relu(pre)
  Eigen::MatrixXd log_p;
  Eigen::MatrixXd p;
};

ViewPass run_view(const ToyNet& net, const Eigen::MatrixXd& x) {
  ViewPass v;
  v.pre = (net.w1 * x).colwise() + net.b1;
  v.hidden = v.pre.cwiseMax(0.0);
  const Eigen::MatrixXd logits = (net.w2 * v.hidden).colwise() + net.b2;
  v.log_p = log_softmax(logits);
  v.p = v.log_p.array().exp();
  return v;
}

void accumulate(const ToyNet& net, const ViewPass& v, const Eigen::MatrixXd& x, const Eigen::MatrixXd& d_logits,
                Gradients& g) {
  g.w2.noalias() += d_logits * v.hidden.transpose();
  g.b2 += d_logits.rowwise().sum();
  Eigen::MatrixXd d_hidden = net.w2.transpose() * d_logits;
  d_hidden.array() *= (v.pre.array() > 0.0).cast<double>();
  g.w1.noalias() += d_hidden * x.transpose();
  g.b1 += d_hidden.rowwise().sum();
}

// dL/dlogits for L = sum_k p_k g_k through softmax: p * (g - <g, p>).
Eigen::MatrixXd softmax_backward(const Eigen::MatrixXd& p, const Eigen::MatrixXd& g) {
  const Eigen::RowVectorXd inner = (g.array() * p.array()).colwise().sum();
  return p.array() * (g.rowwise() - inner).array();
}

void write_u32(std::ostream& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i)
    out.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void write_f64(std::ostream& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i)
    out.put(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

std::uint64_t read_le(std::istream& in, int bytes, const std::string& what) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof())
      throw FormatError("truncated model file while reading " + what);
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return v;
}

Eigen::MatrixXd to_columns(const std::vector<std::vector<double>>& inputs) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(inputs.front().size()), static_cast<Eigen::Index>(inputs.size()));
  for (std::size_t j = 0; j < inputs.size(); ++j)
    m.col(static_cast<Eigen::Index>(j)) = Eigen::Map<const Eigen::VectorXd>(inputs[j].data(), m.rows());
  return m;
}

} // namespace

ToyNet ToyNet::zeros(int input, int hidden, int classes) {
  if (input < 1 || hidden < 1 || classes < 1)
    throw ConfigError("toy net dimensions must be positive");
  ToyNet net;
  net.w1 = Eigen::MatrixXd::Zero(hidden, input);
  net.b1 = Eigen::VectorXd::Zero(hidden);
  net.w2 = Eigen::MatrixXd::Zero(classes, hidden);
  net.b2 = Eigen::VectorXd::Zero(classes);
  return net;
}

ToyNet ToyNet::random(int input, int hidden, int classes, std::uint64_t seed) {
  ToyNet net = zeros(input, hidden, classes);
  Rng rng(seed);
  const double r1 = std::sqrt(6.0 / input);
  const double r2 = 1.0 / std::sqrt(static_cast<double>(hidden));
  std::uniform_real_distribution<double> u1(-r1, r1);
  std::uniform_real_distribution<double> u2(-r2, r2);
  for (Eigen::Index i = 0; i < net.w1.size(); ++i)
    net.w1.data()[i] = u1(rng);
  for (Eigen::Index i = 0; i < net.w2.size(); ++i)
    net.w2.data()[i] = u2(rng);
  return net;
}

bool ToyNet::all_finite() const {
  return w1.allFinite() && b1.allFinite() && w2.allFinite() && b2.allFinite();
}

std::size_t ToyNet::parameter_count() const {
  return static_cast<std::size_t>(w1.size() + b1.size() + w2.size() + b2.size());
}

std::vector<double> ToyNet::flatten() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  out.insert(out.end(), w1.data(), w1.data() + w1.size());
  out.insert(out.end(), b1.data(), b1.data() + b1.size());
  out.insert(out.end(), w2.data(), w2.data() + w2.size());
  out.insert(out.end(), b2.data(), b2.data() + b2.size());
  return out;
}

void ToyNet::unflatten(std::span<const double> params) {
  if (params.size() != parameter_count())
    throw ConfigError("parameter vector has the wrong length");
  auto it = params.begin();
  std::copy_n(it, w1.size(), w1.data());
  it += w1.size();
  std::copy_n(it, b1.size(), b1.data());
  it += b1.size();
  std::copy_n(it, w2.size(), w2.data());
  it += w2.size();
  std::copy_n(it, b2.size(), b2.data());
}

bool operator==(const ToyNet& a, const ToyNet& b) {
  auto same = [](const auto& x, const auto& y) {
    return x.rows() == y.rows() && x.cols() == y.cols() && (x.array() == y.array()).all();
  };
  return same(a.w1, b.w1) && same(a.b1, b.b1) && same(a.w2, b.w2) && same(a.b2, b.b2);
}

Eigen::MatrixXd forward_batch(const ToyNet& net, const Eigen::MatrixXd& inputs) {
  if (inputs.rows() != net.input_dim())
    throw ShapeMismatch("toy net expects inputs of length " + std::to_string(net.input_dim()) + ", got " +
                        std::to_string(inputs.rows()));
  return run_view(net, inputs).p;
}

Eigen::VectorXd forward(const ToyNet& net, std::span<const double> input) {
  const Eigen::Map<const Eigen::VectorXd> x(input.data(), static_cast<Eigen::Index>(input.size()));
  return forward_batch(net, Eigen::MatrixXd(x)).col(0);
}

LossParts toy_loss(const ToyNet& net, const TrainBatch& batch, double jsd_weight, Gradients* grad) {
  const Eigen::Index n = batch.clean.cols();
  if (n == 0 || static_cast<std::size_t>(n) != batch.labels.size())
    throw ConfigError("batch needs one label per clean column");
  if (batch.clean.rows() != net.input_dim())
    throw ShapeMismatch("toy net expects inputs of length " + std::to_string(net.input_dim()) + ", got " +
                        std::to_string(batch.clean.rows()));
  const double inv_n = 1.0 / static_cast<double>(n);
  const bool consistency = batch.has_views() && jsd_weight > 0.0;

  const ViewPass clean = run_view(net, batch.clean);
  LossParts parts;
  Eigen::MatrixXd d_clean = clean.p;
  for (Eigen::Index j = 0; j < n; ++j) {
    const int y = batch.labels[static_cast<std::size_t>(j)];
    parts.cross_entropy -= clean.log_p(y, j);
    d_clean(y, j) -= 1.0;
  }
  parts.cross_entropy *= inv_n;
  d_clean *= inv_n;

  std::optional<ViewPass> a1;
  std::optional<ViewPass> a2;
  Eigen::MatrixXd d_a1;
  Eigen::MatrixXd d_a2;
  if (consistency) {
    a1 = run_view(net, batch.aug1);
    a2 = run_view(net, batch.aug2);
    const Eigen::MatrixXd mix = ((clean.p + a1->p + a2->p) / 3.0).cwiseMax(kMixtureFloor);
    const Eigen::MatrixXd log_mix = mix.array().log();
    double jsd = 0.0;
    for (const ViewPass* v : std::array<const ViewPass*, 3>{&clean, &*a1, &*a2})
      jsd += (v->p.array() * (v->log_p - log_mix).array()).sum();
    parts.jsd = jsd / 3.0 * inv_n;

    if (grad) {
      const double scale = jsd_weight * inv_n / 3.0;
      d_clean += scale * softmax_backward(clean.p, clean.log_p - log_mix);
      d_a1 = scale * softmax_backward(a1->p, a1->log_p - log_mix);
      d_a2 = scale * softmax_backward(a2->p, a2->log_p - log_mix);
    }
  }
  parts.total = parts.cross_entropy + jsd_weight * parts.jsd;

  if (grad) {
    grad->w1 = Eigen::MatrixXd::Zero(net.w1.rows(), net.w1.cols());
    grad->b1 = Eigen::VectorXd::Zero(net.b1.size());
    grad->w2 = Eigen::MatrixXd::Zero(net.w2.rows(), net.w2.cols());
    grad->b2 = Eigen::VectorXd::Zero(net.b2.size());
    accumulate(net, clean, batch.clean, d_clean, *grad);
    if (consistency) {
      accumulate(net, *a1, batch.aug1, d_a1, *grad);
      accumulate(net, *a2, batch.aug2, d_a2, *grad);
    }
  }
  return parts;
}

void TrainConfig::validate() const {
  if (epochs < 1 || batch_size < 1 || hidden < 1)
    throw ConfigError("epochs, batch size and hidden width must be positive");
  if (!(learning_rate > 0.0))
    throw ConfigError("learning rate must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0))
    throw ConfigError("momentum must lie in [0, 1)");
  if (!(jsd_weight >= 0.0))
    throw ConfigError("JSD weight must be nonnegative");
  if (augmentation)
    augmentation->validate();
}

ToyNet train(const LabeledDataset& ds, const TrainConfig& cfg, const std::function<void(const EpochStats&)>& on_epoch) {
  cfg.validate();
  if (ds.empty())
    throw ConfigError("cannot train on an empty dataset");
  ds.validate();

  const Image& first = ds.images.front();
  const int input = static_cast<int>(first.size());
  ToyNet net = ToyNet::random(input, cfg.hidden, ds.num_classes, derive_seed(cfg.seed, 0x5EED));
  Gradients velocity{Eigen::MatrixXd::Zero(net.w1.rows(), net.w1.cols()), Eigen::VectorXd::Zero(net.b1.size()),
                     Eigen::MatrixXd::Zero(net.w2.rows(), net.w2.cols()), Eigen::VectorXd::Zero(net.b2.size())};

  const AugmentConfig* aug = cfg.augmentation ? &*cfg.augmentation : nullptr;
  const int views = aug ? 2 : 0;
  const std::size_t n = ds.size();
  const std::size_t batches_per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
  const double total_steps = static_cast<double>(batches_per_epoch) * cfg.epochs;
  std::size_t step = 0;

  std::vector<std::size_t> order(n);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng = make_rng(cfg.seed, 0x10000 + static_cast<std::uint64_t>(epoch));
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    const std::uint64_t epoch_seed = derive_seed(cfg.seed, 0x20000 + static_cast<std::uint64_t>(epoch));

    EpochStats stats;
    stats.epoch = epoch;
    std::size_t wrong = 0;

    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t count = std::min<std::size_t>(cfg.batch_size, n - start);
      std::vector<TrainViews> built(count);
      parallel_for(count, [&](std::size_t i) {
        const std::size_t idx = order[start + i];
        Rng rng = make_rng(epoch_seed, idx);
        built[i] = make_train_views(ds.images[idx], aug, views, cfg.flip_crop, rng);
      });

      TrainBatch batch;
      batch.clean.resize(input, static_cast<Eigen::Index>(count));
      if (views) {
        batch.aug1.resize(input, static_cast<Eigen::Index>(count));
        batch.aug2.resize(input, static_cast<Eigen::Index>(count));
      }
      for (std::size_t i = 0; i < count; ++i) {
        const auto col = static_cast<Eigen::Index>(i);
        batch.clean.col(col) = Eigen::Map<const Eigen::VectorXd>(built[i].clean.data(), input);
        if (views) {
          batch.aug1.col(col) = Eigen::Map<const Eigen::VectorXd>(built[i].augmented[0].data(), input);
          batch.aug2.col(col) = Eigen::Map<const Eigen::VectorXd>(built[i].augmented[1].data(), input);
        }
        batch.labels.push_back(ds.labels[order[start + i]]);
      }

      Gradients g;
      const LossParts parts = toy_loss(net, batch, cfg.jsd_weight, &g);
      if (!std::isfinite(parts.total)) {
        std::ostringstream msg;
        msg << "non-finite loss at epoch " << epoch << ", step " << step << " (cross-entropy "
            << parts.cross_entropy << ", jsd " << parts.jsd << ")";
        throw TrainingError(msg.str());
      }

      const double lr = cfg.learning_rate * 0.5 * (1.0 + std::cos(std::numbers::pi * step / total_steps));
      velocity.w1 = cfg.momentum * velocity.w1 + g.w1;
      velocity.b1 = cfg.momentum * velocity.b1 + g.b1;
      velocity.w2 = cfg.momentum * velocity.w2 + g.w2;
      velocity.b2 = cfg.momentum * velocity.b2 + g.b2;
      net.w1 -= lr * velocity.w1;
      net.b1 -= lr * velocity.b1;
      net.w2 -= lr * velocity.w2;
      net.b2 -= lr * velocity.b2;
      ++step;

      const double weight = static_cast<double>(count) / static_cast<double>(n);
      stats.loss += parts.total * weight;
      stats.cross_entropy += parts.cross_entropy * weight;
      stats.jsd += parts.jsd * weight;
      const Eigen::MatrixXd p = forward_batch(net, batch.clean);
      for (std::size_t i = 0; i < count; ++i) {
        Eigen::Index top = 0;
        p.col(static_cast<Eigen::Index>(i)).maxCoeff(&top);
        if (top != batch.labels[i])
          ++wrong;
      }
    }
    if (!net.all_finite())
      throw TrainingError("parameters became non-finite at epoch " + std::to_string(epoch));
    stats.train_error = static_cast<double>(wrong) / static_cast<double>(n);
    if (on_epoch)
      on_epoch(stats);
  }
  return net;
}

PredictionSet predict(const ToyNet& net, const LabeledDataset& ds) {
  PredictionSet preds;
  preds.labels = ds.labels;
  preds.probs.resize(ds.size());
  for (std::size_t start = 0; start < ds.size(); start += kPredictChunk) {
    const std::size_t count = std::min<std::size_t>(kPredictChunk, ds.size() - start);
    std::vector<std::vector<double>> inputs;
    inputs.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
      inputs.push_back(normalize(ds.images[start + i]));
    const Eigen::MatrixXd p = forward_batch(net, to_columns(inputs));
    for (std::size_t i = 0; i < count; ++i) {
      const auto col = p.col(static_cast<Eigen::Index>(i));
      preds.probs[start + i].assign(col.data(), col.data() + col.size());
    }
  }
  return preds;
}

void save_toy(const ToyNet& net, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw IoError("cannot write " + path.string());
  out.write(kMagic, 4);
  write_u32(out, static_cast<std::uint32_t>(net.input_dim()));
  write_u32(out, static_cast<std::uint32_t>(net.hidden_dim()));
  write_u32(out, static_cast<std::uint32_t>(net.classes()));
  for (Eigen::Index r = 0; r < net.w1.rows(); ++r)
    for (Eigen::Index c = 0; c < net.w1.cols(); ++c)
      write_f64(out, net.w1(r, c));
  for (Eigen::Index i = 0; i < net.b1.size(); ++i)
    write_f64(out, net.b1(i));
  for (Eigen::Index r = 0; r < net.w2.rows(); ++r)
    for (Eigen::Index c = 0; c < net.w2.cols(); ++c)
      write_f64(out, net.w2(r, c));
  for (Eigen::Index i = 0; i < net.b2.size(); ++i)
    write_f64(out, net.b2(i));
  if (!out)
    throw IoError("failed writing " + path.string());
}

ToyNet load_toy(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw FormatError(path.string() + " is not a TOY1 model file");
  const auto input = static_cast<int>(read_le(in, 4, "input dimension"));
  const auto hidden = static_cast<int>(read_le(in, 4, "hidden dimension"));
  const auto classes = static_cast<int>(read_le(in, 4, "class count"));
  if (input < 1 || hidden < 1 || classes < 1 || input > (1 << 24) || hidden > (1 << 20) || classes > (1 << 20))
    throw FormatError(path.string() + " declares implausible dimensions");
  ToyNet net = ToyNet::zeros(input, hidden, classes);
  auto next = [&](const char* what) { return std::bit_cast<double>(read_le(in, 8, what)); };
  for (Eigen::Index r = 0; r < net.w1.rows(); ++r)
    for (Eigen::Index c = 0; c < net.w1.cols(); ++c)
      net.w1(r, c) = next("w1");
  for (Eigen::Index i = 0; i < net.b1.size(); ++i)
    net.b1(i) = next("b1");
  for (Eigen::Index r = 0; r < net.w2.rows(); ++r)
    for (Eigen::Index c = 0; c < net.w2.cols(); ++c)
      net.w2(r, c) = next("w2");
  for (Eigen::Index i = 0; i < net.b2.size(); ++i)
    net.b2(i) = next("b2");
  if (in.peek() != std::char_traits<char>::eof())
    throw FormatError(path.string() + " has trailing bytes after the parameters");
  if (!net.all_finite())
    throw FormatError(path.string() + " contains non-finite parameters");
  return net;
}

} // namespace fouriermix
