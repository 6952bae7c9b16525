#ifndef CFGADV_MODEL_HPP
#define CFGADV_MODEL_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "cfgadv/error.hpp"
#include "cfgadv/features.hpp"
#include "cfgadv/graph.hpp"

namespace cfgadv {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Output index of each class in the logit / probability vectors.
inline Eigen::Index class_index(Label l) { return l == Label::Benign ? 0 : 1; }
inline Label class_label(Eigen::Index i) { return i == 0 ? Label::Benign : Label::Malicious; }

inline Vec to_vec(const FeatureVector& f) { return Eigen::Map<const Vec>(f.data(), kFeatureCount); }

/// Numerically stable softmax.
inline Vec softmax(const Vec& z) {
  Vec e = (z.array() - z.maxCoeff()).exp();
  return e / e.sum();
}

struct DenseLayer {
  Mat weights;  // out x in
  Vec bias;     // out
};

/// Feed-forward network: rectifier on hidden layers, softmax over the
/// two-class output.
class Model {
 public:
  Model() = default;

  /// Glorot-uniform weights, zero biases.
  static Model init(std::vector<int> sizes, std::uint64_t seed) {
    if (sizes.size() < 2) throw std::invalid_argument("model needs at least input and output sizes");
    for (int s : sizes)
      if (s < 1) throw std::invalid_argument("layer sizes must be positive");
    Model m;
    m.sizes_ = std::move(sizes);
    m.seed_ = seed;
    std::mt19937_64 rng(seed);
    for (std::size_t l = 0; l + 1 < m.sizes_.size(); ++l) {
      const int in = m.sizes_[l], out = m.sizes_[l + 1];
      const double a = std::sqrt(6.0 / static_cast<double>(in + out));
      std::uniform_real_distribution<double> u(-a, a);
      DenseLayer layer{Mat(out, in), Vec::Zero(out)};
      for (int r = 0; r < out; ++r)
        for (int c = 0; c < in; ++c) layer.weights(r, c) = u(rng);
      m.layers_.push_back(std::move(layer));
    }
    return m;
  }

  /// Builds a model from explicit layers; dimensions must chain.
  static Model from_layers(std::vector<DenseLayer> layers, std::uint64_t seed = 0) {
    if (layers.empty()) throw std::invalid_argument("model needs at least one layer");
    Model m;
    m.seed_ = seed;
    m.sizes_.push_back(static_cast<int>(layers.front().weights.cols()));
    for (const auto& l : layers) {
      if (l.weights.cols() != m.sizes_.back() || l.bias.size() != l.weights.rows())
        throw std::invalid_argument("layer dimensions do not chain");
      m.sizes_.push_back(static_cast<int>(l.weights.rows()));
    }
    m.layers_ = std::move(layers);
    return m;
  }

  const std::vector<int>& sizes() const { return sizes_; }
  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  std::uint64_t seed() const { return seed_; }
  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

  Vec logits(const Vec& x) const {
    check_input(x);
    Vec a = x;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      Vec z = layers_[l].weights * a + layers_[l].bias;
      a = (l + 1 < layers_.size()) ? Vec(z.cwiseMax(0.0)) : z;
    }
    return a;
  }

  Vec probabilities(const Vec& x) const { return softmax(logits(x)); }

  Label predict(const Vec& x) const {
    Eigen::Index k;
    logits(x).maxCoeff(&k);
    return class_label(k);
  }

  /// Chain rule from an upstream gradient on the logits back to the input.
  Vec backprop_to_input(const Vec& x, const Vec& dlogits) const {
    check_input(x);
    std::vector<Vec> pre;  // pre-activations of hidden layers
    Vec a = x;
    for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
      pre.push_back(layers_[l].weights * a + layers_[l].bias);
      a = pre.back().cwiseMax(0.0);
    }
    Vec g = dlogits;
    for (std::size_t l = layers_.size(); l-- > 0;) {
      g = layers_[l].weights.transpose() * g;
      if (l > 0) g = g.cwiseProduct((pre[l - 1].array() > 0.0).cast<double>().matrix());
    }
    return g;
  }

  /// d/dx of the cross-entropy loss -log p[label].
  Vec loss_gradient(const Vec& x, Label label) const {
    Vec d = probabilities(x);
    d(class_index(label)) -= 1.0;
    return backprop_to_input(x, d);
  }

  /// d/dx of the logit of class cls.
  Vec logit_gradient(const Vec& x, Label cls) const {
    Vec d = Vec::Zero(output_dim());
    d(class_index(cls)) = 1.0;
    return backprop_to_input(x, d);
  }

  enum class GradientTarget { Loss, Logit };

  Vec input_gradient(const Vec& x, Label cls, GradientTarget target = GradientTarget::Loss) const {
    return target == GradientTarget::Loss ? loss_gradient(x, cls) : logit_gradient(x, cls);
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["layer_sizes"] = sizes_;
    j["seed"] = seed_;
    auto layers = nlohmann::json::array();
    for (const auto& l : layers_) {
      std::vector<double> w;
      w.reserve(static_cast<std::size_t>(l.weights.size()));
      for (Eigen::Index r = 0; r < l.weights.rows(); ++r)
        for (Eigen::Index c = 0; c < l.weights.cols(); ++c) w.push_back(l.weights(r, c));
      layers.push_back({{"weights", w}, {"bias", std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size())}});
    }
    j["layers"] = layers;
    return j;
  }

  static Model from_json(const nlohmann::json& j) {
    std::vector<DenseLayer> layers;
    auto sizes = j.at("layer_sizes").get<std::vector<int>>();
    const auto& jl = j.at("layers");
    if (sizes.size() != jl.size() + 1) throw DataError("model: layer_sizes does not match layers");
    for (std::size_t l = 0; l < jl.size(); ++l) {
      auto w = jl[l].at("weights").get<std::vector<double>>();
      auto b = jl[l].at("bias").get<std::vector<double>>();
      const int in = sizes[l], out = sizes[l + 1];
      if (w.size() != static_cast<std::size_t>(in) * out || b.size() != static_cast<std::size_t>(out))
        throw DataError("model: layer " + std::to_string(l) + " has wrong dimensions");
      DenseLayer layer{Mat(out, in), Eigen::Map<Vec>(b.data(), out)};
      for (int r = 0; r < out; ++r)
        for (int c = 0; c < in; ++c) layer.weights(r, c) = w[static_cast<std::size_t>(r) * in + c];
      layers.push_back(std::move(layer));
    }
    return from_layers(std::move(layers), j.at("seed").get<std::uint64_t>());
  }

 private:
  void check_input(const Vec& x) const {
    if (x.size() != input_dim())
      throw std::invalid_argument("dimension mismatch: model expects " + std::to_string(input_dim()) +
                                  " inputs, got " + std::to_string(x.size()));
  }

  std::vector<int> sizes_;
  std::vector<DenseLayer> layers_;
  std::uint64_t seed_ = 0;
};

struct LabeledVector {
  Vec x;
  Label y = Label::Benign;
};

struct TrainConfig {
  std::vector<int> hidden = {64, 32};
  double learning_rate = 1e-3;
  int batch_size = 32;
  int epochs = 200;
  std::uint64_t seed = 42;
  bool class_weighting = true;
  bool adam = true;  // plain mini-batch SGD when false

  void check() const {
    if (!(learning_rate > 0) || !std::isfinite(learning_rate)) throw UsageError("learning rate must be > 0");
    if (batch_size < 1) throw UsageError("batch size must be >= 1");
    if (epochs < 1) throw UsageError("epochs must be >= 1");
    for (int h : hidden)
      if (h < 1) throw UsageError("hidden layer sizes must be >= 1");
  }
};

struct EpochLog {
  int epoch = 0;
  double loss = 0;
  double train_accuracy = 0;
};

struct TrainResult {
  Model model;
  std::vector<EpochLog> log;
};

namespace detail {

struct Gradients {
  std::vector<Mat> dw;
  std::vector<Vec> db;
};

/// Weighted mean cross-entropy of a batch and its parameter gradients.
inline double batch_loss_and_gradients(const Model& m, const Mat& X, const std::vector<Eigen::Index>& y,
                                       const Vec& sample_w, Gradients* grads) {
  const auto& layers = m.layers();
  const auto B = X.cols();
  std::vector<Mat> acts{X};
  std::vector<Mat> pre;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Mat z = (layers[l].weights * acts.back()).colwise() + layers[l].bias;
    pre.push_back(z);
    acts.push_back(l + 1 < layers.size() ? Mat(z.cwiseMax(0.0)) : z);
  }
  Mat delta(acts.back().rows(), B);
  const double wsum = sample_w.sum();
  double loss = 0;
  for (Eigen::Index b = 0; b < B; ++b) {
    Vec p = softmax(acts.back().col(b));
    loss -= sample_w(b) * std::log(std::max(p(y[b]), 1e-300));
    p(y[b]) -= 1.0;
    delta.col(b) = p * (sample_w(b) / wsum);
  }
  loss /= wsum;
  if (!grads) return loss;

  grads->dw.assign(layers.size(), Mat());
  grads->db.assign(layers.size(), Vec());
  for (std::size_t l = layers.size(); l-- > 0;) {
    grads->dw[l] = delta * acts[l].transpose();
    grads->db[l] = delta.rowwise().sum();
    if (l > 0) {
      delta = layers[l].weights.transpose() * delta;
      delta = delta.cwiseProduct((pre[l - 1].array() > 0.0).cast<double>().matrix());
    }
  }
  return loss;
}

}  // namespace detail

/// Inverse-frequency class weights n / (2 n_c), indexed by class_index.
inline std::array<double, 2> class_weights(std::span<const LabeledVector> data, bool enabled) {
  if (!enabled) return {1.0, 1.0};
  std::array<double, 2> count{0, 0};
  for (const auto& s : data) count[class_index(s.y)] += 1;
  const double n = count[0] + count[1];
  return {n / (2 * count[0]), n / (2 * count[1])};
}

/// Seeded mini-batch training of the class-weighted cross-entropy.
inline TrainResult train(std::span<const LabeledVector> data, const TrainConfig& cfg) {
  cfg.check();
  std::size_t n_benign = 0, n_mal = 0;
  for (const auto& s : data) (s.y == Label::Benign ? n_benign : n_mal)++;
  if (n_benign < 2 || n_mal < 2) throw DataError("training needs at least two samples of each class");

  const int dim = static_cast<int>(data.front().x.size());
  for (const auto& s : data)
    if (s.x.size() != dim) throw std::invalid_argument("training vectors differ in dimension");

  std::vector<int> sizes{dim};
  sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
  sizes.push_back(2);
  TrainResult result{Model::init(sizes, cfg.seed), {}};
  Model& m = result.model;

  const auto cw = class_weights(data, cfg.class_weighting);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);

  // Adam state.
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  std::vector<Mat> mw, vw;
  std::vector<Vec> mb, vb;
  for (const auto& l : m.layers()) {
    mw.push_back(Mat::Zero(l.weights.rows(), l.weights.cols()));
    vw.push_back(mw.back());
    mb.push_back(Vec::Zero(l.bias.size()));
    vb.push_back(mb.back());
  }
  long step = 0;

  Mat X_all(dim, static_cast<Eigen::Index>(data.size()));
  std::vector<Eigen::Index> y_all(data.size());
  Vec w_all(static_cast<Eigen::Index>(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i) {
    X_all.col(static_cast<Eigen::Index>(i)) = data[i].x;
    y_all[i] = class_index(data[i].y);
    w_all(static_cast<Eigen::Index>(i)) = cw[y_all[i]];
  }

  detail::Gradients g;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    int batch_idx = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size), ++batch_idx) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      const auto B = static_cast<Eigen::Index>(end - start);
      Mat X(dim, B);
      std::vector<Eigen::Index> y(static_cast<std::size_t>(B));
      Vec sw(B);
      for (Eigen::Index b = 0; b < B; ++b) {
        auto i = order[start + static_cast<std::size_t>(b)];
        X.col(b) = X_all.col(static_cast<Eigen::Index>(i));
        y[static_cast<std::size_t>(b)] = y_all[i];
        sw(b) = w_all(static_cast<Eigen::Index>(i));
      }
      double loss = detail::batch_loss_and_gradients(m, X, y, sw, &g);
      if (!std::isfinite(loss))
        throw InvariantError("non-finite training loss at epoch " + std::to_string(epoch) + ", batch " +
                             std::to_string(batch_idx));
      ++step;
      auto& layers = m.layers();
      for (std::size_t l = 0; l < layers.size(); ++l) {
        if (cfg.adam) {
          const double c1 = 1 - std::pow(b1, static_cast<double>(step));
          const double c2 = 1 - std::pow(b2, static_cast<double>(step));
          mw[l] = b1 * mw[l] + (1 - b1) * g.dw[l];
          vw[l] = b2 * vw[l] + (1 - b2) * g.dw[l].cwiseAbs2();
          mb[l] = b1 * mb[l] + (1 - b1) * g.db[l];
          vb[l] = b2 * vb[l] + (1 - b2) * g.db[l].cwiseAbs2();
          layers[l].weights.array() -=
              cfg.learning_rate * (mw[l].array() / c1) / ((vw[l].array() / c2).sqrt() + eps);
          layers[l].bias.array() -= cfg.learning_rate * (mb[l].array() / c1) / ((vb[l].array() / c2).sqrt() + eps);
        } else {
          layers[l].weights -= cfg.learning_rate * g.dw[l];
          layers[l].bias -= cfg.learning_rate * g.db[l];
        }
      }
    }

    EpochLog entry{epoch, detail::batch_loss_and_gradients(m, X_all, y_all, w_all, nullptr), 0.0};
    if (!std::isfinite(entry.loss))
      throw InvariantError("non-finite training loss at end of epoch " + std::to_string(epoch));
    std::size_t correct = 0;
    for (const auto& s : data) correct += m.predict(s.x) == s.y;
    entry.train_accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
    result.log.push_back(entry);
  }
  return result;
}

/// Malicious is the positive class.
struct Metrics {
  std::size_t tp = 0, fn = 0, tn = 0, fp = 0;

  std::size_t total() const { return tp + fn + tn + fp; }
  double accuracy() const { return total() ? static_cast<double>(tp + tn) / static_cast<double>(total()) : 0.0; }
  double fnr() const { return tp + fn ? static_cast<double>(fn) / static_cast<double>(fn + tp) : 0.0; }
  double fpr() const { return fp + tn ? static_cast<double>(fp) / static_cast<double>(fp + tn) : 0.0; }

  void add(Label truth, Label predicted) {
    if (truth == Label::Malicious)
      (predicted == Label::Malicious ? tp : fn)++;
    else
      (predicted == Label::Benign ? tn : fp)++;
  }

  nlohmann::json to_json() const {
    return {{"accuracy", accuracy()}, {"fnr", fnr()}, {"fpr", fpr()},
            {"confusion", {{"tp", tp}, {"fn", fn}, {"tn", tn}, {"fp", fp}}}};
  }
};

inline Metrics evaluate(const Model& m, std::span<const LabeledVector> test) {
  if (test.empty()) throw DataError("cannot evaluate on an empty test set");
  Metrics out;
  for (const auto& s : test) out.add(s.y, m.predict(s.x));
  return out;
}

}  // namespace cfgadv

#endif  // CFGADV_MODEL_HPP
