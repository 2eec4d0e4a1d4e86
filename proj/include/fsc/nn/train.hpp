#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fsc/dataset.hpp"
#include "fsc/nn/optim.hpp"
#include "fsc/nn/resnet.hpp"

namespace fsc::nn {

struct TrainConfig {
  double init_lr = 1e-3;
  double lr_factor = 0.5;
  std::size_t lr_patience = 40;
  std::size_t early_stop_patience = 80;
  std::size_t max_epochs = 1500;
  std::size_t batch_size = 16;
  std::uint64_t seed = 0;
  double min_delta = 1e-4;  // val-loss improvement threshold
  double bn_momentum = 0.1;
  double bn_eps = 1e-5;

  void validate() const {
    if (!(lr_factor > 0 && lr_factor < 1)) fail(ErrorCode::InvalidArgument, "lr_factor must be in (0, 1)");
    if (lr_patience < 1 || early_stop_patience < 1) fail(ErrorCode::InvalidArgument, "patiences must be >= 1");
    if (early_stop_patience <= lr_patience)
      fail(ErrorCode::InvalidArgument, "early_stop_patience must exceed lr_patience");
    if (batch_size < 1 || max_epochs < 1) fail(ErrorCode::InvalidArgument, "batch_size and max_epochs must be >= 1");
    if (!(init_lr >= 0)) fail(ErrorCode::InvalidArgument, "init_lr must be >= 0");
  }
};

/// Preprocessed inputs (all the same length) and their labels.
struct Samples {
  std::vector<std::vector<double>> x;
  std::vector<std::size_t> y;

  std::size_t size() const noexcept { return x.size(); }
  bool empty() const noexcept { return x.empty(); }
};

inline Samples make_samples(const LabeledDataset& ds, const PreprocessSpec& spec) {
  Samples s;
  s.x.reserve(ds.size());
  for (std::size_t i = 0; i < ds.items.size(); ++i) {
    s.x.push_back(preprocess(ds.items[i].series, spec, i));
    s.y.push_back(ds.items[i].label);
  }
  return s;
}

struct TrainHistory {
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  std::vector<double> val_accuracy;
  std::vector<double> lr;  // rate used during each epoch
  std::vector<std::size_t> lr_reductions;  // epochs after which the rate was halved
  std::size_t best_epoch = 0;
  bool early_stopped = false;

  std::size_t epochs() const noexcept { return train_loss.size(); }
};

/// Thrown when a loss becomes NaN/inf; carries the history up to that point.
class DivergedLoss : public Error {
 public:
  DivergedLoss(const std::string& what, TrainHistory h) : Error(ErrorCode::DivergedLoss, what), history(std::move(h)) {}
  TrainHistory history;
};

struct EvalResult {
  double loss = 0.0;
  double accuracy = 0.0;
  std::vector<std::size_t> predicted;
};

/// Infer-mode loss/accuracy over `data`, in chunks of `batch` items.
template <typename T>
EvalResult evaluate(const Model<T>& m, const Samples& data, std::size_t batch = 64) {
  EvalResult r;
  if (data.empty()) fail(ErrorCode::EmptyDataset, "nothing to evaluate");
  std::size_t correct = 0;
  double loss_sum = 0.0;
  for (std::size_t i = 0; i < data.size(); i += batch) {
    const std::size_t n = std::min(batch, data.size() - i);
    const auto probs = predict_proba(m, make_batch<T>(std::span(data.x).subspan(i, n)));
    const std::span<const std::size_t> targets(data.y.data() + i, n);
    loss_sum += cross_entropy(probs, targets) * static_cast<double>(n);
    for (std::size_t b = 0; b < n; ++b) {
      const std::size_t p = argmax_row(probs, b);
      r.predicted.push_back(p);
      correct += (p == targets[b]);
    }
  }
  r.loss = loss_sum / static_cast<double>(data.size());
  r.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  return r;
}

struct EpochReport {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
  double lr = 0.0;
  bool improved = false;
  bool lr_reduced = false;
};

template <typename T>
struct TrainResult {
  Model<T> model;  // snapshot with the best validation loss
  TrainHistory history;
};

/// Mini-batch Adam with reduce-on-plateau and early stopping on validation
/// loss. Deterministic for a fixed seed.
template <typename T>
TrainResult<T> train(Model<T> model, const Samples& train_set, const Samples& val_set, const TrainConfig& cfg,
                     const std::function<void(const EpochReport&)>& on_epoch = {}) {
  cfg.validate();
  if (train_set.empty() || val_set.empty()) fail(ErrorCode::EmptyDataset, "training and validation sets must be non-empty");
  for (auto y : train_set.y)
    if (y >= model.num_classes) fail(ErrorCode::LabelOutOfRange, "training label exceeds model class count");
  for (auto y : val_set.y)
    if (y >= model.num_classes) fail(ErrorCode::LabelOutOfRange, "validation label exceeds model class count");

  auto set_bn = [&](BatchNormLayer<T>& bn) {
    bn.momentum = static_cast<T>(cfg.bn_momentum);
    bn.eps = static_cast<T>(cfg.bn_eps);
  };
  for (auto& b : model.blocks) {
    set_bn(b.bn1), set_bn(b.bn2), set_bn(b.bn3);
    if (b.projection) set_bn(b.shortcut_bn);
  }

  Model<T> grads = zeros_like(model);
  const auto params = trainable_parameters(model);
  const auto grad_spans = trainable_parameters(grads);
  AdamState<T> adam(params);
  PlateauController plateau(cfg.init_lr, cfg.lr_factor, cfg.lr_patience, cfg.early_stop_patience, cfg.min_delta);

  TrainResult<T> result{model, {}};
  auto& hist = result.history;
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  ForwardCache<T> cache;
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> targets;

  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    const double lr = plateau.lr();
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    for (std::size_t i = 0; i < order.size(); i += cfg.batch_size) {
      const std::size_t n = std::min(cfg.batch_size, order.size() - i);
      rows.clear();
      targets.clear();
      for (std::size_t k = 0; k < n; ++k) {
        rows.push_back(train_set.x[order[i + k]]);
        targets.push_back(train_set.y[order[i + k]]);
      }
      const auto probs = model_forward(model, make_batch<T>(rows), Mode::Train, &cache);
      const double loss = cross_entropy(probs, targets);
      if (!std::isfinite(loss)) throw DivergedLoss("training loss is not finite at epoch " + std::to_string(epoch), hist);
      loss_sum += loss * static_cast<double>(n);
      model_backward(model, cache, targets, grads);
      adam_step<T>(params, grad_spans, adam, lr);
    }

    const auto val = evaluate(model, val_set);
    if (!std::isfinite(val.loss)) throw DivergedLoss("validation loss is not finite at epoch " + std::to_string(epoch), hist);
    hist.train_loss.push_back(loss_sum / static_cast<double>(order.size()));
    hist.val_loss.push_back(val.loss);
    hist.val_accuracy.push_back(val.accuracy);
    hist.lr.push_back(lr);

    const auto decision = plateau.observe(val.loss);
    if (decision.improved) {
      result.model = model;
      hist.best_epoch = epoch;
    }
    if (decision.lr_reduced) hist.lr_reductions.push_back(epoch);
    if (on_epoch)
      on_epoch({epoch, hist.train_loss.back(), val.loss, val.accuracy, lr, decision.improved, decision.lr_reduced});
    if (decision.stop) {
      hist.early_stopped = true;
      break;
    }
  }
  return result;
}

}  // namespace fsc::nn
