#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fsc/error.hpp"

namespace fsc::nn {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First/second moment buffers, one per parameter tensor.
template <typename T>
struct AdamState {
  std::vector<std::vector<T>> m, v;
  std::uint64_t t = 0;

  AdamState() = default;
  explicit AdamState(std::span<const std::span<T>> params) {
    for (auto p : params) {
      m.emplace_back(p.size(), T(0));
      v.emplace_back(p.size(), T(0));
    }
  }
};

/// One bias-corrected Adam update over every (param, grad) pair.
template <typename T>
void adam_step(std::span<const std::span<T>> params, std::span<const std::span<T>> grads, AdamState<T>& state,
               double lr, const AdamConfig& cfg = {}) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    fail(ErrorCode::ShapeMismatch, "adam: parameter/gradient/state counts differ");
  ++state.t;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  const T b1 = static_cast<T>(cfg.beta1), b2 = static_cast<T>(cfg.beta2);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto p = params[k];
    auto g = grads[k];
    auto& m = state.m[k];
    auto& v = state.v[k];
    if (p.size() != g.size() || p.size() != m.size()) fail(ErrorCode::ShapeMismatch, "adam: tensor size mismatch");
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = b1 * m[i] + (T(1) - b1) * g[i];
      v[i] = b2 * v[i] + (T(1) - b2) * g[i] * g[i];
      const double mhat = static_cast<double>(m[i]) / c1;
      const double vhat = static_cast<double>(v[i]) / c2;
      p[i] = static_cast<T>(static_cast<double>(p[i]) - lr * mhat / (std::sqrt(vhat) + cfg.eps));
    }
  }
}

/// Reduce-on-plateau learning-rate schedule combined with early stopping,
/// both keyed on validation loss. Epochs are counted from 0; the first
/// observation always counts as an improvement.
class PlateauController {
 public:
  struct Decision {
    bool improved = false;
    bool lr_reduced = false;
    bool stop = false;
  };

  PlateauController(double initial_lr, double factor, std::size_t lr_patience, std::size_t stop_patience,
                    double min_delta)
      : lr_(initial_lr), factor_(factor), lr_patience_(lr_patience), stop_patience_(stop_patience),
        min_delta_(min_delta) {}

  double lr() const noexcept { return lr_; }
  double best() const noexcept { return best_; }

  Decision observe(double val_loss) {
    Decision d;
    if (!seen_ || val_loss < best_ - min_delta_) {
      seen_ = true;
      best_ = val_loss;
      since_best_ = 0;
      since_reduce_ = 0;
      d.improved = true;
      return d;
    }
    ++since_best_;
    if (++since_reduce_ >= lr_patience_) {
      lr_ *= factor_;
      since_reduce_ = 0;
      d.lr_reduced = true;
    }
    d.stop = since_best_ >= stop_patience_;
    return d;
  }

 private:
  double lr_;
  double factor_;
  std::size_t lr_patience_;
  std::size_t stop_patience_;
  double min_delta_;
  bool seen_ = false;
  double best_ = 0.0;
  std::size_t since_best_ = 0;
  std::size_t since_reduce_ = 0;
};

}  // namespace fsc::nn
