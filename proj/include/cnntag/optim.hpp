#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cnntag/tensor.hpp"

namespace cnntag {

template <typename T>
struct Param {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;
  /// Running average of `value` maintained by asgd_step.
  Tensor<T> avg;
  /// Embedding tables are exempt from L2.
  bool is_embedding = false;
  /// Leading rows held constant (the padding row of an embedding table).
  /// Backward never writes gradient there.
  std::size_t frozen_rows = 0;

  Param() = default;
  Param(std::string n, Tensor<T> v, bool embedding)
      : name(std::move(n)),
        value(std::move(v)),
        grad(value.shape()),
        avg(value),
        is_embedding(embedding) {}
};

template <typename T>
struct OptState {
  double learning_rate = 0.1;
  double momentum = 0.9;
  double l2 = 1e-5;
  std::vector<Tensor<T>> velocity;
  std::int64_t step_count = 0;
  std::int64_t avg_start_step = 0;
};

/// One averaged-SGD update with momentum and coupled L2:
///   g = grad (+ l2 * value unless embedding); v = momentum * v - lr * g;
///   value += v; then the running average is advanced (or reset to value
///   before averaging starts). Gradients are zeroed afterwards.
template <typename T>
void asgd_step(std::span<Param<T>* const> params, OptState<T>& opt) {
  if (opt.velocity.size() != params.size()) {
    opt.velocity.clear();
    for (const Param<T>* p : params) opt.velocity.emplace_back(p->value.shape());
  }
  const bool averaging = opt.step_count >= opt.avg_start_step;
  const T count =
      averaging ? static_cast<T>(opt.step_count - opt.avg_start_step + 1) : T(1);
  const T lr = static_cast<T>(opt.learning_rate);
  const T mom = static_cast<T>(opt.momentum);
  const T l2 = static_cast<T>(opt.l2);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Param<T>& p = *params[i];
    Tensor<T>& v = opt.velocity[i];
    const bool decay = !p.is_embedding && opt.l2 != 0.0;
    for (std::size_t j = 0; j < p.value.size(); ++j) {
      T g = p.grad[j];
      if (decay) g += l2 * p.value[j];
      v[j] = mom * v[j] - lr * g;
      p.value[j] += v[j];
      if (averaging) {
        p.avg[j] += (p.value[j] - p.avg[j]) / count;
      } else {
        p.avg[j] = p.value[j];
      }
    }
    p.grad.zero();
  }
  ++opt.step_count;
}

}  // namespace cnntag
