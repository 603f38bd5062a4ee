#pragma once

// Forward and backward passes for the handful of layers the tagger uses.
// Backward functions accumulate parameter gradients (+=) and return the
// gradient with respect to the layer input.

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "cnntag/random.hpp"
#include "cnntag/tensor.hpp"

namespace cnntag {

/// Unfolds x[T x Din] into [T x k*Din]: row t holds input rows
/// t-off .. t-off+k-1 (zero outside), off = floor((k-1)/2).
template <typename T>
Tensor<T> im2col(const Tensor<T>& x, std::size_t k) {
  const std::size_t len = x.rows();
  const std::size_t din = x.cols();
  const auto off = static_cast<std::ptrdiff_t>((k - 1) / 2);
  Tensor<T> cols({len, k * din});
  for (std::size_t t = 0; t < len; ++t) {
    T* dst = cols.data() + t * k * din;
    for (std::size_t j = 0; j < k; ++j) {
      const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t + j) - off;
      if (src < 0 || src >= static_cast<std::ptrdiff_t>(len)) continue;
      std::copy_n(x.data() + static_cast<std::size_t>(src) * din, din, dst + j * din);
    }
  }
  return cols;
}

/// "Same" 1-D convolution with zero padding.
/// out[t,o] = b[o] + sum_j sum_d w[j,d,o] * x[t+j-off, d].
template <typename T>
Tensor<T> conv1d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b) {
  check_shape(x.rank() == 2 && w.rank() == 3 && b.rank() == 1,
              "conv1d expects x[T,Din], w[k,Din,Dout], b[Dout]");
  check_shape(w.dim(1) == x.dim(1), "conv1d input channels " + shape_str(x.shape()) +
                                        " vs " + shape_str(w.shape()));
  check_shape(b.dim(0) == w.dim(2), "conv1d bias " + shape_str(b.shape()));
  const std::size_t k = w.dim(0);
  const Tensor<T> cols = im2col(x, k);
  Tensor<T> y({x.rows(), w.dim(2)});
  const ConstMatrixMap<T> wm(w.data(), static_cast<Eigen::Index>(k * w.dim(1)),
                             static_cast<Eigen::Index>(w.dim(2)));
  y.matrix().noalias() = cols.matrix() * wm;
  y.matrix().rowwise() += b.vec();
  return y;
}

template <typename T>
Tensor<T> conv1d_backward(const Tensor<T>& x, const Tensor<T>& w,
                          const Tensor<T>& dy, Tensor<T>& dw, Tensor<T>& db) {
  const std::size_t k = w.dim(0);
  const std::size_t din = w.dim(1);
  const std::size_t len = x.rows();
  const Tensor<T> cols = im2col(x, k);
  const auto kd = static_cast<Eigen::Index>(k * din);
  const auto dout = static_cast<Eigen::Index>(w.dim(2));
  MatrixMap<T>(dw.data(), kd, dout).noalias() += cols.matrix().transpose() * dy.matrix();
  db.vec() += dy.matrix().colwise().sum();
  RowMatrix<T> dcols = dy.matrix() * ConstMatrixMap<T>(w.data(), kd, dout).transpose();
  Tensor<T> dx({len, din});
  const auto off = static_cast<std::ptrdiff_t>((k - 1) / 2);
  for (std::size_t t = 0; t < len; ++t) {
    for (std::size_t j = 0; j < k; ++j) {
      const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t + j) - off;
      if (src < 0 || src >= static_cast<std::ptrdiff_t>(len)) continue;
      T* out = dx.data() + static_cast<std::size_t>(src) * din;
      const T* in = dcols.data() + t * k * din + j * din;
      for (std::size_t d = 0; d < din; ++d) out[d] += in[d];
    }
  }
  return dx;
}

template <typename T>
struct Pooled {
  Tensor<T> values;
  std::vector<std::size_t> argmax;
};

/// Column-wise max over rows; ties go to the lowest row.
template <typename T>
Pooled<T> max_over_time(const Tensor<T>& x) {
  check_shape(x.rank() == 2 && x.rows() >= 1, "max_over_time expects x[T>=1,D]");
  const std::size_t dims = x.cols();
  Pooled<T> out{Tensor<T>({dims}), std::vector<std::size_t>(dims, 0)};
  for (std::size_t d = 0; d < dims; ++d) out.values[d] = x.at(0, d);
  for (std::size_t t = 1; t < x.rows(); ++t) {
    for (std::size_t d = 0; d < dims; ++d) {
      if (x.at(t, d) > out.values[d]) {
        out.values[d] = x.at(t, d);
        out.argmax[d] = t;
      }
    }
  }
  return out;
}

template <typename T>
Tensor<T> max_over_time_backward(const std::vector<std::size_t>& argmax,
                                 std::span<const T> dvalues, std::size_t rows) {
  Tensor<T> dx({rows, argmax.size()});
  for (std::size_t d = 0; d < argmax.size(); ++d) dx.at(argmax[d], d) += dvalues[d];
  return dx;
}

/// y = x W + b for a single vector x.
template <typename T>
Tensor<T> affine(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b) {
  check_shape(w.rank() == 2 && x.size() == w.dim(0) && b.size() == w.dim(1),
              "affine x" + shape_str(x.shape()) + " W" + shape_str(w.shape()) +
                  " b" + shape_str(b.shape()));
  Tensor<T> y({w.dim(1)});
  y.vec().noalias() = x.vec() * w.matrix();
  y.vec() += b.vec();
  return y;
}

template <typename T>
Tensor<T> affine_backward(const Tensor<T>& x, const Tensor<T>& w,
                          const Tensor<T>& dy, Tensor<T>& dw, Tensor<T>& db) {
  dw.matrix().noalias() += x.vec().transpose() * dy.vec();
  db.vec() += dy.vec();
  Tensor<T> dx({w.dim(0)});
  dx.vec().noalias() = dy.vec() * w.matrix().transpose();
  return dx;
}

template <typename T>
Tensor<T> relu(Tensor<T> x) {
  for (T& v : x.values()) v = v > T(0) ? v : T(0);
  return x;
}

/// Gradient through relu given its output `y`.
template <typename T>
Tensor<T> relu_backward(const Tensor<T>& y, Tensor<T> dy) {
  for (std::size_t i = 0; i < dy.size(); ++i)
    if (!(y[i] > T(0))) dy[i] = T(0);
  return dy;
}

template <typename T>
struct Dropped {
  Tensor<T> values;
  /// Per-element multiplier (0 or 1/(1-p)); empty when dropout was inactive.
  Tensor<T> mask;
};

/// Inverted dropout.
template <typename T>
Dropped<T> dropout(const Tensor<T>& x, double p, Rng& rng, bool training) {
  if (p < 0.0 || p >= 1.0) throw std::invalid_argument("dropout p must be in [0,1)");
  if (!training || p == 0.0) return {x, {}};
  Dropped<T> out{x, Tensor<T>(x.shape())};
  const T keep = static_cast<T>(1.0 / (1.0 - p));
  for (std::size_t i = 0; i < x.size(); ++i) {
    out.mask[i] = rng.uniform() < p ? T(0) : keep;
    out.values[i] *= out.mask[i];
  }
  return out;
}

template <typename T>
Tensor<T> dropout_backward(const Tensor<T>& mask, Tensor<T> dy) {
  if (mask.empty()) return dy;
  for (std::size_t i = 0; i < dy.size(); ++i) dy[i] *= mask[i];
  return dy;
}

/// Adds N(0, sigma^2) noise per element when training; identity otherwise.
template <typename T>
Tensor<T> gaussian_noise(Tensor<T> x, double sigma, Rng& rng, bool training) {
  if (sigma < 0.0) throw std::invalid_argument("noise sigma must be >= 0");
  if (!training || sigma == 0.0) return x;
  for (T& v : x.values()) v += static_cast<T>(sigma * rng.normal());
  return x;
}

template <typename T>
Tensor<T> softmax(const Tensor<T>& logits) {
  Tensor<T> p(logits.shape());
  T mx = -std::numeric_limits<T>::infinity();
  for (T v : logits.values()) mx = std::max(mx, v);
  T sum = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - mx);
    sum += p[i];
  }
  for (T& v : p.values()) v /= sum;
  return p;
}

template <typename T>
struct XentResult {
  T loss;
  Tensor<T> dlogits;
};

/// -log softmax(logits)[gold] and its gradient softmax - onehot(gold).
template <typename T>
XentResult<T> softmax_xent(const Tensor<T>& logits, std::size_t gold) {
  if (gold >= logits.size())
    throw std::out_of_range("gold index " + std::to_string(gold) +
                            " out of range for " + std::to_string(logits.size()) +
                            " classes");
  T mx = -std::numeric_limits<T>::infinity();
  for (T v : logits.values()) mx = std::max(mx, v);
  T sum = 0;
  for (T v : logits.values()) sum += std::exp(v - mx);
  const T log_z = mx + std::log(sum);
  XentResult<T> r{log_z - logits[gold], Tensor<T>(logits.shape())};
  for (std::size_t i = 0; i < logits.size(); ++i)
    r.dlogits[i] = std::exp(logits[i] - log_z);
  r.dlogits[gold] -= T(1);
  return r;
}

}  // namespace cnntag
