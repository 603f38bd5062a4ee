#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "cnntag/optim.hpp"
#include "cnntag/random.hpp"

namespace cnntag {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  std::size_t coordinates = 0;
  /// Probes whose +eps and -eps points fell in different smooth regions.
  std::size_t kinks_skipped = 0;
  /// Parameters for which every probe was skipped.
  std::vector<std::string> unchecked;
};

inline double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

/// Compares `param.grad` (already populated by the caller) against central
/// differences of `loss` on up to `samples` random coordinates per parameter.
/// Frozen rows are skipped. Parameters are restored exactly after each probe.
///
/// `region` is called right after each loss evaluation and returns anything
/// equality-comparable that identifies the current piecewise-smooth region
/// (e.g. ReLU masks). A probe whose two sides disagree is retried with steps
/// 10x and 100x smaller; if those still straddle a kink it is counted in
/// kinks_skipped instead of being compared.
template <typename LossFn, typename RegionFn>
GradCheckResult grad_check(LossFn&& loss, std::span<Param<double>* const> params,
                           double epsilon, std::size_t samples, Rng& rng, RegionFn&& region) {
  GradCheckResult result;
  for (Param<double>* p : params) {
    const std::size_t first = p->frozen_rows * p->value.cols();
    if (first >= p->value.size()) continue;
    const std::size_t n = p->value.size() - first;
    const std::size_t count = std::min(samples, n);
    std::size_t checked = 0;
    for (std::size_t s = 0; s < count; ++s) {
      const std::size_t idx = first + (count == n ? s : rng.uniform_int(n));
      const double saved = p->value[idx];
      double numeric = 0.0;
      bool smooth = false;
      for (const double eps : {epsilon, epsilon * 1e-1, epsilon * 1e-2}) {
        p->value[idx] = saved + eps;
        const double up = loss();
        const auto region_up = region();
        p->value[idx] = saved - eps;
        const double down = loss();
        const auto region_down = region();
        p->value[idx] = saved;
        if (region_up == region_down) {
          numeric = (up - down) / (2.0 * eps);
          smooth = true;
          break;
        }
      }
      if (!smooth) {
        ++result.kinks_skipped;
        continue;
      }
      ++checked;
      const double err = relative_error(p->grad[idx], numeric);
      ++result.coordinates;
      if (err > result.max_rel_error) {
        result.max_rel_error = err;
        result.worst_param = p->name;
        result.worst_index = idx;
      }
    }
    if (checked == 0 && count > 0) result.unchecked.push_back(p->name);
  }
  return result;
}

template <typename LossFn>
GradCheckResult grad_check(LossFn&& loss, std::span<Param<double>* const> params,
                           double epsilon, std::size_t samples, Rng& rng) {
  return grad_check(loss, params, epsilon, samples, rng, [] { return 0; });
}

}  // namespace cnntag
