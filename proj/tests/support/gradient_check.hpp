#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "sisynth/linear_model.hpp"
#include "sisynth/rng.hpp"

namespace sisynth::testing {

/// Random model and batch with the given shape.
struct GradientProblem {
  LinearModel model;
  std::vector<Example> batch;
};

inline GradientProblem random_problem(std::uint64_t seed, SchemaKind kind, std::size_t dim, std::size_t n) {
  Rng rng(seed);
  GradientProblem p{LinearModel(kind, dim), {}};
  for (std::size_t c = 0; c < p.model.classes(); ++c) {
    for (std::size_t j = 0; j < dim; ++j) p.model.weight(c, j) = rng.uniform() - 0.5;
    p.model.bias(c) = rng.uniform() - 0.5;
  }
  for (std::size_t i = 0; i < n; ++i) {
    Example e;
    for (std::uint32_t j = 0; j < dim; ++j) {
      if (rng.uniform() < 0.5) e.x.entries.emplace_back(j, rng.uniform() * 2.0 - 1.0);
    }
    e.y = static_cast<std::size_t>(rng.below(p.model.classes()));
    p.batch.push_back(std::move(e));
  }
  return p;
}

/// Largest relative error between the analytic gradient and central
/// differences of the loss, |a - n| / max(1e-8, |a| + |n|).
inline double max_gradient_error(const GradientProblem& p, double l2, double step) {
  LinearModel grad;
  loss_and_gradient(p.model, p.batch, l2, &grad);
  double worst = 0.0;
  auto check = [&](double analytic, auto&& param_ref) {
    LinearModel plus = p.model;
    LinearModel minus = p.model;
    param_ref(plus) += step;
    param_ref(minus) -= step;
    const double numeric =
        (loss_and_gradient(plus, p.batch, l2) - loss_and_gradient(minus, p.batch, l2)) / (2.0 * step);
    const double denom = std::max(1e-8, std::abs(analytic) + std::abs(numeric));
    worst = std::max(worst, std::abs(analytic - numeric) / denom);
  };
  for (std::size_t c = 0; c < p.model.classes(); ++c) {
    for (std::size_t j = 0; j < p.model.dimension(); ++j) {
      check(grad.weight(c, j), [c, j](LinearModel& m) -> double& { return m.weight(c, j); });
    }
    check(grad.bias(c), [c](LinearModel& m) -> double& { return m.bias(c); });
  }
  return worst;
}

}  // namespace sisynth::testing
