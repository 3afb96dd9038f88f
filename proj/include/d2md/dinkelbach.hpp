#pragma once

#include <algorithm>
#include <limits>
#include <string>
#include <vector>

#include "d2md/types.hpp"

namespace d2md {

/// What an inner maximiser returns for a given lambda: its argmax and the
/// ratio pieces evaluated there.
template <class X>
struct RatioPoint {
  X x;
  double f = 0.0;
  double g = 1.0;
};

template <class X>
struct RatioFamilyPoint {
  X x;
  std::vector<double> f;
  std::vector<double> g;
};

struct DinkelbachTrace {
  std::vector<double> lambda;  // lambda used by each inner solve
  std::vector<double> F;       // F(lambda) reported by that solve
};

template <class X>
struct DinkelbachResult {
  X x;
  double lambda = 0.0;  // ratio achieved by x
  int iterations = 0;
  bool converged = false;
  DinkelbachTrace trace;
};

namespace detail {

inline void require_positive(double g) {
  if (!(g > 0.0)) throw NonPositiveDenominator("denominator " + std::to_string(g) + " is not positive");
}

}  // namespace detail

/// max f(x)/g(x) by Dinkelbach's method. `inner(lambda)` must return a maximiser
/// of f - lambda g as a RatioPoint.
template <class Inner>
auto dinkelbach(Inner&& inner, double eps, int max_iter = 100, double lambda0 = 0.0) {
  using X = decltype(inner(0.0).x);
  DinkelbachResult<X> res;
  double lambda = lambda0;
  for (int it = 0; it < max_iter; ++it) {
    auto pt = inner(lambda);
    detail::require_positive(pt.g);
    const double F = pt.f - lambda * pt.g;
    res.trace.lambda.push_back(lambda);
    res.trace.F.push_back(F);
    res.iterations = it + 1;
    res.x = std::move(pt.x);
    res.lambda = pt.f / pt.g;
    if (F <= eps) {
      res.converged = true;
      break;
    }
    lambda = res.lambda;
  }
  return res;
}

/// max_x min_i f_i(x)/g_i(x). `inner(lambda)` must return a maximiser of
/// min_i (f_i - lambda g_i) as a RatioFamilyPoint.
template <class Inner>
auto generalized_dinkelbach(Inner&& inner, double eps, int max_iter = 100, double lambda0 = 0.0) {
  using X = decltype(inner(0.0).x);
  DinkelbachResult<X> res;
  double lambda = lambda0;
  for (int it = 0; it < max_iter; ++it) {
    auto pt = inner(lambda);
    double F = std::numeric_limits<double>::infinity();
    double ratio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pt.f.size(); ++i) {
      detail::require_positive(pt.g[i]);
      F = std::min(F, pt.f[i] - lambda * pt.g[i]);
      ratio = std::min(ratio, pt.f[i] / pt.g[i]);
    }
    res.trace.lambda.push_back(lambda);
    res.trace.F.push_back(F);
    res.iterations = it + 1;
    res.x = std::move(pt.x);
    res.lambda = ratio;
    if (F <= eps) {
      res.converged = true;
      break;
    }
    lambda = ratio;
  }
  return res;
}

}  // namespace d2md
