#pragma once

#include <random>

#include "eulergel/tensor.hpp"
#include "oracles/oracles.hpp"

namespace testing {

inline oracle::Mat to_mat(const eulergel::Tensor2& a) {
  oracle::Mat m = oracle::zeros(a.dim());
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j) m[i][j] = a(i, j);
  return m;
}

inline eulergel::Tensor2 from_mat(const oracle::Mat& m) {
  const int d = static_cast<int>(m.size());
  eulergel::Tensor2 a(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = m[i][j];
  return a;
}

inline eulergel::Tensor2 random_tensor(std::mt19937_64& rng, int d, double lo = -1.0,
                                       double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  eulergel::Tensor2 a(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = u(rng);
  return a;
}

/// Random F near the identity, rescaled so that det F is log-uniform in [lo, hi].
inline eulergel::Tensor2 random_deformation(std::mt19937_64& rng, int d, double lo, double hi) {
  std::uniform_real_distribution<double> u(-0.4, 0.4), l(std::log(lo), std::log(hi));
  eulergel::Tensor2 f = eulergel::Tensor2::identity(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) f(i, j) += u(rng);
  const double target = std::exp(l(rng));
  const double cur = eulergel::det(f);
  if (cur <= 0.0) return random_deformation(rng, d, lo, hi);
  return std::pow(target / cur, 1.0 / d) * f;
}

inline double max_abs_diff(const eulergel::Tensor2& a, const eulergel::Tensor2& b) {
  double m = 0.0;
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
  return m;
}

}  // namespace testing
