#pragma once

// Test-side reference computations written independently of the library:
// plain nested arrays, textbook formulas, finite differences.

#include <array>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

using Mat = std::vector<std::vector<double>>;

inline Mat zeros(int n) { return Mat(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n), 0.0)); }

inline Mat identity(int n) {
  Mat m = zeros(n);
  for (int i = 0; i < n; ++i) m[i][i] = 1.0;
  return m;
}

inline Mat matmul(const Mat& a, const Mat& b) {
  const std::size_t n = a.size();
  Mat c = zeros(static_cast<int>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

inline double frob(const Mat& a) {
  double s = 0.0;
  for (const auto& r : a)
    for (double x : r) s += x * x;
  return std::sqrt(s);
}

inline Mat minor_of(const Mat& a, std::size_t row, std::size_t col) {
  Mat m;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (i == row) continue;
    std::vector<double> r;
    for (std::size_t j = 0; j < a.size(); ++j)
      if (j != col) r.push_back(a[i][j]);
    m.push_back(r);
  }
  return m;
}

/// Laplace expansion along the first row.
inline double det_cofactor(const Mat& a) {
  if (a.size() == 1) return a[0][0];
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j)
    s += ((j % 2) ? -1.0 : 1.0) * a[0][j] * det_cofactor(minor_of(a, 0, j));
  return s;
}

/// Gauss-Jordan elimination with partial pivoting.
inline Mat inverse_gauss_jordan(Mat a) {
  const std::size_t n = a.size();
  Mat inv = identity(static_cast<int>(n));
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    std::swap(a[c], a[p]);
    std::swap(inv[c], inv[p]);
    const double piv = a[c][c];
    for (std::size_t j = 0; j < n; ++j) {
      a[c][j] /= piv;
      inv[c][j] /= piv;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c];
      for (std::size_t j = 0; j < n; ++j) {
        a[r][j] -= f * a[c][j];
        inv[r][j] -= f * inv[c][j];
      }
    }
  }
  return inv;
}

/// exp(A) by scaling and squaring of a long Taylor series.
inline Mat expm(const Mat& a) {
  const int n = static_cast<int>(a.size());
  const double norm = frob(a);
  int squarings = 0;
  double scale = 1.0;
  while (norm * scale > 0.1) {
    scale *= 0.5;
    ++squarings;
  }
  Mat term = identity(n), sum = identity(n), as = a;
  for (auto& r : as)
    for (double& x : r) x *= scale;
  for (int k = 1; k <= 30; ++k) {
    term = matmul(term, as);
    for (auto& r : term)
      for (double& x : r) x /= k;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) sum[i][j] += term[i][j];
  }
  for (int s = 0; s < squarings; ++s) sum = matmul(sum, sum);
  return sum;
}

/// Fourth-order central difference of a scalar function.
inline double central_diff(const std::function<double(double)>& f, double x, double h) {
  return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}

inline double rel_err(double a, double b, double floor = 1e-12) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

/// Gauss-Legendre rule on [a, b] by Newton iteration on P_n.
inline void gauss(int n, double a, double b, std::vector<double>& x, std::vector<double>& w) {
  x.assign(static_cast<std::size_t>(n), 0.0);
  w.assign(static_cast<std::size_t>(n), 0.0);
  const double pi = std::acos(-1.0);
  for (int i = 0; i < n; ++i) {
    double t = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (t * p1 - p0) / (t * t - 1.0);
      const double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-16) break;
    }
    x[static_cast<std::size_t>(i)] = 0.5 * (a + b) + 0.5 * (b - a) * t;
    w[static_cast<std::size_t>(i)] = (b - a) / ((1 - t * t) * dp * dp);
  }
}

/// Tensor-product Gauss integral of f over a 2D box.
inline double integrate2d(const std::function<double(double, double)>& f, double x0, double x1,
                          double y0, double y1, int n) {
  std::vector<double> xs, wx, ys, wy;
  gauss(n, x0, x1, xs, wx);
  gauss(n, y0, y1, ys, wy);
  double s = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = 0; j < ys.size(); ++j) s += wx[i] * wy[j] * f(xs[i], ys[j]);
  return s;
}

}  // namespace oracle
