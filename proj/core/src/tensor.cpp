#include "eulergel/tensor.hpp"

#include "eulergel/errors.hpp"

namespace eulergel {

Vec::Vec(std::initializer_list<double> values) : dim_(static_cast<int>(values.size())) {
  int i = 0;
  for (double v : values) a_[static_cast<std::size_t>(i++)] = v;
}

Vec& Vec::operator+=(const Vec& o) noexcept {
  for (int i = 0; i < dim_; ++i) (*this)[i] += o[i];
  return *this;
}

Vec& Vec::operator-=(const Vec& o) noexcept {
  for (int i = 0; i < dim_; ++i) (*this)[i] -= o[i];
  return *this;
}

Vec& Vec::operator*=(double s) noexcept {
  for (int i = 0; i < dim_; ++i) (*this)[i] *= s;
  return *this;
}

double Vec::dot(const Vec& o) const noexcept {
  double s = 0.0;
  for (int i = 0; i < dim_; ++i) s += (*this)[i] * o[i];
  return s;
}

Vec operator+(Vec a, const Vec& b) noexcept { return a += b; }
Vec operator-(Vec a, const Vec& b) noexcept { return a -= b; }
Vec operator*(double s, Vec a) noexcept { return a *= s; }

Tensor2::Tensor2(std::initializer_list<std::initializer_list<double>> rows)
    : dim_(static_cast<int>(rows.size())) {
  int i = 0;
  for (const auto& row : rows) {
    int j = 0;
    for (double v : row) (*this)(i, j++) = v;
    ++i;
  }
}

Tensor2 Tensor2::identity(int dim) noexcept {
  Tensor2 t(dim);
  for (int i = 0; i < dim; ++i) t(i, i) = 1.0;
  return t;
}

Tensor2 Tensor2::diag(std::initializer_list<double> entries) noexcept {
  Tensor2 t(static_cast<int>(entries.size()));
  int i = 0;
  for (double v : entries) {
    t(i, i) = v;
    ++i;
  }
  return t;
}

Tensor2 Tensor2::outer(const Vec& a, const Vec& b) noexcept {
  Tensor2 t(a.dim());
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j) t(i, j) = a[i] * b[j];
  return t;
}

Tensor2& Tensor2::operator+=(const Tensor2& o) noexcept {
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) (*this)(i, j) += o(i, j);
  return *this;
}

Tensor2& Tensor2::operator-=(const Tensor2& o) noexcept {
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) (*this)(i, j) -= o(i, j);
  return *this;
}

Tensor2& Tensor2::operator*=(double s) noexcept {
  for (auto& v : a_) v *= s;
  return *this;
}

Tensor2 Tensor2::transpose() const noexcept {
  Tensor2 t(dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) t(i, j) = (*this)(j, i);
  return t;
}

double Tensor2::trace() const noexcept {
  double s = 0.0;
  for (int i = 0; i < dim_; ++i) s += (*this)(i, i);
  return s;
}

double Tensor2::ddot(const Tensor2& o) const noexcept {
  double s = 0.0;
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) s += (*this)(i, j) * o(i, j);
  return s;
}

Vec Tensor2::operator*(const Vec& x) const noexcept {
  Vec y(dim_);
  for (int i = 0; i < dim_; ++i) {
    double s = 0.0;
    for (int j = 0; j < dim_; ++j) s += (*this)(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

Tensor2 operator+(Tensor2 a, const Tensor2& b) noexcept { return a += b; }
Tensor2 operator-(Tensor2 a, const Tensor2& b) noexcept { return a -= b; }
Tensor2 operator*(double s, Tensor2 a) noexcept { return a *= s; }

Tensor2 operator*(const Tensor2& a, const Tensor2& b) noexcept {
  const int d = a.dim();
  Tensor2 c(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      double s = 0.0;
      for (int k = 0; k < d; ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

Tensor3& Tensor3::operator+=(const Tensor3& o) noexcept {
  for (std::size_t n = 0; n < a_.size(); ++n) a_[n] += o.a_[n];
  return *this;
}

Tensor3& Tensor3::operator*=(double s) noexcept {
  for (auto& v : a_) v *= s;
  return *this;
}

double Tensor3::tdot(const Tensor3& o) const noexcept {
  double s = 0.0;
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j)
      for (int k = 0; k < dim_; ++k) s += (*this)(i, j, k) * o(i, j, k);
  return s;
}

Tensor3 operator*(double s, Tensor3 a) noexcept { return a *= s; }

double det(const Tensor2& a) noexcept {
  switch (a.dim()) {
    case 1:
      return a(0, 0);
    case 2:
      return a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    case 3:
      return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
             a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
             a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
    default:
      return 0.0;
  }
}

Tensor2 cof(const Tensor2& a) noexcept {
  const int d = a.dim();
  Tensor2 c(d);
  switch (d) {
    case 1:
      c(0, 0) = 1.0;
      break;
    case 2:
      c(0, 0) = a(1, 1);
      c(0, 1) = -a(1, 0);
      c(1, 0) = -a(0, 1);
      c(1, 1) = a(0, 0);
      break;
    case 3:
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          const int i1 = (i + 1) % 3, i2 = (i + 2) % 3;
          const int j1 = (j + 1) % 3, j2 = (j + 2) % 3;
          c(i, j) = a(i1, j1) * a(i2, j2) - a(i1, j2) * a(i2, j1);
        }
      break;
    default:
      break;
  }
  return c;
}

Tensor2 inv(const Tensor2& a) {
  const double dt = det(a);
  const double tol = 1e-14 * std::pow(a.norm(), a.dim());
  if (!(std::abs(dt) > tol)) throw SingularMatrix("inv: |det A| below singularity tolerance");
  Tensor2 r = cof(a).transpose();
  r *= 1.0 / dt;
  return r;
}

Tensor2 sym(const Tensor2& g) noexcept {
  Tensor2 s(g.dim());
  for (int i = 0; i < g.dim(); ++i)
    for (int j = 0; j < g.dim(); ++j) s(i, j) = 0.5 * (g(i, j) + g(j, i));
  return s;
}

Tensor2 skew(const Tensor2& g) noexcept {
  Tensor2 s(g.dim());
  for (int i = 0; i < g.dim(); ++i)
    for (int j = 0; j < g.dim(); ++j) s(i, j) = 0.5 * (g(i, j) - g(j, i));
  return s;
}

double jacobi_rate(const Tensor2& f, const Tensor2& grad_v) noexcept {
  return det(f) * grad_v.trace();
}

Tensor2 inverse_flow_rate(const Tensor2& f_inv, const Tensor2& grad_v) noexcept {
  return -1.0 * (f_inv * grad_v);
}

}  // namespace eulergel
