#pragma once

// Small dense tensors for pointwise constitutive math at quadrature nodes.
// The spatial dimension d is a runtime value in {1, 2, 3}; storage is fixed
// so every type here is a trivially copyable value.

#include <array>
#include <cmath>
#include <initializer_list>

namespace eulergel {

inline constexpr int kMaxDim = 3;

class Vec {
 public:
  Vec() = default;
  explicit Vec(int dim) : dim_(dim) {}
  Vec(std::initializer_list<double> values);

  int dim() const noexcept { return dim_; }
  double& operator[](int i) noexcept { return a_[static_cast<std::size_t>(i)]; }
  double operator[](int i) const noexcept { return a_[static_cast<std::size_t>(i)]; }

  Vec& operator+=(const Vec& o) noexcept;
  Vec& operator-=(const Vec& o) noexcept;
  Vec& operator*=(double s) noexcept;

  double dot(const Vec& o) const noexcept;
  double norm() const noexcept { return std::sqrt(dot(*this)); }

 private:
  int dim_ = 0;
  std::array<double, kMaxDim> a_{};
};

Vec operator+(Vec a, const Vec& b) noexcept;
Vec operator-(Vec a, const Vec& b) noexcept;
Vec operator*(double s, Vec a) noexcept;

class Tensor2 {
 public:
  Tensor2() = default;
  explicit Tensor2(int dim) : dim_(dim) {}
  /// Row-major nested initializer, e.g. {{1, 2}, {3, 4}}.
  Tensor2(std::initializer_list<std::initializer_list<double>> rows);

  static Tensor2 identity(int dim) noexcept;
  static Tensor2 diag(std::initializer_list<double> entries) noexcept;
  static Tensor2 outer(const Vec& a, const Vec& b) noexcept;

  int dim() const noexcept { return dim_; }
  double& operator()(int i, int j) noexcept { return a_[static_cast<std::size_t>(3 * i + j)]; }
  double operator()(int i, int j) const noexcept {
    return a_[static_cast<std::size_t>(3 * i + j)];
  }

  Tensor2& operator+=(const Tensor2& o) noexcept;
  Tensor2& operator-=(const Tensor2& o) noexcept;
  Tensor2& operator*=(double s) noexcept;

  Tensor2 transpose() const noexcept;
  double trace() const noexcept;
  /// Frobenius norm |A| = sqrt(A:A).
  double norm() const noexcept { return std::sqrt(ddot(*this)); }
  /// Double contraction A:B.
  double ddot(const Tensor2& o) const noexcept;
  Vec operator*(const Vec& x) const noexcept;

 private:
  int dim_ = 0;
  std::array<double, 9> a_{};
};

Tensor2 operator+(Tensor2 a, const Tensor2& b) noexcept;
Tensor2 operator-(Tensor2 a, const Tensor2& b) noexcept;
Tensor2 operator*(double s, Tensor2 a) noexcept;
Tensor2 operator*(const Tensor2& a, const Tensor2& b) noexcept;

/// Third-order tensor, T(i, j, k). Stores the gradient of a strain rate as
/// T(i, j, k) = d e_ij / d x_k.
class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(int dim) : dim_(dim) {}

  int dim() const noexcept { return dim_; }
  double& operator()(int i, int j, int k) noexcept {
    return a_[static_cast<std::size_t>(9 * i + 3 * j + k)];
  }
  double operator()(int i, int j, int k) const noexcept {
    return a_[static_cast<std::size_t>(9 * i + 3 * j + k)];
  }

  Tensor3& operator+=(const Tensor3& o) noexcept;
  Tensor3& operator*=(double s) noexcept;

  /// Triple contraction A⋮B.
  double tdot(const Tensor3& o) const noexcept;
  double norm() const noexcept { return std::sqrt(tdot(*this)); }

 private:
  int dim_ = 0;
  std::array<double, 27> a_{};
};

Tensor3 operator*(double s, Tensor3 a) noexcept;

double det(const Tensor2& a) noexcept;

/// Cofactor matrix; satisfies A * cof(A)^T = det(A) I.
Tensor2 cof(const Tensor2& a) noexcept;

/// Inverse; throws SingularMatrix when |det A| <= 1e-14 |A|^d.
Tensor2 inv(const Tensor2& a);

Tensor2 sym(const Tensor2& g) noexcept;
Tensor2 skew(const Tensor2& g) noexcept;

/// Rate of det F along Fdot = (grad v) F: det(F) tr(grad v).
double jacobi_rate(const Tensor2& f, const Tensor2& grad_v) noexcept;

/// Rate of F^{-1} along the same flow: -F^{-1} grad v.
Tensor2 inverse_flow_rate(const Tensor2& f_inv, const Tensor2& grad_v) noexcept;

}  // namespace eulergel
