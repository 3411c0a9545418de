#pragma once

// Tensor-product spectral Galerkin spaces on a box, the quadrature grid that
// carries the collocated transport fields, and boundary quadrature.
//
// Non-periodic axes use normalized Legendre polynomials; the velocity
// component normal to a non-periodic face uses Shen bubble functions
// (P_m - P_{m+2}) along that axis so v.n = 0 holds exactly. Periodic axes
// use a real Fourier basis and a uniform trapezoid grid.

#include <array>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "eulergel/tensor.hpp"

namespace eulergel {

struct Box {
  int dim = 2;
  std::array<double, 3> lower{0.0, 0.0, 0.0};
  std::array<double, 3> upper{1.0, 1.0, 1.0};
  std::array<bool, 3> periodic{false, false, false};

  double length(int axis) const noexcept { return upper[axis] - lower[axis]; }
  double volume() const noexcept;
  bool all_periodic() const noexcept;
  /// Throws DimensionMismatch for d outside {1,2,3} or non-positive edges.
  void validate() const;
};

class Basis1D {
 public:
  enum class Kind { legendre, bubble, fourier };

  Basis1D(Kind kind, int degree, double lower, double upper);

  Kind kind() const noexcept { return kind_; }
  int degree() const noexcept { return degree_; }
  int size() const noexcept { return size_; }

  /// Values and first/second physical derivatives of every basis function
  /// at x. Any output pointer may be null; arrays must hold size() entries.
  void eval(double x, double* value, double* d1, double* d2) const;

 private:
  Kind kind_;
  int degree_;
  int size_;
  double lower_, upper_;
};

/// Dense evaluation tables of a basis at a point set: rows are points,
/// columns are basis functions. hess is indexed a * dim + b.
struct SpaceTables {
  Eigen::MatrixXd value;
  std::vector<Eigen::MatrixXd> grad;
  std::vector<Eigen::MatrixXd> hess;
};

class TensorSpace {
 public:
  TensorSpace() = default;
  explicit TensorSpace(std::vector<Basis1D> axes);

  int dim() const noexcept { return static_cast<int>(axes_.size()); }
  std::size_t size() const noexcept { return size_; }
  const Basis1D& axis(int a) const { return axes_[static_cast<std::size_t>(a)]; }

  /// order 0: values only, 1: plus gradients, 2: plus Hessians.
  SpaceTables tabulate(const std::vector<Vec>& points, int order) const;

 private:
  std::vector<Basis1D> axes_;
  std::size_t size_ = 0;
};

/// Z_l: unconstrained tensor-product scalar space of degree l per axis.
class ScalarSpace {
 public:
  ScalarSpace(const Box& box, int degree);

  const Box& box() const noexcept { return box_; }
  int degree() const noexcept { return degree_; }
  std::size_t size() const noexcept { return space_.size(); }
  const TensorSpace& tensor() const noexcept { return space_; }

 private:
  Box box_;
  int degree_;
  TensorSpace space_;
};

/// V_k: vector space of degree k per axis with v.n = 0 on non-periodic faces.
/// Coefficients are stored component after component.
class VelocitySpace {
 public:
  VelocitySpace(const Box& box, int degree);

  const Box& box() const noexcept { return box_; }
  int degree() const noexcept { return degree_; }
  int dim() const noexcept { return box_.dim; }
  std::size_t size() const noexcept { return size_; }
  const TensorSpace& component(int c) const { return comps_[static_cast<std::size_t>(c)]; }
  std::size_t offset(int c) const { return offsets_[static_cast<std::size_t>(c)]; }

 private:
  Box box_;
  int degree_;
  std::vector<TensorSpace> comps_;
  std::vector<std::size_t> offsets_;
  std::size_t size_ = 0;
};

/// Velocity tables expanded to the full coefficient vector:
/// value[i], grad[i * d + j] = d_j v_i, grad_e[(i * d + j) * d + k] = d_k e_ij.
struct VelocityTables {
  std::vector<Eigen::MatrixXd> value;
  std::vector<Eigen::MatrixXd> grad;
  std::vector<Eigen::MatrixXd> grad_e;
};

VelocityTables tabulate_velocity(const VelocitySpace& space, const std::vector<Vec>& points,
                                 int order);

/// Tensor-product quadrature grid; nodes are ordered with axis 0 slowest.
class QuadGrid {
 public:
  /// Gauss-Legendre on non-periodic axes, uniform on periodic ones.
  QuadGrid(const Box& box, const std::array<int, 3>& counts);
  /// Node count per axis chosen so products of two degree-`degree` basis
  /// functions are integrated exactly, plus `extra` nodes.
  static QuadGrid for_degree(const Box& box, int degree, int extra = 3);

  const Box& box() const noexcept { return box_; }
  int dim() const noexcept { return box_.dim; }
  int count(int axis) const { return counts_[static_cast<std::size_t>(axis)]; }
  std::size_t size() const noexcept { return size_; }

  const std::vector<double>& nodes(int axis) const { return x_[static_cast<std::size_t>(axis)]; }
  const std::vector<double>& axis_weights(int axis) const {
    return w_[static_cast<std::size_t>(axis)];
  }
  const std::vector<Vec>& points() const noexcept { return points_; }
  const Eigen::VectorXd& weights() const noexcept { return weights_; }

  /// Collocation derivative along an axis acting on nodal values.
  const Eigen::SparseMatrix<double>& derivative(int axis) const {
    return diff_[static_cast<std::size_t>(axis)];
  }
  /// W^{-1} D^T W along an axis (summation-by-parts adjoint).
  const Eigen::SparseMatrix<double>& derivative_adjoint(int axis) const {
    return diff_adj_[static_cast<std::size_t>(axis)];
  }
  const Eigen::MatrixXd& derivative_1d(int axis) const {
    return diff1d_[static_cast<std::size_t>(axis)];
  }

  /// Interpolation weights of the 1D nodal interpolant at x.
  Eigen::RowVectorXd interpolation_row(int axis, double x) const;
  /// Rows map nodal values to values at the given points.
  Eigen::MatrixXd interpolation_matrix(const std::vector<Vec>& points) const;

  double min_spacing() const;

 private:
  Box box_;
  std::array<int, 3> counts_{1, 1, 1};
  std::size_t size_ = 1;
  std::array<std::vector<double>, 3> x_, w_, bary_;
  std::vector<Vec> points_;
  Eigen::VectorXd weights_;
  std::array<Eigen::MatrixXd, 3> diff1d_;
  std::array<Eigen::SparseMatrix<double>, 3> diff_, diff_adj_;
};

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

struct BoundaryQuad {
  std::vector<Vec> points;
  std::vector<double> weights;
  std::vector<Vec> normals;
  /// 2 * axis for the lower face, 2 * axis + 1 for the upper face.
  std::vector<int> face;
  /// Interpolation from volume nodes to boundary points (boundary x nodes).
  Eigen::MatrixXd trace;

  std::size_t size() const noexcept { return points.size(); }
};

/// Faces of the non-periodic axes, using the grid's tangential nodes.
/// Throws AllPeriodic if the box has no boundary.
BoundaryQuad boundary_quadrature(const QuadGrid& grid);
BoundaryQuad boundary_quadrature(const Box& box, int nodes_per_axis = 8);

std::vector<double> eval_field(const ScalarSpace& space, const Eigen::VectorXd& coeffs,
                               const std::vector<Vec>& points);
std::vector<Vec> eval_field(const VelocitySpace& space, const Eigen::VectorXd& coeffs,
                            const std::vector<Vec>& points);
std::vector<Vec> grad_field(const ScalarSpace& space, const Eigen::VectorXd& coeffs,
                            const std::vector<Vec>& points);
/// grad v (i, j) = d_j v_i.
std::vector<Tensor2> grad_field(const VelocitySpace& space, const Eigen::VectorXd& coeffs,
                                const std::vector<Vec>& points);
std::vector<Tensor2> grad2_field(const ScalarSpace& space, const Eigen::VectorXd& coeffs,
                                 const std::vector<Vec>& points);
/// Second gradient T(i, j, k) = d_j d_k v_i.
std::vector<Tensor3> grad2_field(const VelocitySpace& space, const Eigen::VectorXd& coeffs,
                                 const std::vector<Vec>& points);

/// L2 projection of nodal values (one column per component) onto a space.
Eigen::VectorXd project_scalar(const ScalarSpace& space, const QuadGrid& grid,
                               const Eigen::VectorXd& nodal);
Eigen::VectorXd project_velocity(const VelocitySpace& space, const QuadGrid& grid,
                                 const std::vector<Vec>& nodal);

/// L2 projection onto V_k of a field given by coefficients in the
/// unconstrained vector space (d copies of the degree-k scalar space).
Eigen::VectorXd project_impenetrable(const VelocitySpace& space, const Eigen::VectorXd& raw);

/// Exact embedding of coefficients into a space of equal or higher degree.
Eigen::VectorXd embed(const ScalarSpace& from, const ScalarSpace& to, const Eigen::VectorXd& c);
Eigen::VectorXd embed(const VelocitySpace& from, const VelocitySpace& to,
                      const Eigen::VectorXd& c);

}  // namespace eulergel
