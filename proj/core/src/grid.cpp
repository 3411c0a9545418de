#include "eulergel/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "eulergel/errors.hpp"

namespace eulergel {

namespace {

constexpr double kPi = std::numbers::pi;

// Legendre P_0..P_n with first and second derivatives on [-1, 1].
void legendre_table(int n, double x, std::vector<double>& p, std::vector<double>& dp,
                    std::vector<double>& ddp) {
  const auto sz = static_cast<std::size_t>(n + 1);
  p.assign(sz, 0.0);
  dp.assign(sz, 0.0);
  ddp.assign(sz, 0.0);
  p[0] = 1.0;
  if (n == 0) return;
  p[1] = x;
  dp[1] = 1.0;
  for (int m = 1; m < n; ++m) {
    const auto k = static_cast<std::size_t>(m);
    p[k + 1] = ((2.0 * m + 1.0) * x * p[k] - m * p[k - 1]) / (m + 1.0);
    dp[k + 1] = dp[k - 1] + (2.0 * m + 1.0) * p[k];
    ddp[k + 1] = ddp[k - 1] + (2.0 * m + 1.0) * dp[k];
  }
}

std::array<std::size_t, 3> strides(const std::array<int, 3>& n) {
  return {static_cast<std::size_t>(n[1] * n[2]), static_cast<std::size_t>(n[2]), 1};
}

}  // namespace

double Box::volume() const noexcept {
  double v = 1.0;
  for (int a = 0; a < dim; ++a) v *= length(a);
  return v;
}

bool Box::all_periodic() const noexcept {
  for (int a = 0; a < dim; ++a)
    if (!periodic[static_cast<std::size_t>(a)]) return false;
  return true;
}

void Box::validate() const {
  if (dim < 1 || dim > kMaxDim) throw DimensionMismatch("box dimension must be 1, 2 or 3");
  for (int a = 0; a < dim; ++a)
    if (!(length(a) > 0.0))
      throw DimensionMismatch("box edge " + std::to_string(a) + " has non-positive length");
}

Basis1D::Basis1D(Kind kind, int degree, double lower, double upper)
    : kind_(kind), degree_(degree), lower_(lower), upper_(upper) {
  if (degree < 0) throw DimensionMismatch("basis degree must be non-negative");
  switch (kind) {
    case Kind::legendre:
      size_ = degree + 1;
      break;
    case Kind::bubble:
      if (degree < 2) throw DimensionMismatch("bubble basis needs degree >= 2");
      size_ = degree - 1;
      break;
    case Kind::fourier:
      size_ = 2 * (degree / 2) + 1;
      break;
  }
}

void Basis1D::eval(double x, double* value, double* d1, double* d2) const {
  const double s = 2.0 / (upper_ - lower_);
  const double xi = s * (x - lower_) - 1.0;
  if (kind_ == Kind::fourier) {
    const double th = kPi * (xi + 1.0);
    const double ts = kPi * s;
    if (value) value[0] = std::sqrt(0.5);
    if (d1) d1[0] = 0.0;
    if (d2) d2[0] = 0.0;
    for (int m = 1; 2 * m <= degree_; ++m) {
      const double c = std::cos(m * th), sn = std::sin(m * th);
      const int i = 2 * m - 1;
      const double w = m * ts;
      if (value) {
        value[i] = c;
        value[i + 1] = sn;
      }
      if (d1) {
        d1[i] = -w * sn;
        d1[i + 1] = w * c;
      }
      if (d2) {
        d2[i] = -w * w * c;
        d2[i + 1] = -w * w * sn;
      }
    }
    return;
  }
  std::vector<double> p, dp, ddp;
  legendre_table(degree_ + 2, xi, p, dp, ddp);
  for (int m = 0; m < size_; ++m) {
    const auto k = static_cast<std::size_t>(m);
    double v, g, h;
    if (kind_ == Kind::legendre) {
      const double c = std::sqrt((2.0 * m + 1.0) / 2.0);
      v = c * p[k];
      g = c * dp[k];
      h = c * ddp[k];
    } else {
      const double c = 1.0 / std::sqrt(2.0 * (2.0 * m + 3.0));
      v = c * (p[k] - p[k + 2]);
      g = c * (dp[k] - dp[k + 2]);
      h = c * (ddp[k] - ddp[k + 2]);
    }
    if (value) value[m] = v;
    if (d1) d1[m] = s * g;
    if (d2) d2[m] = s * s * h;
  }
}

TensorSpace::TensorSpace(std::vector<Basis1D> axes) : axes_(std::move(axes)) {
  size_ = 1;
  for (const auto& b : axes_) size_ *= static_cast<std::size_t>(b.size());
}

SpaceTables TensorSpace::tabulate(const std::vector<Vec>& points, int order) const {
  const int d = dim();
  const auto np = static_cast<Eigen::Index>(points.size());
  const auto nb = static_cast<Eigen::Index>(size_);
  SpaceTables t;
  t.value.resize(np, nb);
  if (order >= 1) t.grad.assign(static_cast<std::size_t>(d), Eigen::MatrixXd(np, nb));
  if (order >= 2) t.hess.assign(static_cast<std::size_t>(d * d), Eigen::MatrixXd(np, nb));

  std::array<int, 3> n{1, 1, 1};
  for (int a = 0; a < d; ++a) n[static_cast<std::size_t>(a)] = axes_[static_cast<std::size_t>(a)].size();
  std::array<std::vector<double>, 3> v, g, h;
  for (int a = 0; a < 3; ++a) {
    const auto sz = static_cast<std::size_t>(n[static_cast<std::size_t>(a)]);
    v[static_cast<std::size_t>(a)].assign(sz, 1.0);
    g[static_cast<std::size_t>(a)].assign(sz, 0.0);
    h[static_cast<std::size_t>(a)].assign(sz, 0.0);
  }

  for (Eigen::Index p = 0; p < np; ++p) {
    for (int a = 0; a < d; ++a) {
      const auto ua = static_cast<std::size_t>(a);
      axes_[ua].eval(points[static_cast<std::size_t>(p)][a], v[ua].data(), g[ua].data(),
                     h[ua].data());
    }
    Eigen::Index col = 0;
    for (int m0 = 0; m0 < n[0]; ++m0)
      for (int m1 = 0; m1 < n[1]; ++m1)
        for (int m2 = 0; m2 < n[2]; ++m2, ++col) {
          const std::array<std::size_t, 3> m{static_cast<std::size_t>(m0),
                                             static_cast<std::size_t>(m1),
                                             static_cast<std::size_t>(m2)};
          std::array<double, 3> f{v[0][m[0]], v[1][m[1]], v[2][m[2]]};
          t.value(p, col) = f[0] * f[1] * f[2];
          if (order < 1) continue;
          for (int a = 0; a < d; ++a) {
            const auto ua = static_cast<std::size_t>(a);
            double prod = g[ua][m[ua]];
            for (int b = 0; b < 3; ++b)
              if (b != a) prod *= f[static_cast<std::size_t>(b)];
            t.grad[ua](p, col) = prod;
          }
          if (order < 2) continue;
          for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) {
              const auto ua = static_cast<std::size_t>(a), ub = static_cast<std::size_t>(b);
              double prod;
              if (a == b) {
                prod = h[ua][m[ua]];
              } else {
                prod = g[ua][m[ua]] * g[ub][m[ub]];
              }
              for (int c = 0; c < 3; ++c)
                if (c != a && c != b) prod *= f[static_cast<std::size_t>(c)];
              t.hess[static_cast<std::size_t>(a * d + b)](p, col) = prod;
            }
        }
  }
  return t;
}

ScalarSpace::ScalarSpace(const Box& box, int degree) : box_(box), degree_(degree) {
  box.validate();
  std::vector<Basis1D> axes;
  for (int a = 0; a < box.dim; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    axes.emplace_back(box.periodic[ua] ? Basis1D::Kind::fourier : Basis1D::Kind::legendre, degree,
                      box.lower[ua], box.upper[ua]);
  }
  space_ = TensorSpace(std::move(axes));
}

VelocitySpace::VelocitySpace(const Box& box, int degree) : box_(box), degree_(degree) {
  box.validate();
  for (int c = 0; c < box.dim; ++c) {
    std::vector<Basis1D> axes;
    for (int a = 0; a < box.dim; ++a) {
      const auto ua = static_cast<std::size_t>(a);
      Basis1D::Kind kind = Basis1D::Kind::legendre;
      if (box.periodic[ua])
        kind = Basis1D::Kind::fourier;
      else if (a == c)
        kind = Basis1D::Kind::bubble;
      axes.emplace_back(kind, degree, box.lower[ua], box.upper[ua]);
    }
    offsets_.push_back(size_);
    comps_.emplace_back(std::move(axes));
    size_ += comps_.back().size();
  }
}

VelocityTables tabulate_velocity(const VelocitySpace& space, const std::vector<Vec>& points,
                                 int order) {
  const int d = space.dim();
  const auto np = static_cast<Eigen::Index>(points.size());
  const auto nv = static_cast<Eigen::Index>(space.size());
  std::vector<SpaceTables> comp;
  for (int c = 0; c < d; ++c) comp.push_back(space.component(c).tabulate(points, order));

  auto block = [&](int c) {
    return std::pair<Eigen::Index, Eigen::Index>(static_cast<Eigen::Index>(space.offset(c)),
                                                 static_cast<Eigen::Index>(space.component(c).size()));
  };

  VelocityTables t;
  for (int i = 0; i < d; ++i) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(np, nv);
    auto [off, n] = block(i);
    m.middleCols(off, n) = comp[static_cast<std::size_t>(i)].value;
    t.value.push_back(std::move(m));
  }
  if (order >= 1) {
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(np, nv);
        auto [off, n] = block(i);
        m.middleCols(off, n) = comp[static_cast<std::size_t>(i)].grad[static_cast<std::size_t>(j)];
        t.grad.push_back(std::move(m));
      }
  }
  if (order >= 2) {
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) {
          Eigen::MatrixXd m = Eigen::MatrixXd::Zero(np, nv);
          auto [oi, ni] = block(i);
          auto [oj, nj] = block(j);
          m.middleCols(oi, ni) +=
              0.5 * comp[static_cast<std::size_t>(i)].hess[static_cast<std::size_t>(j * d + k)];
          m.middleCols(oj, nj) +=
              0.5 * comp[static_cast<std::size_t>(j)].hess[static_cast<std::size_t>(i * d + k)];
          t.grad_e.push_back(std::move(m));
        }
  }
  return t;
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw DimensionMismatch("gauss_legendre needs n >= 1");
  nodes.assign(static_cast<std::size_t>(n), 0.0);
  weights.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int m = 1; m < n; ++m) {
        const double p2 = ((2.0 * m + 1.0) * x * p1 - m * p0) / (m + 1.0);
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) {
        p1 = x;
        p0 = 1.0;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const auto k = static_cast<std::size_t>(n - 1 - i);
    nodes[k] = x;
    weights[k] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

QuadGrid::QuadGrid(const Box& box, const std::array<int, 3>& counts) : box_(box) {
  box.validate();
  const int d = box.dim;
  for (int a = 0; a < 3; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    if (a >= d) {
      counts_[ua] = 1;
      x_[ua] = {0.0};
      w_[ua] = {1.0};
      continue;
    }
    const int n = counts[ua];
    if (n < 1) throw DimensionMismatch("quadrature needs at least one node per axis");
    counts_[ua] = n;
    const double lo = box.lower[ua], len = box.length(a);
    if (box.periodic[ua]) {
      x_[ua].resize(static_cast<std::size_t>(n));
      w_[ua].assign(static_cast<std::size_t>(n), len / n);
      for (int j = 0; j < n; ++j) x_[ua][static_cast<std::size_t>(j)] = lo + j * len / n;
      Eigen::MatrixXd dm = Eigen::MatrixXd::Zero(n, n);
      const double h = 2.0 * kPi / n;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          if (i == j) continue;
          const double half = 0.5 * (i - j) * h;
          const double sign = ((i - j) % 2 == 0) ? 1.0 : -1.0;
          dm(i, j) = (n % 2 == 1) ? 0.5 * sign / std::sin(half)
                                  : 0.5 * sign * std::cos(half) / std::sin(half);
        }
      diff1d_[ua] = dm * (2.0 * kPi / len);
    } else {
      std::vector<double> xr, wr;
      gauss_legendre(n, xr, wr);
      x_[ua].resize(static_cast<std::size_t>(n));
      w_[ua].resize(static_cast<std::size_t>(n));
      bary_[ua].resize(static_cast<std::size_t>(n));
      for (int j = 0; j < n; ++j) {
        const auto uj = static_cast<std::size_t>(j);
        x_[ua][uj] = lo + 0.5 * (xr[uj] + 1.0) * len;
        w_[ua][uj] = 0.5 * len * wr[uj];
        double prod = 1.0;
        for (int k = 0; k < n; ++k)
          if (k != j) prod *= xr[uj] - xr[static_cast<std::size_t>(k)];
        bary_[ua][uj] = 1.0 / prod;
      }
      Eigen::MatrixXd dm = Eigen::MatrixXd::Zero(n, n);
      for (int i = 0; i < n; ++i) {
        double diag = 0.0;
        for (int j = 0; j < n; ++j) {
          if (i == j) continue;
          const auto ui = static_cast<std::size_t>(i), uj = static_cast<std::size_t>(j);
          dm(i, j) = (bary_[ua][uj] / bary_[ua][ui]) / (xr[ui] - xr[uj]);
          diag -= dm(i, j);
        }
        dm(i, i) = diag;
      }
      diff1d_[ua] = dm * (2.0 / len);
    }
  }

  size_ = static_cast<std::size_t>(counts_[0] * counts_[1] * counts_[2]);
  points_.reserve(size_);
  weights_.resize(static_cast<Eigen::Index>(size_));
  std::size_t node = 0;
  for (int i0 = 0; i0 < counts_[0]; ++i0)
    for (int i1 = 0; i1 < counts_[1]; ++i1)
      for (int i2 = 0; i2 < counts_[2]; ++i2, ++node) {
        const std::array<std::size_t, 3> i{static_cast<std::size_t>(i0),
                                           static_cast<std::size_t>(i1),
                                           static_cast<std::size_t>(i2)};
        Vec p(d);
        for (int a = 0; a < d; ++a) p[a] = x_[static_cast<std::size_t>(a)][i[static_cast<std::size_t>(a)]];
        points_.push_back(p);
        weights_[static_cast<Eigen::Index>(node)] = w_[0][i[0]] * w_[1][i[1]] * w_[2][i[2]];
      }

  const auto st = strides(counts_);
  for (int a = 0; a < d; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    const int n = counts_[ua];
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(size_ * static_cast<std::size_t>(n));
    for (std::size_t row = 0; row < size_; ++row) {
      const int ia = static_cast<int>((row / st[ua]) % static_cast<std::size_t>(n));
      const std::size_t base = row - static_cast<std::size_t>(ia) * st[ua];
      for (int j = 0; j < n; ++j) {
        const double v = diff1d_[ua](ia, j);
        if (v != 0.0)
          trip.emplace_back(static_cast<int>(row),
                            static_cast<int>(base + static_cast<std::size_t>(j) * st[ua]), v);
      }
    }
    const auto sz = static_cast<Eigen::Index>(size_);
    diff_[ua].resize(sz, sz);
    diff_[ua].setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseMatrix<double> adj = diff_[ua].transpose();
    // W^{-1} D^T W: scale rows by 1/w and columns by w.
    adj = weights_.cwiseInverse().asDiagonal() * adj * weights_.asDiagonal();
    diff_adj_[ua] = adj;
  }
}

QuadGrid QuadGrid::for_degree(const Box& box, int degree, int extra) {
  std::array<int, 3> counts{1, 1, 1};
  for (int a = 0; a < box.dim; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    if (box.periodic[ua])
      counts[ua] = 2 * (degree / 2 + std::max(extra, 1)) + 1;
    else
      counts[ua] = degree + std::max(extra, 2);
  }
  return QuadGrid(box, counts);
}

Eigen::RowVectorXd QuadGrid::interpolation_row(int axis, double x) const {
  const auto ua = static_cast<std::size_t>(axis);
  const int n = counts_[ua];
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
  const auto& nodes = x_[ua];
  if (box_.periodic[ua]) {
    const double len = box_.length(axis);
    for (int j = 0; j < n; ++j) {
      const double th = 2.0 * kPi * (x - nodes[static_cast<std::size_t>(j)]) / len;
      const double sh = std::sin(0.5 * th);
      if (std::abs(sh) < 1e-14) {
        row.setZero();
        row(j) = 1.0;
        return row;
      }
      row(j) = (n % 2 == 1) ? std::sin(0.5 * n * th) / (n * sh)
                            : std::sin(0.5 * n * th) * std::cos(0.5 * th) / (n * sh);
    }
    return row;
  }
  const double len = box_.length(axis);
  const double xi = 2.0 * (x - box_.lower[ua]) / len - 1.0;
  double sum = 0.0;
  for (int j = 0; j < n; ++j) {
    const auto uj = static_cast<std::size_t>(j);
    const double xj = 2.0 * (nodes[uj] - box_.lower[ua]) / len - 1.0;
    const double diff = xi - xj;
    if (diff == 0.0) {
      row.setZero();
      row(j) = 1.0;
      return row;
    }
    row(j) = bary_[ua][uj] / diff;
    sum += row(j);
  }
  return row / sum;
}

Eigen::MatrixXd QuadGrid::interpolation_matrix(const std::vector<Vec>& points) const {
  const int d = box_.dim;
  Eigen::MatrixXd m(static_cast<Eigen::Index>(points.size()), static_cast<Eigen::Index>(size_));
  for (std::size_t p = 0; p < points.size(); ++p) {
    std::array<Eigen::RowVectorXd, 3> rows;
    for (int a = 0; a < 3; ++a)
      rows[static_cast<std::size_t>(a)] =
          a < d ? interpolation_row(a, points[p][a]) : Eigen::RowVectorXd::Ones(1);
    Eigen::Index col = 0;
    for (int i0 = 0; i0 < counts_[0]; ++i0)
      for (int i1 = 0; i1 < counts_[1]; ++i1)
        for (int i2 = 0; i2 < counts_[2]; ++i2, ++col)
          m(static_cast<Eigen::Index>(p), col) = rows[0](i0) * rows[1](i1) * rows[2](i2);
  }
  return m;
}

double QuadGrid::min_spacing() const {
  double h = std::numeric_limits<double>::infinity();
  for (int a = 0; a < box_.dim; ++a) {
    const auto& x = x_[static_cast<std::size_t>(a)];
    if (box_.periodic[static_cast<std::size_t>(a)]) {
      h = std::min(h, box_.length(a) / static_cast<double>(x.size()));
      continue;
    }
    for (std::size_t j = 1; j < x.size(); ++j) h = std::min(h, x[j] - x[j - 1]);
    if (x.size() == 1) h = std::min(h, box_.length(a));
  }
  return h;
}

BoundaryQuad boundary_quadrature(const QuadGrid& grid) {
  const Box& box = grid.box();
  if (box.all_periodic()) throw AllPeriodic("boundary quadrature requested on an all-periodic box");
  const int d = box.dim;
  BoundaryQuad bq;
  std::vector<Eigen::RowVectorXd> traces;
  std::array<int, 3> n{grid.count(0), d > 1 ? grid.count(1) : 1, d > 2 ? grid.count(2) : 1};
  const auto st = strides(n);
  std::vector<std::vector<std::pair<std::size_t, double>>> rows;

  for (int a = 0; a < d; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    if (box.periodic[ua]) continue;
    for (int side = 0; side < 2; ++side) {
      const double xa = side == 0 ? box.lower[ua] : box.upper[ua];
      const Eigen::RowVectorXd r = grid.interpolation_row(a, xa);
      // Iterate over nodes with index 0 along axis a; those enumerate the face.
      for (std::size_t node = 0; node < grid.size(); ++node) {
        const int ia = static_cast<int>((node / st[ua]) % static_cast<std::size_t>(n[ua]));
        if (ia != 0) continue;
        Vec p = grid.points()[node];
        p[a] = xa;
        double w = 1.0;
        for (int b = 0; b < d; ++b) {
          if (b == a) continue;
          const auto ub = static_cast<std::size_t>(b);
          const int ib = static_cast<int>((node / st[ub]) % static_cast<std::size_t>(n[ub]));
          w *= grid.axis_weights(b)[static_cast<std::size_t>(ib)];
        }
        Vec normal(d);
        normal[a] = side == 0 ? -1.0 : 1.0;
        bq.points.push_back(p);
        bq.weights.push_back(w);
        bq.normals.push_back(normal);
        bq.face.push_back(2 * a + side);
        std::vector<std::pair<std::size_t, double>> row;
        for (int j = 0; j < n[ua]; ++j)
          row.emplace_back(node + static_cast<std::size_t>(j) * st[ua], r(j));
        rows.push_back(std::move(row));
      }
    }
  }
  bq.trace = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()),
                                   static_cast<Eigen::Index>(grid.size()));
  for (std::size_t b = 0; b < rows.size(); ++b)
    for (const auto& [col, v] : rows[b])
      bq.trace(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(col)) = v;
  return bq;
}

BoundaryQuad boundary_quadrature(const Box& box, int nodes_per_axis) {
  std::array<int, 3> counts{nodes_per_axis, nodes_per_axis, nodes_per_axis};
  for (int a = 0; a < box.dim; ++a)
    if (box.periodic[static_cast<std::size_t>(a)]) counts[static_cast<std::size_t>(a)] = 2 * nodes_per_axis + 1;
  return boundary_quadrature(QuadGrid(box, counts));
}

namespace {

void check_size(std::size_t expected, const Eigen::VectorXd& c) {
  if (static_cast<std::size_t>(c.size()) != expected)
    throw DimensionMismatch("coefficient vector has length " + std::to_string(c.size()) +
                            ", space dimension is " + std::to_string(expected));
}

}  // namespace

std::vector<double> eval_field(const ScalarSpace& space, const Eigen::VectorXd& coeffs,
                               const std::vector<Vec>& points) {
  check_size(space.size(), coeffs);
  const Eigen::VectorXd v = space.tensor().tabulate(points, 0).value * coeffs;
  return {v.data(), v.data() + v.size()};
}

std::vector<Vec> eval_field(const VelocitySpace& space, const Eigen::VectorXd& coeffs,
                            const std::vector<Vec>& points) {
  check_size(space.size(), coeffs);
  const int d = space.dim();
  std::vector<Vec> out(points.size(), Vec(d));
  for (int c = 0; c < d; ++c) {
    const auto& comp = space.component(c);
    const Eigen::VectorXd v =
        comp.tabulate(points, 0).value *
        coeffs.segment(static_cast<Eigen::Index>(space.offset(c)), static_cast<Eigen::Index>(comp.size()));
    for (std::size_t p = 0; p < points.size(); ++p) out[p][c] = v(static_cast<Eigen::Index>(p));
  }
  return out;
}

std::vector<Vec> grad_field(const ScalarSpace& space, const Eigen::VectorXd& coeffs,
                            const std::vector<Vec>& points) {
  check_size(space.size(), coeffs);
  const int d = space.box().dim;
  const SpaceTables t = space.tensor().tabulate(points, 1);
  std::vector<Vec> out(points.size(), Vec(d));
  for (int a = 0; a < d; ++a) {
    const Eigen::VectorXd g = t.grad[static_cast<std::size_t>(a)] * coeffs;
    for (std::size_t p = 0; p < points.size(); ++p) out[p][a] = g(static_cast<Eigen::Index>(p));
  }
  return out;
}

std::vector<Tensor2> grad_field(const VelocitySpace& space, const Eigen::VectorXd& coeffs,
                                const std::vector<Vec>& points) {
  check_size(space.size(), coeffs);
  const int d = space.dim();
  std::vector<Tensor2> out(points.size(), Tensor2(d));
  for (int i = 0; i < d; ++i) {
    const auto& comp = space.component(i);
    const SpaceTables t = comp.tabulate(points, 1);
    const auto seg = coeffs.segment(static_cast<Eigen::Index>(space.offset(i)),
                                    static_cast<Eigen::Index>(comp.size()));
    for (int j = 0; j < d; ++j) {
      const Eigen::VectorXd g = t.grad[static_cast<std::size_t>(j)] * seg;
      for (std::size_t p = 0; p < points.size(); ++p) out[p](i, j) = g(static_cast<Eigen::Index>(p));
    }
  }
  return out;
}

std::vector<Tensor2> grad2_field(const ScalarSpace& space, const Eigen::VectorXd& coeffs,
                                 const std::vector<Vec>& points) {
  check_size(space.size(), coeffs);
  const int d = space.box().dim;
  const SpaceTables t = space.tensor().tabulate(points, 2);
  std::vector<Tensor2> out(points.size(), Tensor2(d));
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      const Eigen::VectorXd h = t.hess[static_cast<std::size_t>(a * d + b)] * coeffs;
      for (std::size_t p = 0; p < points.size(); ++p) out[p](a, b) = h(static_cast<Eigen::Index>(p));
    }
  return out;
}

std::vector<Tensor3> grad2_field(const VelocitySpace& space, const Eigen::VectorXd& coeffs,
                                 const std::vector<Vec>& points) {
  check_size(space.size(), coeffs);
  const int d = space.dim();
  std::vector<Tensor3> out(points.size(), Tensor3(d));
  for (int i = 0; i < d; ++i) {
    const auto& comp = space.component(i);
    const SpaceTables t = comp.tabulate(points, 2);
    const auto seg = coeffs.segment(static_cast<Eigen::Index>(space.offset(i)),
                                    static_cast<Eigen::Index>(comp.size()));
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k) {
        const Eigen::VectorXd h = t.hess[static_cast<std::size_t>(j * d + k)] * seg;
        for (std::size_t p = 0; p < points.size(); ++p)
          out[p](i, j, k) = h(static_cast<Eigen::Index>(p));
      }
  }
  return out;
}

Eigen::VectorXd project_scalar(const ScalarSpace& space, const QuadGrid& grid,
                               const Eigen::VectorXd& nodal) {
  const Eigen::MatrixXd b = space.tensor().tabulate(grid.points(), 0).value;
  const Eigen::MatrixXd bw = b.transpose() * grid.weights().asDiagonal();
  const Eigen::MatrixXd m = bw * b;
  return m.ldlt().solve(bw * nodal);
}

Eigen::VectorXd project_velocity(const VelocitySpace& space, const QuadGrid& grid,
                                 const std::vector<Vec>& nodal) {
  const int d = space.dim();
  Eigen::VectorXd out(static_cast<Eigen::Index>(space.size()));
  for (int c = 0; c < d; ++c) {
    const auto& comp = space.component(c);
    const Eigen::MatrixXd b = comp.tabulate(grid.points(), 0).value;
    const Eigen::MatrixXd bw = b.transpose() * grid.weights().asDiagonal();
    Eigen::VectorXd f(static_cast<Eigen::Index>(nodal.size()));
    for (std::size_t p = 0; p < nodal.size(); ++p) f(static_cast<Eigen::Index>(p)) = nodal[p][c];
    out.segment(static_cast<Eigen::Index>(space.offset(c)), static_cast<Eigen::Index>(comp.size())) =
        (bw * b).ldlt().solve(bw * f);
  }
  return out;
}

Eigen::VectorXd project_impenetrable(const VelocitySpace& space, const Eigen::VectorXd& raw) {
  const ScalarSpace scalar(space.box(), space.degree());
  const int d = space.dim();
  check_size(scalar.size() * static_cast<std::size_t>(d), raw);
  const QuadGrid grid = QuadGrid::for_degree(space.box(), space.degree(), 3);
  const Eigen::MatrixXd b = scalar.tensor().tabulate(grid.points(), 0).value;
  std::vector<Vec> nodal(grid.size(), Vec(d));
  const auto ns = static_cast<Eigen::Index>(scalar.size());
  for (int c = 0; c < d; ++c) {
    const Eigen::VectorXd v = b * raw.segment(c * ns, ns);
    for (std::size_t p = 0; p < grid.size(); ++p) nodal[p][c] = v(static_cast<Eigen::Index>(p));
  }
  return project_velocity(space, grid, nodal);
}

namespace {

Eigen::VectorXd embed_tensor(const TensorSpace& from, const TensorSpace& to,
                             const Eigen::VectorXd& c) {
  const int d = from.dim();
  if (to.dim() != d) throw DimensionMismatch("embed: dimensions differ");
  std::array<int, 3> nf{1, 1, 1}, nt{1, 1, 1};
  for (int a = 0; a < d; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    if (from.axis(a).kind() != to.axis(a).kind() || from.axis(a).size() > to.axis(a).size())
      throw DimensionMismatch("embed: target space does not contain the source space");
    nf[ua] = from.axis(a).size();
    nt[ua] = to.axis(a).size();
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(to.size()));
  Eigen::Index src = 0;
  for (int m0 = 0; m0 < nf[0]; ++m0)
    for (int m1 = 0; m1 < nf[1]; ++m1)
      for (int m2 = 0; m2 < nf[2]; ++m2, ++src)
        out((m0 * nt[1] + m1) * nt[2] + m2) = c(src);
  return out;
}

}  // namespace

Eigen::VectorXd embed(const ScalarSpace& from, const ScalarSpace& to, const Eigen::VectorXd& c) {
  check_size(from.size(), c);
  return embed_tensor(from.tensor(), to.tensor(), c);
}

Eigen::VectorXd embed(const VelocitySpace& from, const VelocitySpace& to,
                      const Eigen::VectorXd& c) {
  check_size(from.size(), c);
  if (from.dim() != to.dim()) throw DimensionMismatch("embed: dimensions differ");
  Eigen::VectorXd out(static_cast<Eigen::Index>(to.size()));
  for (int i = 0; i < from.dim(); ++i) {
    const auto& cf = from.component(i);
    const auto& ct = to.component(i);
    out.segment(static_cast<Eigen::Index>(to.offset(i)), static_cast<Eigen::Index>(ct.size())) =
        embed_tensor(cf, ct,
                     c.segment(static_cast<Eigen::Index>(from.offset(i)),
                               static_cast<Eigen::Index>(cf.size())));
  }
  return out;
}

}  // namespace eulergel
