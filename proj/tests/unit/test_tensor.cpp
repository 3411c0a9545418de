#include <doctest.h>

#include "eulergel/errors.hpp"
#include "eulergel/tensor.hpp"
#include "helpers.hpp"

using namespace eulergel;
using testing::max_abs_diff;

TEST_SUITE("tensor") {

TEST_CASE("det of simple matrices") {
  CHECK(det(Tensor2::identity(3)) == doctest::Approx(1.0));
  CHECK(det(Tensor2::diag({2, 3})) == doctest::Approx(6.0));
}

TEST_CASE("det matches cofactor expansion") {
  std::mt19937_64 rng(11);
  for (int d = 1; d <= 3; ++d)
    for (int k = 0; k < 50; ++k) {
      const Tensor2 a = testing::random_tensor(rng, d);
      CHECK(det(a) == doctest::Approx(oracle::det_cofactor(testing::to_mat(a))).epsilon(1e-12));
    }
}

TEST_CASE("cofactor") {
  CHECK(max_abs_diff(cof(Tensor2::identity(2)), Tensor2::identity(2)) == 0.0);
  const Tensor2 a{{1, 2}, {3, 4}};
  CHECK(max_abs_diff(cof(a), Tensor2{{4, -3}, {-2, 1}}) == 0.0);

  std::mt19937_64 rng(12);
  for (int k = 0; k < 50; ++k) {
    const Tensor2 m = testing::random_tensor(rng, 3);
    const Tensor2 via_cof = (1.0 / det(m)) * cof(m).transpose();
    const Tensor2 ref = testing::from_mat(oracle::inverse_gauss_jordan(testing::to_mat(m)));
    CHECK(max_abs_diff(via_cof, ref) <= 1e-9 * std::max(1.0, ref.norm()));
  }
}

TEST_CASE("inverse") {
  CHECK(max_abs_diff(inv(Tensor2::identity(3)), Tensor2::identity(3)) == 0.0);
  CHECK(max_abs_diff(inv(Tensor2::diag({2, 4})), Tensor2::diag({0.5, 0.25})) <= 1e-15);
  CHECK_THROWS_AS(inv(Tensor2{{1, 2}, {2, 4}}), SingularMatrix);
}

TEST_CASE("sym and skew") {
  const Tensor2 s{{1, 2}, {2, 5}};
  CHECK(max_abs_diff(sym(s), s) == 0.0);
  const Tensor2 w{{0, 3}, {-3, 0}};
  CHECK(sym(w).norm() == 0.0);
  std::mt19937_64 rng(13);
  const Tensor2 g = testing::random_tensor(rng, 3);
  Tensor2 ref(3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) ref(i, j) = 0.5 * (g(i, j) + g(j, i));
  CHECK(max_abs_diff(sym(g), ref) <= 1e-16);
  CHECK(max_abs_diff(sym(g) + skew(g), g) <= 1e-15);
}

TEST_CASE("jacobi rate") {
  const Tensor2 f{{1.2, 0.1}, {0.3, 0.9}};
  CHECK(jacobi_rate(f, Tensor2(2)) == 0.0);
  const double alpha = 0.7;
  CHECK(jacobi_rate(Tensor2::identity(2), alpha * Tensor2::identity(2)) ==
        doctest::Approx(2 * alpha));

  std::mt19937_64 rng(14);
  for (int k = 0; k < 20; ++k) {
    const Tensor2 ff = testing::random_deformation(rng, 3, 0.5, 2.0);
    const Tensor2 gv = testing::random_tensor(rng, 3);
    const double fd = oracle::central_diff([&](double h) { return det(ff + h * (gv * ff)); }, 0.0, 1e-4);
    CHECK(jacobi_rate(ff, gv) == doctest::Approx(fd).epsilon(1e-8));
  }
}

TEST_CASE("inverse flow rate") {
  const Tensor2 a{{0.2, -0.4}, {0.1, 0.3}};
  CHECK(inverse_flow_rate(Tensor2::identity(2), Tensor2(2)).norm() == 0.0);
  CHECK(max_abs_diff(inverse_flow_rate(Tensor2::identity(2), a), -1.0 * a) == 0.0);

  // Joint RK4 integration of F' = A F and G' = -G A from F = G = I.
  Tensor2 f = Tensor2::identity(2), g = Tensor2::identity(2);
  const double dt = 1e-3;
  for (int n = 0; n < 1000; ++n) {
    auto rhs_f = [&](const Tensor2& x) { return a * x; };
    auto rhs_g = [&](const Tensor2& x) { return inverse_flow_rate(x, a); };
    const Tensor2 k1 = rhs_f(f), l1 = rhs_g(g);
    const Tensor2 k2 = rhs_f(f + 0.5 * dt * k1), l2 = rhs_g(g + 0.5 * dt * l1);
    const Tensor2 k3 = rhs_f(f + 0.5 * dt * k2), l3 = rhs_g(g + 0.5 * dt * l2);
    const Tensor2 k4 = rhs_f(f + dt * k3), l4 = rhs_g(g + dt * l3);
    f += (dt / 6) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    g += (dt / 6) * (l1 + 2.0 * l2 + 2.0 * l3 + l4);
  }
  CHECK((f * g - Tensor2::identity(2)).norm() <= 1e-8);
}

TEST_CASE("third-order contraction") {
  Tensor3 t(2);
  t(0, 1, 1) = 3.0;
  t(1, 0, 0) = 4.0;
  CHECK(t.norm() == doctest::Approx(5.0));
}

}
