#include "hypersub/errors.hpp"
#include "hypersub/exterior.hpp"
#include "hypersub/model_space.hpp"
#include "hypersub/rng.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace hypersub;
using hypersub::test::vec;

namespace {

Form dx(int i) {
  return Form(1, [i](const Vec&, std::span<const Vec> v) { return v[0][i]; });
}

VectorField constant_field(Vec v) {
  return VectorField([v](const Vec&) { return v; });
}

// H^1 frame X_1 = d_x - y/2 d_z, X_2 = d_y + x/2 d_z, written out by hand.
VectorField h1_x1() {
  return VectorField([](const Vec& q) { return vec({1.0, 0.0, -0.5 * q[1]}); });
}
VectorField h1_x2() {
  return VectorField([](const Vec& q) { return vec({0.0, 1.0, 0.5 * q[0]}); });
}

}  // namespace

TEST_CASE("dx ^ dy on the coordinate basis") {
  const Form w = wedge(dx(0), dx(1));
  const Vec o = vec({0.0, 0.0});
  const std::vector<Vec> exey{vec({1.0, 0.0}), vec({0.0, 1.0})};
  const std::vector<Vec> eyex{vec({0.0, 1.0}), vec({1.0, 0.0})};
  CHECK(w(o, exey) == doctest::Approx(1.0));
  CHECK(w(o, eyex) == doctest::Approx(-1.0));
}

TEST_CASE("wrong vector count is an argument error") {
  const Form w = wedge(dx(0), dx(1));
  const std::vector<Vec> one{vec({1.0, 0.0})};
  CHECK_THROWS_AS(w(vec({0.0, 0.0}), one), ArgumentError);
}

TEST_CASE("tangents at another point are rejected") {
  const Form a = dx(0);
  const Point p{vec({0.0, 0.0})};
  const std::vector<Tangent> t{{Point{vec({1.0, 0.0})}, vec({1.0, 0.0})}};
  CHECK_THROWS(a.evaluate(p, t));
}

TEST_CASE("wedge of random 1-forms is alternating and multilinear") {
  RngStream rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int D = 4;
    std::vector<Vec> coef(3), v(3);
    for (int i = 0; i < 3; ++i) {
      coef[i] = test::random_vec(rng, D);
      v[i] = test::random_vec(rng, D);
    }
    std::vector<Form> forms;
    for (const Vec& c : coef) forms.push_back(Form(1, [c](const Vec&, std::span<const Vec> w) { return c.dot(w[0]); }));
    const Form w = wedge(forms);
    const Vec base = Vec::Zero(D);
    // Oracle: determinant of the pairing matrix.
    Mat P(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) P(i, j) = coef[i].dot(v[j]);
    CHECK(w(base, v) == doctest::Approx(P.determinant()).epsilon(1e-12));
    std::vector<Vec> swapped{v[1], v[0], v[2]};
    CHECK(w(base, swapped) == doctest::Approx(-w(base, v)).epsilon(1e-12));
    std::vector<Vec> repeated{v[0], v[0], v[2]};
    CHECK(std::abs(w(base, repeated)) < 1e-12);
    std::vector<Vec> scaled{2.5 * v[0], v[1], v[2]};
    CHECK(w(base, scaled) == doctest::Approx(2.5 * w(base, v)).epsilon(1e-12));
  }
}

TEST_CASE("interior product of dx with d/dx") {
  const Point p{vec({0.3, -1.2})};
  CHECK(interior_product(dx(0), constant_field(vec({1.0, 0.0})), p, {}) == doctest::Approx(1.0));
}

TEST_CASE("contact form of H^n kills D") {
  for (int n = 1; n <= 3; ++n) {
    const ModelSpace ms = ModelSpace::heisenberg(n);
    RngStream rng(3);
    for (int i = 0; i < 20; ++i) {
      const Point p = sample_point(ms, rng);
      const Mat F = ms.horizontal_frame(p.coords);
      const Form w = contact_form(ms);
      for (int j = 0; j < F.cols(); ++j) {
        const std::vector<Vec> v{F.col(j)};
        CHECK(std::abs(w(p.coords, v)) < 1e-12);
      }
    }
  }
}

TEST_CASE("exterior derivative of the H^n contact form") {
  for (int n = 1; n <= 3; ++n) {
    const ModelSpace ms = ModelSpace::heisenberg(n);
    const CovectorField a([ms](const Vec& x) { return ms.omega(x); });
    const Form d = exterior_derivative(a);
    RngStream rng(5);
    for (int t = 0; t < 10; ++t) {
      const Vec x = sample_point(ms, rng).coords;
      const Vec v = test::random_vec(rng, ms.ambient_dim());
      const Vec w = test::random_vec(rng, ms.ambient_dim());
      // sum_m dx_{2m-1} ^ dx_{2m}
      double expected = 0.0;
      for (int m = 0; m < n; ++m) expected += v[2 * m] * w[2 * m + 1] - v[2 * m + 1] * w[2 * m];
      const std::vector<Vec> vw{v, w};
      CHECK(d(x, vw) == doctest::Approx(expected).epsilon(1e-8));
    }
  }
}

TEST_CASE("d of a closed form vanishes") {
  const CovectorField a([](const Vec&) { return vec({1.0, 0.0, 0.0}); });
  const Form d = exterior_derivative(a);
  const std::vector<Vec> vw{vec({1.0, 2.0, 3.0}), vec({-1.0, 0.5, 2.0})};
  CHECK(std::abs(d(vec({0.4, 0.1, -2.0}), vw)) < 1e-12);
}

TEST_CASE("(d omega)^2 on the H^2 orthonormal D-frame") {
  const ModelSpace ms = ModelSpace::heisenberg(2);
  const Form p = wedge_power(ms.contact_data().d_omega, 2);
  RngStream rng(11);
  for (int t = 0; t < 10; ++t) {
    const Vec x = sample_point(ms, rng).coords;
    const Mat F = ms.horizontal_frame(x);
    std::vector<Vec> cols;
    for (int j = 0; j < 4; ++j) cols.push_back(F.col(j));
    CHECK(std::abs(p(x, cols)) == doctest::Approx(2.0).epsilon(1e-10));
  }
}

TEST_CASE("Lie brackets") {
  const Point p{vec({0.7, -0.4, 1.3})};
  SUBCASE("coordinate fields commute") {
    const Tangent b = lie_bracket(constant_field(vec({1.0, 0.0, 0.0})), constant_field(vec({0.0, 1.0, 0.0})), p);
    CHECK(b.components.norm() < 1e-12);
  }
  SUBCASE("[X1, X2] is vertical on H^1") {
    const Tangent b = lie_bracket(h1_x1(), h1_x2(), p);
    CHECK(test::max_abs_diff(b.components, vec({0.0, 0.0, 1.0})) < 1e-8);
  }
  SUBCASE("analytic Jacobians agree with FD") {
    const VectorField X1([](const Vec& q) { return vec({1.0, 0.0, -0.5 * q[1]}); },
                         [](const Vec&) {
                           Mat J = Mat::Zero(3, 3);
                           J(2, 1) = -0.5;
                           return J;
                         });
    const VectorField X2([](const Vec& q) { return vec({0.0, 1.0, 0.5 * q[0]}); },
                         [](const Vec&) {
                           Mat J = Mat::Zero(3, 3);
                           J(2, 0) = 0.5;
                           return J;
                         });
    CHECK(test::max_abs_diff(lie_bracket(X1, X2, p).components, vec({0.0, 0.0, 1.0})) < 1e-14);
  }
}

TEST_CASE("random brackets are antisymmetric") {
  RngStream rng(13);
  for (int t = 0; t < 20; ++t) {
    const Mat A = test::random_mat(rng, 3, 3), B = test::random_mat(rng, 3, 3);
    const VectorField X([A](const Vec& q) { return Vec(A * q.cwiseProduct(q)); });
    const VectorField Y([B](const Vec& q) { return Vec(B * q); });
    const Point p{test::random_vec(rng, 3)};
    // Oracle: [X,Y] = J_Y X - J_X Y with J_X = 2 A diag(q), J_Y = B.
    const Vec expected = B * X(p.coords) - 2.0 * A * p.coords.asDiagonal() * Y(p.coords);
    CHECK(test::max_abs_diff(lie_bracket(X, Y, p).components, expected) < 1e-7);
    CHECK(test::max_abs_diff(lie_bracket(Y, X, p).components, -expected) < 1e-7);
  }
}

TEST_CASE("directional derivatives") {
  const VectorField e1 = constant_field(vec({1.0, 0.0}));
  const Point p{vec({0.6, 0.2})};
  CHECK(directional_derivative(ScalarField([](const Vec& x) { return x[0]; }), e1, p, 1) == doctest::Approx(1.0));
  CHECK(directional_derivative(ScalarField([](const Vec& x) { return x[0] * x[0]; }), e1, p, 2) ==
        doctest::Approx(2.0));
  CHECK_THROWS_AS(directional_derivative(ScalarField([](const Vec& x) { return x[0]; }), e1, p, 3), ArgumentError);
}
