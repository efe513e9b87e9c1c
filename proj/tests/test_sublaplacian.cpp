#include "hypersub/errors.hpp"
#include "hypersub/sublaplacian.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

using namespace hypersub;
using hypersub::test::vec;

namespace {

std::vector<ModelHypersurface> surfaces() {
  std::vector<ModelHypersurface> out;
  for (int n = 1; n <= 2; ++n) {
    out.emplace_back(ModelSpace::heisenberg(n));
    for (double k : {0.5, 1.0, 2.0}) {
      out.emplace_back(ModelSpace::sphere(n, k));
      out.emplace_back(ModelSpace::anti_de_sitter(n, k));
    }
  }
  return out;
}

Vec at_radius(const ModelHypersurface& hs, double r, RngStream& rng) {
  return hs.point_at(r, test::random_direction(rng, hs.dim()));
}

}  // namespace

TEST_CASE("horizontal gradient") {
  SUBCASE("of a constant") {
    for (const ModelHypersurface& hs : surfaces()) {
      RngStream rng(41);
      const Point p{at_radius(hs, 0.8, rng)};
      CHECK(horizontal_gradient(hs, constant_function(hs, 3.0).field, p).components.norm() == 0.0);
    }
  }
  SUBCASE("of r on H^n is the unit radial field") {
    for (int n = 1; n <= 3; ++n) {
      const ModelHypersurface hs(ModelSpace::heisenberg(n));
      RngStream rng(42);
      for (int t = 0; t < 20; ++t) {
        const Point p{at_radius(hs, rng.uniform(0.2, 2.5), rng)};
        const TestFunction r = radial_power(hs, 1.0);
        const Vec g = horizontal_gradient(hs, r.field, p).components;
        Vec R = Vec::Zero(2 * n + 1);
        R.head(2 * n) = p.coords.head(2 * n).normalized();
        CHECK(test::max_abs_diff(g, R) < 1e-12);
        CHECK(test::max_abs_diff(g, hs.radial_field(p.coords)) < 1e-12);
      }
    }
  }
  SUBCASE("of a coordinate equals the W-projection of its Euclidean gradient") {
    for (const ModelHypersurface& hs : surfaces()) {
      RngStream rng(43);
      const Point p{at_radius(hs, 0.9, rng)};
      const Mat Y = horizontal_frame(hs, p).vectors;
      const Mat G = hs.space().fibre_metric_matrix();
      for (int j = 0; j < hs.ambient_dim(); ++j) {
        const Vec g = horizontal_gradient(hs, coordinate_function(hs, j).field, p).components;
        // Oracle: grad_S f = sum_i (Y_i f) Y_i.
        const Vec oracle = Y * Y.row(j).transpose();
        CHECK(test::max_abs_diff(g, oracle) < 1e-12 * (1.0 + p.coords.squaredNorm()));
        // and it is the unique W-vector with g(grad, Y) = df(Y)
        CHECK((Y.transpose() * G * g - Y.row(j).transpose()).cwiseAbs().maxCoeff() < 1e-11);
      }
    }
  }
}

TEST_CASE("divergence") {
  SUBCASE("H^2: div R at r = 2 is 2") {
    const ModelHypersurface h2(ModelSpace::heisenberg(2));
    RngStream rng(44);
    const Point p{at_radius(h2, 2.0, rng)};
    const SurfaceField R = [&h2](const Vec& x) { return h2.radial_field(x); };
    CHECK(divergence_mu(h2, R, p) == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(h2.radial_divergence(2.0) == 2.0);
  }
  SUBCASE("H^2: div U_1 = 4/|x|") {
    const ModelHypersurface h2(ModelSpace::heisenberg(2));
    const SurfaceField U1 = [](const Vec& x) { return Vec(heisenberg2_frame(x).col(0)); };
    CHECK(divergence_mu(h2, U1, Point{vec({1.0, -1.0, 1.0, 1.0, 0.0})}) == doctest::Approx(2.0).epsilon(1e-8));
  }
  SUBCASE("sphere: div R at r = pi/(4k) is 2nk") {
    for (int n = 1; n <= 2; ++n)
      for (double k : {0.5, 1.0, 2.0}) {
        const ModelHypersurface s(ModelSpace::sphere(n, k));
        RngStream rng(45);
        const double r = std::numbers::pi / (4.0 * k);
        const SurfaceField R = [&s](const Vec& x) { return s.radial_field(x); };
        CHECK(divergence_mu(s, R, Point{at_radius(s, r, rng)}) == doctest::Approx(2.0 * n * k).epsilon(1e-7));
        CHECK(s.radial_divergence(r) == doctest::Approx(2.0 * n * k).epsilon(1e-14));
      }
  }
  SUBCASE("closed forms over random radii") {
    for (const ModelHypersurface& hs : surfaces()) {
      RngStream rng(46);
      const SurfaceField R = [&hs](const Vec& x) { return hs.radial_field(x); };
      for (int t = 0; t < 10; ++t) {
        const double r = rng.uniform(0.2, std::min(3.0, hs.r_max() - 0.2));
        CHECK(divergence_mu(hs, R, Point{at_radius(hs, r, rng)}) == doctest::Approx(hs.radial_divergence(r)).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("sub-Laplacian") {
  SUBCASE("constants are harmonic") {
    for (const ModelHypersurface& hs : surfaces()) {
      RngStream rng(47);
      const Point p{at_radius(hs, 0.7, rng)};
      for (Method m : {Method::DivGrad, Method::FrameFormula})
        CHECK(std::abs(sublaplacian_apply(hs, constant_function(hs, 2.0).field, p, m).value) < 1e-12);
    }
  }
  SUBCASE("r^(1-2n) is harmonic on H^n") {
    for (int n = 1; n <= 2; ++n) {
      const ModelHypersurface hs(ModelSpace::heisenberg(n));
      const TestFunction f = radial_power(hs, 1.0 - 2.0 * n);
      RngStream rng(48);
      for (int t = 0; t < 20; ++t) {
        const Point p{at_radius(hs, rng.uniform(0.5, 2.5), rng)};
        CHECK(std::abs(sublaplacian_apply(hs, f.field, p, Method::DivGrad).value) < 1e-6);
        CHECK(std::abs(sublaplacian_apply(hs, f.field, p, Method::FrameFormula).value) < 1e-6);
      }
    }
  }
  SUBCASE("radial functions: f'' + div(R) f'") {
    for (const ModelHypersurface& hs : surfaces()) {
      const TestFunction f = radial_function(
          hs, "sin", [](double r) { return std::sin(r); }, [](double r) { return std::cos(r); });
      RngStream rng(49);
      for (int t = 0; t < 5; ++t) {
        const double r = rng.uniform(0.3, std::min(2.5, hs.r_max() - 0.3));
        const double expected = -std::sin(r) + hs.radial_divergence(r) * std::cos(r);
        CHECK(sublaplacian_apply(hs, f.field, Point{at_radius(hs, r, rng)}, Method::DivGrad).value ==
              doctest::Approx(expected).epsilon(1e-6));
      }
    }
  }
  SUBCASE("H^2 closed form against div-grad") {
    const ModelHypersurface h2(ModelSpace::heisenberg(2));
    RngStream rng(50);
    for (int v = 0; v < 3; ++v) {
      const TestFunction f = bump_function(h2, v);
      for (int t = 0; t < 20; ++t) {
        const Point p{at_radius(h2, rng.uniform(0.3, 3.0), rng)};
        const double a = sublaplacian_apply(h2, f.field, p, Method::DivGrad).value;
        const double b = sublaplacian_apply(h2, f.field, p, Method::ClosedForm).value;
        CHECK(std::abs(a - b) < 1e-6);
      }
    }
    CHECK_THROWS_AS(sublaplacian_apply(ModelHypersurface(ModelSpace::heisenberg(1)), constant_function(h2, 1.0).field,
                                       Point{vec({1.0, 0.0, 0.0})}, Method::ClosedForm),
                    UnsupportedError);
  }
  SUBCASE("div-grad and frame formula agree") {
    for (const ModelHypersurface& hs : surfaces()) {
      RngStream rng(51);
      for (int v = 0; v < 3; ++v) {
        const TestFunction f = bump_function(hs, v);
        for (int t = 0; t < 5; ++t) {
          const Point p{at_radius(hs, rng.uniform(0.2, std::min(3.0, hs.r_max() - 0.2)), rng)};
          const double a = sublaplacian_apply(hs, f.field, p, Method::DivGrad).value;
          const double b = sublaplacian_apply(hs, f.field, p, Method::FrameFormula).value;
          CHECK(std::abs(a - b) < 1e-6);
        }
      }
    }
  }
  SUBCASE("characteristic points are rejected") {
    const ModelHypersurface h1(ModelSpace::heisenberg(1));
    CHECK_THROWS_AS(sublaplacian_apply(h1, bump_function(h1, 0).field, Point{Vec::Zero(3)}, Method::DivGrad),
                    SingularityError);
  }
}

TEST_CASE("Riemannian approximations") {
  SUBCASE("eps n! mu_eps -> mu") {
    for (const ModelHypersurface& hs : surfaces()) {
      RngStream rng(52);
      const Vec x = at_radius(hs, std::min(1.0, 0.5 * hs.r_max()), rng);
      const WorkingChart wc = WorkingChart::around(hs, x);
      const Vec c = wc.from_ambient(x);
      const double mu = wc.density(c);
      std::vector<double> gaps;
      for (double eps : {0.1, 0.01, 0.001}) {
        const double d = induced_volume_eps_density(hs, wc, c, eps);
        CHECK(induced_volume_eps_direct(hs, wc, c, eps) == doctest::Approx(d).epsilon(1e-8));
        gaps.push_back(std::abs(eps * factorial(hs.n()) * d - mu));
      }
      // Exact up to round-off on the Heisenberg slice.
      const double floor = 1e-12 * mu;
      CHECK((gaps[1] < gaps[0] || gaps[1] < floor));
      CHECK((gaps[2] < gaps[1] || gaps[2] < floor));
      CHECK(gaps[2] < 1e-4 * mu);
    }
  }
  SUBCASE("g_eps(Z, Z) = 1/eps^2 where X0 u = 0") {
    // Sphere equator: x_{2n+1} = 0, so the u-component of X0 vanishes.
    const ModelHypersurface s(ModelSpace::sphere(1, 1.0));
    const Vec x = vec({0.6, 0.8, 0.0, 0.0});
    CHECK(std::abs(s.space().reeb(x)[3]) < 1e-15);
    for (double eps : {0.5, 0.1})
      CHECK(reeb_tangential_norm2(s, x, eps) == doctest::Approx(1.0 / (eps * eps)).epsilon(1e-12));
  }
  SUBCASE("frame expansion and coordinate Laplace-Beltrami agree") {
    for (const ModelHypersurface& hs : surfaces()) {
      RngStream rng(53);
      const TestFunction f = bump_function(hs, 1);
      const Point p{at_radius(hs, std::min(1.2, 0.5 * hs.r_max()), rng)};
      for (double eps : {0.4, 0.1}) {
        const double a = laplace_beltrami_eps_apply(hs, f.field, p, eps, LbMethod::FrameExpansion);
        const double b = laplace_beltrami_eps_apply(hs, f.field, p, eps, LbMethod::Coordinate);
        CHECK(a == doctest::Approx(b).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("convergence study") {
  const ModelHypersurface h1(ModelSpace::heisenberg(1));
  const std::vector<Vec> grid = make_grid(h1, 40, 0.2, 3.2, 7);
  SUBCASE("bump on H^1") {
    const ConvergenceReport rep = convergence_study(h1, bump_function(h1, 1), grid, default_eps_schedule());
    CHECK(rep.strictly_decreasing);
    CHECK(rep.fitted_order >= 1.5);
    // eps = 0.05 beats eps = 0.1 at every grid point (outside the support both are round-off)
    for (std::size_t i = 0; i < grid.size(); ++i)
      CHECK(std::abs(rep.approx[3][i] - rep.reference[i]) <= std::abs(rep.approx[2][i] - rep.reference[i]) + 1e-12);
  }
  SUBCASE("constant function") {
    const ConvergenceReport rep = convergence_study(h1, constant_function(h1, 1.0), grid, default_eps_schedule());
    for (double e : rep.sup_errors) CHECK(e < 1e-12);
  }
  SUBCASE("bad schedules") {
    const TestFunction f = bump_function(h1, 0);
    CHECK_THROWS_AS(convergence_study(h1, f, grid, {0.1}), ArgumentError);
    CHECK_THROWS_AS(convergence_study(h1, f, grid, {0.1, 0.2}), ArgumentError);
    CHECK_THROWS_AS(convergence_study(h1, f, {vec({0.05, 0.0, 0.0})}, {0.2, 0.1}), ArgumentError);
  }
  SUBCASE("fitted order of an exact power law") {
    const std::vector<double> eps{0.4, 0.2, 0.1};
    CHECK(fitted_order(eps, {0.16, 0.04, 0.01}) == doctest::Approx(2.0).epsilon(1e-12));
  }
}
