#include "hypersub/errors.hpp"
#include "hypersub/model_space.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace hypersub;
using hypersub::test::vec;

namespace {

std::vector<ModelSpace> sweep() {
  std::vector<ModelSpace> out;
  for (int n = 1; n <= 3; ++n) out.push_back(ModelSpace::heisenberg(n));
  for (int n = 1; n <= 2; ++n)
    for (double k : {0.5, 1.0, 2.0}) {
      out.push_back(ModelSpace::sphere(n, k));
      out.push_back(ModelSpace::anti_de_sitter(n, k));
    }
  return out;
}

// k sum_m (x_{2m-1} d_{2m} - x_{2m} d_{2m-1}) over all n+1 planes.
Vec sphere_xhat0(const Vec& x, double k) {
  Vec v = Vec::Zero(x.size());
  for (int m = 0; 2 * m + 1 < x.size(); ++m) {
    v[2 * m + 1] = k * x[2 * m];
    v[2 * m] = -k * x[2 * m + 1];
  }
  return v;
}

std::vector<Vec> columns(const Mat& F) {
  std::vector<Vec> out;
  for (int j = 0; j < F.cols(); ++j) out.push_back(F.col(j));
  return out;
}

}  // namespace

TEST_CASE("family names") {
  CHECK(parse_family("heisenberg") == Family::Heisenberg);
  CHECK(parse_family("sphere") == Family::Sphere);
  CHECK(parse_family("ads") == Family::AntiDeSitter);
  CHECK(parse_family("anti-de-sitter") == Family::AntiDeSitter);
  CHECK_THROWS_AS(parse_family("torus"), ArgumentError);
  CHECK_THROWS_AS(ModelSpace::sphere(1, -1.0), ArgumentError);
  CHECK_THROWS_AS(ModelSpace::heisenberg(4), ArgumentError);
}

TEST_CASE("contact form values") {
  const ModelSpace h2 = ModelSpace::heisenberg(2);
  const Vec p = vec({0.3, 2.0, -0.5, 0.1, 0.7});
  CHECK(h2.omega(p, Vec::Unit(5, 0)) == doctest::Approx(-1.0));
  for (int n = 1; n <= 3; ++n) {
    const ModelSpace ms = ModelSpace::heisenberg(n);
    CHECK(ms.omega(Vec::Zero(ms.ambient_dim()), -Vec::Unit(ms.ambient_dim(), 2 * n)) == doctest::Approx(1.0));
  }
  for (double k : {0.5, 1.0, 2.0}) {
    const ModelSpace s = ModelSpace::sphere(2, k);
    RngStream rng(1);
    for (int t = 0; t < 20; ++t) {
      const Vec x = sample_point(s, rng).coords;
      CHECK(s.omega(x, sphere_xhat0(x, k)) == doctest::Approx(1.0 / (2.0 * k)).epsilon(1e-12));
    }
  }
}

TEST_CASE("fibre metric") {
  SUBCASE("H^n frame is orthonormal") {
    for (int n = 1; n <= 3; ++n) {
      const ModelSpace ms = ModelSpace::heisenberg(n);
      const Vec x = Vec::LinSpaced(ms.ambient_dim(), -1.0, 1.5);
      // X_{2m-1} = d_{2m-1} - x_{2m}/2 d_z, X_{2m} = d_{2m} + x_{2m-1}/2 d_z
      Mat F = Mat::Zero(ms.ambient_dim(), 2 * n);
      for (int m = 0; m < n; ++m) {
        F(2 * m, 2 * m) = 1.0;
        F(2 * m + 1, 2 * m + 1) = 1.0;
        F(2 * n, 2 * m) = -0.5 * x[2 * m + 1];
        F(2 * n, 2 * m + 1) = 0.5 * x[2 * m];
      }
      const Mat gram = F.transpose() * ms.fibre_metric_matrix() * F;
      CHECK((gram - Mat::Identity(2 * n, 2 * n)).norm() < 1e-14);
      for (int j = 0; j < 2 * n; ++j) CHECK(std::abs(ms.omega(x, F.col(j))) < 1e-14);
      CHECK((ms.horizontal_cometric(x) - F * F.transpose()).norm() < 1e-14);
    }
  }
  SUBCASE("sphere: g(Xhat0, Xhat0) = 1") {
    for (double k : {0.5, 1.0, 2.0}) {
      const ModelSpace s = ModelSpace::sphere(1, k);
      RngStream rng(2);
      const Vec x = sample_point(s, rng).coords;
      const Vec v = sphere_xhat0(x, k);
      CHECK(s.fibre_metric(v, v) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  SUBCASE("AdS: eta(X0, X0) = -4k^4") {
    for (double k : {0.5, 1.0, 2.0}) {
      const ModelSpace a = ModelSpace::anti_de_sitter(2, k);
      RngStream rng(3);
      for (int t = 0; t < 10; ++t) {
        const Vec x = sample_point(a, rng).coords;
        const Vec X0 = a.reeb(x);
        const double eta = X0.head(4).squaredNorm() - X0.tail(2).squaredNorm();
        CHECK(eta == doctest::Approx(-4.0 * std::pow(k, 4)).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("Reeb fields") {
  SUBCASE("H^n: X0 = -d_z") {
    const ModelSpace ms = ModelSpace::heisenberg(2);
    CHECK(test::max_abs_diff(ms.reeb(vec({1.0, 2.0, 3.0, 4.0, 5.0})), vec({0, 0, 0, 0, -1.0})) == 0.0);
  }
  SUBCASE("AdS closed form") {
    const double k = 0.7;
    const ModelSpace a = ModelSpace::anti_de_sitter(2, k);
    RngStream rng(4);
    const Vec x = sample_point(a, rng).coords;
    // 2k^2 (x5 d6 - x6 d5 - sum_m (x_{2m-1} d_{2m} - x_{2m} d_{2m-1}))
    Vec expected = Vec::Zero(6);
    expected[5] = x[4];
    expected[4] = -x[5];
    for (int m = 0; m < 2; ++m) {
      expected[2 * m + 1] -= x[2 * m];
      expected[2 * m] += x[2 * m + 1];
    }
    expected *= 2.0 * k * k;
    CHECK(test::max_abs_diff(a.reeb(x), expected) < 1e-14);
  }
  SUBCASE("sphere: X0 = 2k Xhat0") {
    const double k = 1.7;
    const ModelSpace s = ModelSpace::sphere(2, k);
    RngStream rng(5);
    const Vec x = sample_point(s, rng).coords;
    CHECK(test::max_abs_diff(s.reeb(x), 2.0 * k * sphere_xhat0(x, k)) < 1e-14);
  }
  SUBCASE("residuals over the whole sweep") {
    for (const ModelSpace& ms : sweep()) {
      RngStream rng(6);
      for (int t = 0; t < 200; ++t) {
        const ReebResidual r = reeb_residual(ms, sample_point(ms, rng).coords);
        CHECK(r.omega_defect <= 1e-9);
        CHECK(r.d_omega_defect <= 1e-7);
      }
    }
  }
}

TEST_CASE("ambient volume") {
  SUBCASE("H^1 coordinate value") {
    const ModelSpace ms = ModelSpace::heisenberg(1);
    const Form Om = ambient_volume(ms);
    const std::vector<Vec> e{Vec::Unit(3, 0), Vec::Unit(3, 1), Vec::Unit(3, 2)};
    CHECK(Om(vec({0.2, 0.4, -1.0}), e) == doctest::Approx(-1.0));
  }
  SUBCASE("H^n: Omega(X_1..X_2n, eps X0) = eps n!") {
    for (int n = 1; n <= 3; ++n) {
      const ModelSpace ms = ModelSpace::heisenberg(n);
      const Form Om = ambient_volume(ms);
      RngStream rng(7);
      const Vec x = sample_point(ms, rng).coords;
      // Closed-form frame in its natural order, not the pivoted one.
      Mat F = Mat::Zero(ms.ambient_dim(), 2 * n);
      for (int m = 0; m < n; ++m) {
        F(2 * m, 2 * m) = 1.0;
        F(2 * m + 1, 2 * m + 1) = 1.0;
        F(2 * n, 2 * m) = -0.5 * x[2 * m + 1];
        F(2 * n, 2 * m + 1) = 0.5 * x[2 * m];
      }
      for (double eps : {1.0, 0.1}) {
        std::vector<Vec> v = columns(F);
        v.push_back(eps * ms.reeb(x));
        CHECK(Om(x, v) == doctest::Approx(eps * factorial(n)).epsilon(1e-12));
      }
    }
  }
  SUBCASE("sphere: Omega(D-frame, Xhat0) = n! omega(Xhat0) = n!/(2k)") {
    for (int n = 1; n <= 2; ++n)
      for (double k : {0.5, 1.0, 2.0}) {
        const ModelSpace s = ModelSpace::sphere(n, k);
        const Form Om = ambient_volume(s);
        RngStream rng(8);
        const Vec x = sample_point(s, rng).coords;
        std::vector<Vec> v = columns(s.horizontal_frame(x));
        v.push_back(sphere_xhat0(x, k));
        const double dn = wedge_power(s.contact_data().d_omega, n)(x, std::span<const Vec>(v.data(), 2 * n));
        // Orient the frame so that (d omega)^n is positive on it.
        CHECK(std::abs(Om(x, v)) == doctest::Approx(factorial(n) / (2.0 * k)).epsilon(1e-10));
        CHECK(Om(x, v) * dn > 0.0);
      }
  }
  SUBCASE("eps n! Omega_eps = Omega on T_xM") {
    for (const ModelSpace& ms : sweep()) {
      if (ms.n() == 3) continue;
      const Form Om = ambient_volume(ms);
      RngStream rng(9);
      const Vec x = sample_point(ms, rng).coords;
      const Mat T = ms.tangent_basis(x);
      const std::vector<Vec> v = columns(T);
      for (double eps : {1.0, 0.3}) {
        const Form Oe = metric_volume_eps(ms, eps);
        CHECK(eps * factorial(ms.n()) * Oe(x, v) == doctest::Approx(Om(x, v)).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("normalization identity") {
  const ModelSpace h2 = ModelSpace::heisenberg(2);
  const Vec x = vec({0.5, -1.0, 0.25, 2.0, 0.3});
  const std::vector<Vec> F = columns(h2.horizontal_frame(x));
  CHECK(std::abs(wedge_power(h2.contact_data().d_omega, 2)(x, F)) == doctest::Approx(2.0).epsilon(1e-12));

  const ModelSpace h1 = ModelSpace::heisenberg(1);
  const std::vector<Vec> F1 = columns(h1.horizontal_frame(vec({0.1, 0.2, 0.3})));
  CHECK(std::abs(h1.contact_data().d_omega(vec({0.1, 0.2, 0.3}), F1)) == doctest::Approx(1.0).epsilon(1e-12));

  CHECK(verify_normalization(ModelSpace::sphere(1, 1.0), 1000, 42).max_residual <= 1e-7);
  for (const ModelSpace& ms : sweep()) CHECK(verify_normalization(ms, 100, 1).max_residual <= 1e-7);
}

TEST_CASE("sampled points") {
  for (const ModelSpace& ms : sweep()) {
    RngStream a(99), b(99);
    for (int t = 0; t < 100; ++t) {
      const Vec x = sample_point(ms, a).coords;
      CHECK(std::abs(ms.constraint(x)) <= 1e-12);
      CHECK(x == sample_point(ms, b).coords);
    }
  }
  RngStream rng(1);
  const Vec s = sample_point(ModelSpace::sphere(1, 1.0), rng).coords;
  CHECK(s.squaredNorm() == doctest::Approx(1.0).epsilon(1e-12));
  const Vec a = sample_point(ModelSpace::anti_de_sitter(1, 1.0), rng).coords;
  CHECK(a.head(2).squaredNorm() - a.tail(2).squaredNorm() == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("horizontal frame is g-orthonormal and annihilated by omega") {
  for (const ModelSpace& ms : sweep()) {
    RngStream rng(12);
    for (int t = 0; t < 50; ++t) {
      const Vec x = sample_point(ms, rng).coords;
      const Mat F = ms.horizontal_frame(x);
      const Mat gram = F.transpose() * ms.fibre_metric_matrix() * F;
      CHECK((gram - Mat::Identity(2 * ms.n(), 2 * ms.n())).cwiseAbs().maxCoeff() < 1e-10);
      CHECK((ms.omega(x).transpose() * F).cwiseAbs().maxCoeff() < 1e-10);
      CHECK((ms.horizontal_cometric(x) - F * F.transpose()).cwiseAbs().maxCoeff() < 1e-10 * (1.0 + x.squaredNorm()));
    }
  }
}
