#pragma once

#include "hypersub/exterior.hpp"
#include "hypersub/linalg.hpp"
#include "hypersub/rng.hpp"

#include <cmath>
#include <functional>
#include <string>
#include <string_view>

namespace hypersub {

enum class Family { Heisenberg, Sphere, AntiDeSitter };

std::string_view to_string(Family f);
// Accepts "heisenberg", "sphere", "ads" / "anti-de-sitter". Throws ArgumentError.
Family parse_family(std::string_view name);

struct ContactData {
  Form omega;
  Form d_omega;
  std::function<double(const Point&, const Tangent&, const Tangent&)> metric;
  VectorField reeb;
  Form theta0;
  Form Omega;
};

// Ambient coordinates are 0-based in code: x[0..2n-1] pair up as (x_{2m-1}, x_{2m}).
class ModelSpace {
 public:
  static ModelSpace heisenberg(int n, double box_half_width = 2.0);
  static ModelSpace sphere(int n, double k);
  static ModelSpace anti_de_sitter(int n, double k);
  static ModelSpace make(Family family, int n, double k);

  Family family() const { return family_; }
  int n() const { return n_; }
  // 1 for Heisenberg (unused there).
  double k() const { return k_; }
  int ambient_dim() const { return family_ == Family::Heisenberg ? 2 * n_ + 1 : 2 * n_ + 2; }
  int dim() const { return 2 * n_ + 1; }
  double box_half_width() const { return box_; }
  std::string label() const;

  // Quadric defect: 0 for Heisenberg, |x|^2 - 1 for the sphere, Lorentz norm + 1 for AdS.
  double constraint(const Vec& x) const;
  bool contains(const Vec& x, double tol = 1e-10) const { return std::abs(constraint(x)) <= tol; }
  // Projection of an ambient vector onto T_xM (Euclidean for the sphere, eta for AdS).
  Vec project_tangent(const Vec& x, const Vec& v) const;
  // dim() columns spanning T_xM, Euclidean-orthonormal.
  Mat tangent_basis(const Vec& x) const;

  Vec omega(const Vec& x) const;
  double omega(const Vec& x, const Vec& v) const { return omega(x).dot(v); }
  // Constant matrix W with d omega(v, w) = v^T W w.
  const Mat& d_omega_matrix() const { return d_omega_; }
  double d_omega(const Vec& v, const Vec& w) const { return v.dot(d_omega_ * w); }
  // Raw ambient bilinear form whose restriction to D is g.
  const Mat& fibre_metric_matrix() const { return metric_; }
  double fibre_metric(const Vec& v, const Vec& w) const { return bilinear(metric_, v, w); }
  // X0 = L x + c (linear in all three families).
  Vec reeb(const Vec& x) const;
  const Mat& reeb_jacobian() const { return reeb_linear_; }
  // A_D = sum X_i X_i^T over a g-orthonormal frame of D, in closed form.
  Mat horizontal_cometric(const Vec& x) const;
  // 2n g-orthonormal columns spanning D_x (pivoted Gram-Schmidt, deterministic).
  Mat horizontal_frame(const Vec& x) const;
  // Ambient matrix of g_eps = g(pi v, pi w) + omega(v) omega(w) / eps^2 where
  // pi removes the X0 component. Meaningful on T_xM only.
  Mat metric_eps(const Vec& x, double eps) const;

  ContactData contact_data() const;

 private:
  ModelSpace(Family family, int n, double k, double box);

  Family family_;
  int n_;
  double k_;
  double box_;
  Mat d_omega_;
  Mat metric_;
  Mat reeb_linear_;
};

Form contact_form(const ModelSpace& ms);
VectorField reeb_field(const ModelSpace& ms);
// Omega = omega ^ (d omega)^n.
Form ambient_volume(const ModelSpace& ms);
// Metric volume of g_eps, oriented like Omega. Built independently of Omega from a
// g_eps-orthonormal basis so that eps n! Omega_eps = Omega can be tested.
Form metric_volume_eps(const ModelSpace& ms, double eps);

struct NormalizationResult {
  double max_residual = 0.0;
  Vec worst_point;
};

NormalizationResult verify_normalization(const ModelSpace& ms, int samples, std::uint64_t seed);

Point sample_point(const ModelSpace& ms, RngStream& rng);

// Residuals of the two Reeb conditions at x: |omega(X0) - 1| and the dual norm of
// d omega(X0, .) on T_xM (unit vectors measured in g_1).
struct ReebResidual {
  double omega_defect;
  double d_omega_defect;
};
ReebResidual reeb_residual(const ModelSpace& ms, const Vec& x);

double factorial(int n);

}  // namespace hypersub
