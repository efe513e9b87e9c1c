#pragma once

#include "hypersub/exterior.hpp"
#include "hypersub/model_space.hpp"

#include <limits>
#include <vector>

namespace hypersub {

// S = {u = 0} with u the last ambient coordinate; for AdS only the upper sheet
// x_{2n+1} > 0 belongs to S. Characteristic set: origin (Heisenberg), the
// poles x_{2n+1} = +-1 (sphere), the vertex x_{2n+1} = 1 (AdS).
class ModelHypersurface {
 public:
  explicit ModelHypersurface(ModelSpace space, double char_tolerance = 1e-10);

  const ModelSpace& space() const { return space_; }
  Family family() const { return space_.family(); }
  int n() const { return space_.n(); }
  double k() const { return space_.k(); }
  int dim() const { return 2 * space_.n(); }
  int ambient_dim() const { return space_.ambient_dim(); }
  int u_index() const { return ambient_dim() - 1; }
  // Index of x_{2n+1}, the "height" coordinate on the sphere and AdS.
  int height_index() const { return 2 * space_.n(); }
  double char_tolerance() const { return char_tolerance_; }
  std::string label() const { return space_.label(); }

  double u(const Vec& x) const { return x[u_index()]; }
  Vec grad_u() const { return Vec::Unit(ambient_dim(), u_index()); }
  ScalarField defining_function() const;
  // omega restricted to TS; only meaningful on tangent vectors of S.
  Form zeta() const;
  // Omega of the ambient space, built once.
  const Form& volume() const { return volume_; }

  double constraint_residual(const Vec& x) const;
  bool contains(const Vec& x, double tol = 1e-9) const;
  // DomainError unless x lies on S.
  void require_on_surface(const Vec& x, double tol = 1e-8) const;

  // Right end of the radial interval: pi/k on the sphere, +inf otherwise.
  double r_max() const;
  // Radial coordinate, smooth in a neighbourhood of S minus C(S):
  // |y|, atan2(|y|, x_{2n+1})/k, asinh(|y|)/k with y = (x_1..x_{2n}).
  double radius(const Vec& x) const;
  Vec radius_gradient(const Vec& x) const;
  double h(double r) const;
  double h_prime(double r) const;
  // Closed-form div_mu R: 2n/r, 2nk cot(kr), 2nk coth(kr).
  double radial_divergence(double r) const;
  // Unit radial field R = d/dr.
  Vec radial_field(const Vec& x) const;
  VectorField radial_vector_field() const;

  // Point at radius r in direction theta (unit vector of R^{2n}).
  Vec point_at(double r, const Vec& theta) const;
  // Euclidean-style metric retraction back onto S.
  Vec retract(const Vec& x) const;
  // Random point with r uniform in [r_min, r_max] and uniform direction.
  Vec sample(RngStream& rng, double r_min, double r_max) const;

 private:
  ModelSpace space_;
  double char_tolerance_;
  Form volume_;
};

double h_k(const ModelSpace& ms, double r);

struct CharacteristicTest {
  bool characteristic;
  double witness;  // sum_i (X_i u)^2
};

double characteristic_witness(const ModelHypersurface& hs, const Vec& x);
CharacteristicTest is_characteristic(const ModelHypersurface& hs, const Point& p);

// A_D grad u / |.|_g, sign not fixed. SingularityError at C(S).
Vec horizontal_normal_unsigned(const ModelHypersurface& hs, const Vec& x);
// Diffusion matrix of the horizontal gradient: A = A_D - n n^T with n the unit
// horizontal normal. grad_S f = A grad f for any ambient extension of f.
Mat w_cometric(const ModelHypersurface& hs, const Vec& x);
// g_1-orthogonal projector onto W_x as an ambient operator (A * metric_eps(x, 1)).
Mat w_projector(const ModelHypersurface& hs, const Vec& x);
// Smooth W-frame near the base point of `seed` (columns g-orthonormal in W
// there): orthonormalized A(q) G seed, which equals seed at the base point.
Mat transported_frame(const ModelHypersurface& hs, const Mat& seed, const Vec& q);

// Orientation of S: det of the first 2n coordinates (Heisenberg) or
// det[x~ | Z] on the first 2n+1 coordinates (sphere, AdS).
double surface_orientation(const ModelHypersurface& hs, const Vec& x, const Mat& Z);
// 2n columns spanning T_xS with positive orientation; fine at C(S) as well.
Mat positive_surface_basis(const ModelHypersurface& hs, const Vec& x);

Tangent sr_normal(const ModelHypersurface& hs, const Point& p);
Tangent sr_normal_closed_form(const ModelHypersurface& hs, const Point& p);
Tangent riemannian_normal_eps(const ModelHypersurface& hs, const Point& p, double eps);

struct HorizontalFrame {
  Point base;
  Mat vectors;  // 2n-1 columns
  std::vector<Tangent> tangents() const;
};

HorizontalFrame horizontal_frame(const ModelHypersurface& hs, const Point& p);

struct QuasiContactResult {
  int rank;
  Vec kernel;                          // unit (in g) ambient vector
  std::vector<double> singular_values;  // descending
  double radial_angle;                  // angle between kernel line and R
};

QuasiContactResult quasi_contact_check(const ModelHypersurface& hs, const Point& p, double threshold = 1e-8);

// Numerical rank of span{Y_i, [Y_i, Y_j]} inside T_xS (SVD in g_1-orthonormal coordinates).
int bracket_generation_rank(const ModelHypersurface& hs, const Point& p, double threshold = 1e-8);

// Frame U_1..U_4 of the z = 0 slice in H^2 (columns, ambient R^5).
Mat heisenberg2_frame(const Vec& x);
VectorField heisenberg2_field(int index);  // index in 1..4

// ---------------------------------------------------------------------------
// Charts on S. Chart coordinates c live in R^{2n}.

class Chart {
 public:
  virtual ~Chart() = default;

  virtual int dim() const = 0;
  virtual Vec to_ambient(const Vec& c) const = 0;
  virtual Vec from_ambient(const Vec& x) const = 0;
  // ambient_dim x dim, columns d psi / d c_j.
  virtual Mat jacobian(const Vec& c) const = 0;
  // Coefficient of mu in this chart (closed form).
  virtual double density(const Vec& c) const = 0;
  virtual bool is_regular(const Vec& c) const = 0;
  // Chart components of a vector tangent to S at to_ambient(c).
  virtual Vec components(const Vec& c, const Vec& v) const;
};

// (r, phi_1, ..., phi_{2n-1}); phi_i in [0, pi] for i <= 2n-2, phi_{2n-1} in [0, 2 pi).
class SphericalChart final : public Chart {
 public:
  explicit SphericalChart(const ModelHypersurface& hs, double singular_margin = 1e-12);

  int dim() const override { return 2 * n_; }
  Vec to_ambient(const Vec& c) const override;
  Vec from_ambient(const Vec& x) const override;
  Mat jacobian(const Vec& c) const override;
  double density(const Vec& c) const override;
  bool is_regular(const Vec& c) const override;

  // Riemannian volume factor h_k(r)^{2n-1} prod sin(phi_i)^{2n-i-1}.
  double jac_det(const Vec& c) const;
  double mu_density(const Vec& c) const { return density(c); }
  // Distance of c from the coordinate singular set (r endpoints, phi in {0, pi}).
  double singular_distance(const Vec& c) const;

 private:
  Family family_;
  int n_;
  double k_;
  double margin_;
};

// Chart used for derivatives: regular on all of S minus C(S).
// Heisenberg: c = y. AdS: c = y, x_{2n+1} = sqrt(1 + |c|^2).
// Sphere: stereographic projection from the pole opposite to `pole`, with the
// first coordinate mirrored for pole = -1 so both charts are positively oriented.
class WorkingChart final : public Chart {
 public:
  WorkingChart(const ModelHypersurface& hs, int pole = 1);
  static WorkingChart around(const ModelHypersurface& hs, const Vec& x);

  int dim() const override { return 2 * n_; }
  Vec to_ambient(const Vec& c) const override;
  Vec from_ambient(const Vec& x) const override;
  Mat jacobian(const Vec& c) const override;
  double density(const Vec& c) const override;
  bool is_regular(const Vec& c) const override;
  // Exact left inverse of the Jacobian (differential of from_ambient).
  Vec components(const Vec& c, const Vec& v) const override;
  // Same for all columns of an ambient matrix.
  Mat components(const Vec& c, const Mat& V) const;

  int pole() const { return pole_; }

 private:
  Family family_;
  int n_;
  double k_;
  int pole_;
  double mu_scale_;
};

// Closed-form chart density with a domain check.
double induced_volume_density(const Chart& chart, const Vec& c);
// iota_N Omega evaluated on the chart frame.
double induced_volume_direct(const ModelHypersurface& hs, const Chart& chart, const Vec& c);

}  // namespace hypersub
