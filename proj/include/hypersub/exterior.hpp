#pragma once

#include "hypersub/fd.hpp"
#include "hypersub/linalg.hpp"

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace hypersub {

struct Point {
  Vec coords;
  int dim() const { return static_cast<int>(coords.size()); }
};

struct Tangent {
  Point base;
  Vec components;
};

// Closed radial band that contains the support of a test function.
struct RadialSupport {
  double r_min;
  double r_max;
};

class ScalarField {
 public:
  using Eval = std::function<double(const Vec&)>;
  using Gradient = std::function<Vec(const Vec&)>;

  ScalarField() = default;
  explicit ScalarField(Eval eval, Gradient gradient = {}, std::optional<RadialSupport> support = {});

  double operator()(const Vec& x) const { return eval_(x); }
  bool has_gradient() const { return static_cast<bool>(gradient_); }
  // Analytic gradient when supplied, Richardson FD otherwise.
  Vec gradient(const Vec& x, const FdOptions& fd = {}) const;
  Vec fd_gradient(const Vec& x, const FdOptions& fd = {}) const;
  const std::optional<RadialSupport>& support() const { return support_; }

 private:
  Eval eval_;
  Gradient gradient_;
  std::optional<RadialSupport> support_;
};

class VectorField {
 public:
  using Eval = std::function<Vec(const Vec&)>;
  using Jacobian = std::function<Mat(const Vec&)>;
  using Domain = std::function<bool(const Vec&)>;

  VectorField() = default;
  explicit VectorField(Eval eval, Jacobian jacobian = {}, Domain domain = {});

  // Throws DomainError outside the declared domain.
  Vec operator()(const Vec& x) const;
  Tangent at(const Point& p) const { return {p, (*this)(p.coords)}; }
  bool contains(const Vec& x) const { return !domain_ || domain_(x); }
  bool has_jacobian() const { return static_cast<bool>(jacobian_); }
  // J(i, j) = d V_i / d x_j.
  Mat jacobian(const Vec& x, const FdOptions& fd = {}) const;
  Mat fd_jacobian(const Vec& x, const FdOptions& fd = {}) const;

 private:
  Eval eval_;
  Jacobian jacobian_;
  Domain domain_;
};

// A k-form known only through its values on k-tuples of vectors at a point.
class Form {
 public:
  using Eval = std::function<double(const Vec& base, std::span<const Vec> vectors)>;

  Form() = default;
  Form(int degree, Eval eval);

  int degree() const { return degree_; }
  double operator()(const Vec& base, std::span<const Vec> vectors) const;
  // Checked evaluation: every tangent must sit at p.
  double evaluate(const Point& p, std::span<const Tangent> vectors) const;

 private:
  int degree_ = 0;
  Eval eval_;
};

// 1-form a(x) = sum a_i(x) dx_i, optionally with the Jacobian of its
// coefficients so that d can be taken analytically.
class CovectorField {
 public:
  using Coefficients = std::function<Vec(const Vec&)>;
  using Jacobian = std::function<Mat(const Vec&)>;

  CovectorField() = default;
  explicit CovectorField(Coefficients a, Jacobian jacobian = {});

  Vec coefficients(const Vec& x) const { return a_(x); }
  double operator()(const Vec& x, const Vec& v) const { return a_(x).dot(v); }
  bool has_jacobian() const { return static_cast<bool>(jacobian_); }
  Mat jacobian(const Vec& x, const FdOptions& fd = {}) const;
  Form form() const;

 private:
  Coefficients a_;
  Jacobian jacobian_;
};

Form wedge(const Form& a, const Form& b);
Form wedge(std::span<const Form> forms);
Form wedge_power(const Form& a, int power);
double wedge_eval(std::span<const Form> forms, const Point& p, std::span<const Tangent> vectors);

// iota_V alpha as a form of degree k-1.
Form contract(const Form& alpha, const VectorField& V);
double interior_product(const Form& alpha, const VectorField& V, const Point& p,
                        std::span<const Tangent> vectors);

// da(v,w) = sum_ij d_i a_j (v_i w_j - v_j w_i).
Form exterior_derivative(const CovectorField& a, const FdOptions& fd = {});

// [X,Y](p) = J_Y X - J_X Y. Analytic Jacobians when both fields carry them;
// otherwise directional FD along the other field.
Tangent lie_bracket(const VectorField& X, const VectorField& Y, const Point& p, const FdOptions& fd = {});
VectorField lie_bracket_field(const VectorField& X, const VectorField& Y, const FdOptions& fd = {});

// V f (order 1) or V(V f) (order 2) along the straight ambient line through p.
double directional_derivative(const ScalarField& f, const VectorField& V, const Point& p, int order,
                              const FdOptions& fd = {});

}  // namespace hypersub
