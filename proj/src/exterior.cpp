#include "hypersub/exterior.hpp"

#include "hypersub/errors.hpp"

#include <array>
#include <bit>
#include <memory>

namespace hypersub {

namespace {

// Small stack buffer of vectors; forms never see more than kMaxDim arguments.
struct VecList {
  std::array<Vec, kMaxDim> items;
  int size = 0;
  void push(const Vec& v) { items[size++] = v; }
  std::span<const Vec> span() const { return {items.data(), static_cast<std::size_t>(size)}; }
};

}  // namespace

ScalarField::ScalarField(Eval eval, Gradient gradient, std::optional<RadialSupport> support)
    : eval_(std::move(eval)), gradient_(std::move(gradient)), support_(support) {}

Vec ScalarField::gradient(const Vec& x, const FdOptions& fd) const {
  return gradient_ ? gradient_(x) : fd_gradient(x, fd);
}

Vec ScalarField::fd_gradient(const Vec& x, const FdOptions& fd) const {
  Vec g(x.size());
  for (int j = 0; j < x.size(); ++j) {
    g[j] = central_derivative(
        [&](double t) {
          Vec y = x;
          y[j] += t;
          return eval_(y);
        },
        fd.step, fd.richardson);
  }
  return g;
}

VectorField::VectorField(Eval eval, Jacobian jacobian, Domain domain)
    : eval_(std::move(eval)), jacobian_(std::move(jacobian)), domain_(std::move(domain)) {}

Vec VectorField::operator()(const Vec& x) const {
  if (domain_ && !domain_(x)) throw DomainError("vector field evaluated outside its domain at " + to_string(x));
  return eval_(x);
}

Mat VectorField::jacobian(const Vec& x, const FdOptions& fd) const {
  if (domain_ && !domain_(x)) throw DomainError("vector field Jacobian outside its domain at " + to_string(x));
  return jacobian_ ? jacobian_(x) : fd_jacobian(x, fd);
}

Mat VectorField::fd_jacobian(const Vec& x, const FdOptions& fd) const {
  const int d = static_cast<int>(x.size());
  Mat J(d, d);
  for (int j = 0; j < d; ++j) {
    J.col(j) = central_derivative(
        [&](double t) -> Vec {
          Vec y = x;
          y[j] += t;
          return eval_(y);
        },
        fd.step, fd.richardson);
  }
  return J;
}

Form::Form(int degree, Eval eval) : degree_(degree), eval_(std::move(eval)) {
  if (degree < 0) throw ArgumentError("form degree must be non-negative");
}

double Form::operator()(const Vec& base, std::span<const Vec> vectors) const {
  if (static_cast<int>(vectors.size()) != degree_)
    throw ArgumentError("form of degree " + std::to_string(degree_) + " given " +
                        std::to_string(vectors.size()) + " vectors");
  return eval_(base, vectors);
}

double Form::evaluate(const Point& p, std::span<const Tangent> vectors) const {
  VecList vs;
  if (static_cast<int>(vectors.size()) != degree_)
    throw ArgumentError("form of degree " + std::to_string(degree_) + " given " +
                        std::to_string(vectors.size()) + " vectors");
  for (const auto& t : vectors) {
    if (t.base.coords.size() != p.coords.size() || t.base.coords != p.coords)
      throw ArgumentError("tangent vector based at a different point");
    vs.push(t.components);
  }
  return eval_(p.coords, vs.span());
}

CovectorField::CovectorField(Coefficients a, Jacobian jacobian) : a_(std::move(a)), jacobian_(std::move(jacobian)) {}

Mat CovectorField::jacobian(const Vec& x, const FdOptions& fd) const {
  if (jacobian_) return jacobian_(x);
  const int d = static_cast<int>(x.size());
  Mat J(d, d);
  for (int j = 0; j < d; ++j) {
    J.col(j) = central_derivative(
        [&](double t) -> Vec {
          Vec y = x;
          y[j] += t;
          return a_(y);
        },
        fd.step, fd.richardson);
  }
  return J;
}

Form CovectorField::form() const {
  auto a = a_;
  return Form(1, [a](const Vec& x, std::span<const Vec> v) { return a(x).dot(v[0]); });
}

Form wedge(const Form& a, const Form& b) {
  const int p = a.degree();
  const int q = b.degree();
  return Form(p + q, [a, b, p, q](const Vec& x, std::span<const Vec> vs) {
    const int m = p + q;
    double total = 0.0;
    // (p,q)-shuffles: subsets of size p go to a, the complement to b, both in
    // increasing order; sign is the parity of the shuffle.
    for (unsigned mask = 0; mask < (1u << m); ++mask) {
      if (std::popcount(mask) != p) continue;
      VecList left, right;
      int inversions = 0;
      int taken = 0;
      for (int i = 0; i < m; ++i) {
        if (mask & (1u << i)) {
          left.push(vs[i]);
          inversions += i - taken;
          ++taken;
        } else {
          right.push(vs[i]);
        }
      }
      const double term = a(x, left.span()) * b(x, right.span());
      total += (inversions % 2) ? -term : term;
    }
    return total;
  });
}

Form wedge(std::span<const Form> forms) {
  if (forms.empty()) return Form(0, [](const Vec&, std::span<const Vec>) { return 1.0; });
  Form acc = forms.back();
  for (auto it = forms.rbegin() + 1; it != forms.rend(); ++it) acc = wedge(*it, acc);
  return acc;
}

Form wedge_power(const Form& a, int power) {
  if (power < 0) throw ArgumentError("negative wedge power");
  std::vector<Form> copies(static_cast<std::size_t>(power), a);
  return wedge(std::span<const Form>(copies));
}

double wedge_eval(std::span<const Form> forms, const Point& p, std::span<const Tangent> vectors) {
  int total = 0;
  for (const auto& f : forms) total += f.degree();
  if (total != static_cast<int>(vectors.size()))
    throw ArgumentError("wedge_eval: total degree " + std::to_string(total) + " but " +
                        std::to_string(vectors.size()) + " vectors");
  return wedge(forms).evaluate(p, vectors);
}

Form contract(const Form& alpha, const VectorField& V) {
  if (alpha.degree() == 0) throw ArgumentError("cannot contract a 0-form");
  return Form(alpha.degree() - 1, [alpha, V](const Vec& x, std::span<const Vec> vs) {
    VecList all;
    all.push(V(x));
    for (const auto& v : vs) all.push(v);
    return alpha(x, all.span());
  });
}

double interior_product(const Form& alpha, const VectorField& V, const Point& p, std::span<const Tangent> vectors) {
  return contract(alpha, V).evaluate(p, vectors);
}

Form exterior_derivative(const CovectorField& a, const FdOptions& fd) {
  return Form(2, [a, fd](const Vec& x, std::span<const Vec> vs) {
    // J(j, i) = d_i a_j
    const Mat J = a.jacobian(x, fd);
    const Vec& v = vs[0];
    const Vec& w = vs[1];
    return w.dot(J * v) - v.dot(J * w);
  });
}

namespace {

Vec directional_jacobian(const VectorField& Y, const Vec& x, const Vec& dir, const FdOptions& fd) {
  if (Y.has_jacobian()) return Y.jacobian(x) * dir;
  return central_derivative([&](double t) -> Vec { return Y(Vec(x + t * dir)); }, fd.step, fd.richardson);
}

}  // namespace

Tangent lie_bracket(const VectorField& X, const VectorField& Y, const Point& p, const FdOptions& fd) {
  const Vec& x = p.coords;
  if (!X.contains(x) || !Y.contains(x)) throw DomainError("lie_bracket: point outside field domain " + to_string(x));
  const Vec Xp = X(x);
  const Vec Yp = Y(x);
  return {p, directional_jacobian(Y, x, Xp, fd) - directional_jacobian(X, x, Yp, fd)};
}

VectorField lie_bracket_field(const VectorField& X, const VectorField& Y, const FdOptions& fd) {
  return VectorField(
      [X, Y, fd](const Vec& x) { return lie_bracket(X, Y, Point{x}, fd).components; }, {},
      [X, Y](const Vec& x) { return X.contains(x) && Y.contains(x); });
}

double directional_derivative(const ScalarField& f, const VectorField& V, const Point& p, int order,
                              const FdOptions& fd) {
  if (order != 1 && order != 2) throw ArgumentError("directional_derivative: order must be 1 or 2");
  auto first = [&](const Vec& x) {
    const Vec v = V(x);
    if (f.has_gradient()) return f.gradient(x).dot(v);
    return central_derivative([&](double t) { return f(Vec(x + t * v)); }, fd.step, fd.richardson);
  };
  if (order == 1) return first(p.coords);
  const Vec v = V(p.coords);
  return central_derivative([&](double t) { return first(Vec(p.coords + t * v)); }, fd.step, fd.richardson);
}

}  // namespace hypersub
