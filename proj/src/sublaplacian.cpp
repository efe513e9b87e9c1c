#include "hypersub/sublaplacian.hpp"

#include "hypersub/errors.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

namespace hypersub {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::DivGrad: return "div_grad";
    case Method::FrameFormula: return "frame_formula";
    case Method::ClosedForm: return "closed_form";
  }
  return "?";
}

std::vector<double> default_eps_schedule() { return {0.4, 0.2, 0.1, 0.05, 0.025}; }

// ---------------------------------------------------------------------------
// Test functions

namespace {

struct Bump {
  double a, b;
  // value and derivative in r; exp(1 - 1/(1 - t^2)) peaks at 1 mid-support
  double operator()(double r, double& d) const {
    const double t = (2.0 * r - a - b) / (b - a);
    const double s = 1.0 - t * t;
    if (s <= 0.0) {
      d = 0.0;
      return 0.0;
    }
    const double v = std::exp(1.0 - 1.0 / s);
    d = v * (-2.0 * t / (s * s)) * (2.0 / (b - a));
    return v;
  }
};

}  // namespace

TestFunction bump_function(const ModelHypersurface& hs, int variant) {
  if (variant < 0 || variant > 2) throw ArgumentError("bump variant must be 0, 1 or 2");
  const double a = 0.3;
  double b = 3.0;
  if (hs.family() == Family::Sphere) b = std::numbers::pi / hs.k() - 0.3;
  if (hs.family() == Family::AntiDeSitter) b = std::min(3.0, 3.0 / hs.k());
  const Bump bump{a, b};
  const int m = hs.dim();
  const int D = hs.ambient_dim();
  // Polynomial in xi = y on H^n and the sphere, xi = y / x_{2n+1} on AdS: the
  // raw AdS coordinates grow like e^{kr} and a cubic in them swamps the FD
  // checks with round-off.
  const bool scaled = hs.family() == Family::AntiDeSitter;
  auto poly_xi = [variant](const Vec& xi, int last, Vec& g) {
    g.setZero();
    switch (variant) {
      case 0: return 1.0;
      case 1:
        g[0] = 0.5 - 0.25 * xi[1];
        g[1] = -0.25 * xi[0];
        g[last] += 0.4 * xi[last];
        return 1.0 + 0.5 * xi[0] - 0.25 * xi[0] * xi[1] + 0.2 * xi[last] * xi[last];
      default:
        g[0] = xi[1] + 0.9 * xi[0] * xi[0];
        g[1] = xi[0];
        g[last] += -0.5;
        return xi[0] * xi[1] - 0.5 * xi[last] + 0.3 * xi[0] * xi[0] * xi[0] + 0.1;
    }
  };
  auto poly = [poly_xi, scaled, m, D](const Vec& x, Vec* grad) {
    const double z = scaled ? x[m] : 1.0;
    const Vec xi = x.head(m) / z;
    Vec g(m);
    const double p = poly_xi(xi, m - 1, g);
    if (grad) {
      *grad = Vec::Zero(D);
      grad->head(m) = g / z;
      if (scaled) (*grad)[m] = -g.dot(xi) / z;
    }
    return p;
  };
  auto eval = [hs, bump, poly](const Vec& x) {
    double d;
    const double beta = bump(hs.radius(x), d);
    return beta == 0.0 ? 0.0 : poly(x, nullptr) * beta;
  };
  auto grad = [hs, bump, poly](const Vec& x) -> Vec {
    double d;
    const double beta = bump(hs.radius(x), d);
    if (beta == 0.0) return Vec::Zero(x.size());
    Vec gp;
    const double p = poly(x, &gp);
    return beta * gp + (p * d) * hs.radius_gradient(x);
  };
  return {"bump" + std::to_string(variant), ScalarField(eval, grad, RadialSupport{a, b})};
}

TestFunction radial_function(const ModelHypersurface& hs, std::string id, std::function<double(double)> f,
                             std::function<double(double)> fprime) {
  auto eval = [hs, f](const Vec& x) { return f(hs.radius(x)); };
  auto grad = [hs, fprime](const Vec& x) -> Vec { return fprime(hs.radius(x)) * hs.radius_gradient(x); };
  return {std::move(id), ScalarField(eval, grad)};
}

TestFunction radial_power(const ModelHypersurface& hs, double power) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "r^%g", power);
  return radial_function(
      hs, buf, [power](double r) { return std::pow(r, power); },
      [power](double r) { return power * std::pow(r, power - 1.0); });
}

TestFunction constant_function(const ModelHypersurface& hs, double value) {
  const int D = hs.ambient_dim();
  return {"constant", ScalarField([value](const Vec&) { return value; }, [D](const Vec&) { return Vec(Vec::Zero(D)); })};
}

TestFunction coordinate_function(const ModelHypersurface& hs, int index) {
  const int D = hs.ambient_dim();
  if (index < 0 || index >= D) throw ArgumentError("coordinate index out of range");
  return {"x" + std::to_string(index + 1),
          ScalarField([index](const Vec& x) { return x[index]; }, [index, D](const Vec&) { return Vec(Vec::Unit(D, index)); })};
}

// ---------------------------------------------------------------------------

Tangent horizontal_gradient(const ModelHypersurface& hs, const ScalarField& f, const Point& p, const FdOptions& fd) {
  hs.require_on_surface(p.coords);
  return {p, w_cometric(hs, p.coords) * f.gradient(p.coords, fd)};
}

double divergence_in_chart(const Chart& chart, const SurfaceField& V, const Vec& c, double step, bool richardson,
                           const std::function<double(const Vec&)>& rho) {
  if (!chart.is_regular(c)) throw DomainError("divergence: singular chart point " + to_string(c));
  auto dens = [&](const Vec& cc) { return rho ? rho(cc) : chart.density(cc); };
  double total = 0.0;
  for (int l = 0; l < c.size(); ++l) {
    total += central_derivative(
        [&](double t) {
          Vec cc = c;
          cc[l] += t;
          return dens(cc) * chart.components(cc, V(chart.to_ambient(cc)))[l];
        },
        step, richardson);
  }
  return total / dens(c);
}

namespace {

// FD step scaled to the distance from the chart origin (which sits on C(S)).
double chart_step(const Vec& c, const FdOptions& fd) { return fd.step * std::min(1.0, c.norm()); }

// Second derivative term X(X f) at p for a field X: straight chart line in
// the direction of X(p).
double along_twice(const Chart& chart, const Vec& c0, const ScalarField& f, const SurfaceField& X, double step,
                   bool richardson) {
  const Vec v = chart.components(c0, X(chart.to_ambient(c0)));
  return central_derivative(
      [&](double t) {
        const Vec q = chart.to_ambient(Vec(c0 + t * v));
        return f.gradient(q).dot(X(q));
      },
      step, richardson);
}

// Orthonormal W-frame near p obtained by projecting the frame at p.
struct FrozenFrame {
  const ModelHypersurface* hs;
  Mat seed;
  Mat at(const Vec& q) const { return transported_frame(*hs, seed, q); }
};

double frame_expansion(const ModelHypersurface& hs, const ScalarField& f, const Point& p, const WorkingChart& chart,
                       const Vec& c0, double h, bool rich, const std::function<double(const Vec&)>& rho) {
  const FrozenFrame frame{&hs, horizontal_frame(hs, p).vectors};
  const Vec grad_p = f.gradient(p.coords);
  double sum = 0.0;
  for (int i = 0; i < frame.seed.cols(); ++i) {
    SurfaceField Y = [&frame, i](const Vec& q) -> Vec { return frame.at(q).col(i); };
    sum += along_twice(chart, c0, f, Y, h, rich);
    sum += divergence_in_chart(chart, Y, c0, h, rich, rho) * grad_p.dot(frame.seed.col(i));
  }
  return sum;
}

}  // namespace

double divergence_mu(const ModelHypersurface& hs, const SurfaceField& V, const Point& p, const FdOptions& fd) {
  hs.require_on_surface(p.coords);
  const WorkingChart chart = WorkingChart::around(hs, p.coords);
  const Vec c = chart.from_ambient(p.coords);
  return divergence_in_chart(chart, V, c, chart_step(c, fd), fd.richardson);
}

OperatorResult sublaplacian_apply(const ModelHypersurface& hs, const ScalarField& f, const Point& p, Method method,
                                  const FdOptions& fd) {
  hs.require_on_surface(p.coords);
  if (is_characteristic(hs, p).characteristic) throw SingularityError("sub-Laplacian at a characteristic point");
  const WorkingChart chart = WorkingChart::around(hs, p.coords);
  const Vec c0 = chart.from_ambient(p.coords);
  const double h = chart_step(c0, fd);
  double value = 0.0;
  switch (method) {
    case Method::DivGrad: {
      SurfaceField grad = [&](const Vec& q) -> Vec { return w_cometric(hs, q) * f.gradient(q); };
      value = divergence_in_chart(chart, grad, c0, h, fd.richardson);
      break;
    }
    case Method::FrameFormula:
      value = frame_expansion(hs, f, p, chart, c0, h, fd.richardson, {});
      break;
    case Method::ClosedForm: {
      if (hs.family() != Family::Heisenberg || hs.n() != 2)
        throw UnsupportedError("closed-form sub-Laplacian exists only for the H^2 slice");
      for (int i = 0; i < 3; ++i) {
        SurfaceField U = [i](const Vec& q) -> Vec { return heisenberg2_frame(q).col(i); };
        value += along_twice(chart, c0, f, U, h, fd.richardson);
      }
      const Vec U1 = heisenberg2_frame(p.coords).col(0);
      value += 4.0 / p.coords.head(4).norm() * f.gradient(p.coords).dot(U1);
      break;
    }
  }
  return {value, method, p.coords, h, fd.richardson};
}

// ---------------------------------------------------------------------------
// Riemannian approximation

double induced_volume_eps_density(const ModelHypersurface& hs, const Chart& chart, const Vec& c, double eps) {
  const Mat J = chart.jacobian(c);
  const Mat Gc = J.transpose() * hs.space().metric_eps(chart.to_ambient(c), eps) * J;
  return std::sqrt(Gc.determinant());
}

double induced_volume_eps_direct(const ModelHypersurface& hs, const Chart& chart, const Vec& c, double eps) {
  const Vec x = chart.to_ambient(c);
  const Tangent N = riemannian_normal_eps(hs, Point{x}, eps);
  const Form vol = metric_volume_eps(hs.space(), eps);
  const Mat J = chart.jacobian(c);
  std::array<Vec, kMaxDim> cols;
  cols[0] = N.components;
  for (int i = 0; i < J.cols(); ++i) cols[i + 1] = J.col(i);
  return vol(x, std::span<const Vec>(cols.data(), J.cols() + 1));
}

Vec reeb_tangential(const ModelHypersurface& hs, const Vec& x) {
  const Vec N = horizontal_normal_unsigned(hs, x);
  const Vec X0 = hs.space().reeb(x);
  const int iu = hs.u_index();
  return X0 - (X0[iu] / N[iu]) * N;
}

double reeb_tangential_norm2(const ModelHypersurface& hs, const Vec& x, double eps) {
  const Vec N = horizontal_normal_unsigned(hs, x);
  const int iu = hs.u_index();
  const double a = hs.space().reeb(x)[iu] / N[iu];
  return 1.0 / (eps * eps) + a * a;
}

double laplace_beltrami_eps_apply(const ModelHypersurface& hs, const ScalarField& f, const Point& p, double eps,
                                  LbMethod method, const FdOptions& fd) {
  if (!(eps > 0.0)) throw ArgumentError("eps must be positive");
  hs.require_on_surface(p.coords);
  if (is_characteristic(hs, p).characteristic) throw SingularityError("Laplace-Beltrami at a characteristic point");
  const WorkingChart chart = WorkingChart::around(hs, p.coords);
  const Vec c0 = chart.from_ambient(p.coords);
  const double h = chart_step(c0, fd);
  auto rho = [&](const Vec& c) { return induced_volume_eps_density(hs, chart, c, eps); };

  if (method == LbMethod::Coordinate) {
    double total = 0.0;
    for (int l = 0; l < c0.size(); ++l) {
      total += central_derivative(
          [&](double t) {
            Vec c = c0;
            c[l] += t;
            const Vec x = chart.to_ambient(c);
            const Mat J = chart.jacobian(c);
            const Mat Gc = J.transpose() * hs.space().metric_eps(x, eps) * J;
            const Vec df = J.transpose() * f.gradient(x);
            const Vec V = Gc.ldlt().solve(df);
            return std::sqrt(Gc.determinant()) * V[l];
          },
          h, fd.richardson);
    }
    return total / rho(c0);
  }

  double value = frame_expansion(hs, f, p, chart, c0, h, fd.richardson, rho);
  SurfaceField Ze = [&](const Vec& q) -> Vec { return reeb_tangential(hs, q) / std::sqrt(reeb_tangential_norm2(hs, q, eps)); };
  value += along_twice(chart, c0, f, Ze, h, fd.richardson);
  value += divergence_in_chart(chart, Ze, c0, h, fd.richardson, rho) * f.gradient(p.coords).dot(Ze(p.coords));
  return value;
}

// ---------------------------------------------------------------------------
// Convergence study

std::vector<Vec> make_grid(const ModelHypersurface& hs, int count, double r_min, double r_max, std::uint64_t seed) {
  if (count < 1) throw ArgumentError("grid needs at least one point");
  if (!(r_min > 0.0) || !(r_max > r_min) || !(r_max < hs.r_max())) throw ArgumentError("bad grid radial range");
  RngStream rng(seed, 7);
  std::vector<Vec> pts;
  pts.reserve(count);
  for (int i = 0; i < count; ++i) pts.push_back(hs.sample(rng, r_min, r_max));
  return pts;
}

double fitted_order(const std::vector<double>& eps, const std::vector<double>& errors) {
  if (eps.size() != errors.size() || eps.size() < 2) throw ArgumentError("fitted_order needs >= 2 matched entries");
  bool all_zero = true;
  for (double e : errors) {
    if (e != 0.0) all_zero = false;
  }
  if (all_zero) return std::numeric_limits<double>::infinity();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(eps.size());
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(errors[i] > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    const double lx = std::log(eps[i]);
    const double ly = std::log(errors[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

ConvergenceReport convergence_study(const ModelHypersurface& hs, const TestFunction& f, const std::vector<Vec>& grid,
                                    const std::vector<double>& eps_schedule, double margin, std::string grid_label,
                                    const FdOptions& fd) {
  if (eps_schedule.size() < 2) throw ArgumentError("eps schedule needs at least two values");
  for (std::size_t i = 0; i < eps_schedule.size(); ++i) {
    if (!(eps_schedule[i] > 0.0)) throw ArgumentError("eps values must be positive");
    if (i > 0 && !(eps_schedule[i] < eps_schedule[i - 1])) throw ArgumentError("eps schedule must be decreasing");
  }
  if (grid.empty()) throw ArgumentError("empty grid");
  for (const Vec& x : grid) {
    hs.require_on_surface(x);
    const double r = hs.radius(x);
    if (r < margin || r > hs.r_max() - margin)
      throw ArgumentError("grid point within the characteristic-set margin: " + to_string(x));
  }

  ConvergenceReport rep;
  rep.eps_schedule = eps_schedule;
  rep.function_id = f.id;
  rep.grid = grid_label.empty() ? std::to_string(grid.size()) + " points" : std::move(grid_label);
  rep.points = grid;
  rep.reference.reserve(grid.size());
  for (const Vec& x : grid) rep.reference.push_back(sublaplacian_apply(hs, f.field, Point{x}, Method::DivGrad, fd).value);
  for (double eps : eps_schedule) {
    std::vector<double> vals;
    double sup = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      vals.push_back(laplace_beltrami_eps_apply(hs, f.field, Point{grid[i]}, eps, LbMethod::FrameExpansion, fd));
      sup = std::max(sup, std::abs(vals.back() - rep.reference[i]));
    }
    rep.approx.push_back(std::move(vals));
    rep.sup_errors.push_back(sup);
  }
  rep.strictly_decreasing = true;
  for (std::size_t i = 1; i < rep.sup_errors.size(); ++i)
    if (!(rep.sup_errors[i] < rep.sup_errors[i - 1])) rep.strictly_decreasing = false;
  rep.fitted_order = fitted_order(rep.eps_schedule, rep.sup_errors);
  return rep;
}

}  // namespace hypersub
