#pragma once

#include "hypersub/hypersurface.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace hypersub {

enum class Method { DivGrad, FrameFormula, ClosedForm };
enum class LbMethod { FrameExpansion, Coordinate };

std::string_view to_string(Method m);

struct OperatorResult {
  double value;
  Method method;
  Vec point;
  double step;
  bool richardson;
};

struct TestFunction {
  std::string id;
  ScalarField field;
};

// Polynomial times a smooth bump in r. Support is [0.3, 3] (Heisenberg),
// [0.3, min(3, 3/k)] (AdS) or [0.3, pi/k - 0.3] (sphere); on AdS the polynomial
// is taken in y / x_{2n+1}. variant in {0, 1, 2}.
TestFunction bump_function(const ModelHypersurface& hs, int variant);
TestFunction radial_function(const ModelHypersurface& hs, std::string id, std::function<double(double)> f,
                             std::function<double(double)> fprime);
TestFunction radial_power(const ModelHypersurface& hs, double power);
TestFunction constant_function(const ModelHypersurface& hs, double value);
TestFunction coordinate_function(const ModelHypersurface& hs, int index);

// Ambient-valued field on S; must return vectors tangent to S.
using SurfaceField = std::function<Vec(const Vec&)>;

Tangent horizontal_gradient(const ModelHypersurface& hs, const ScalarField& f, const Point& p,
                            const FdOptions& fd = {});

// (1/rho) sum_l d_l (rho V^l) in `chart` at chart point c; `rho` defaults to the
// chart's mu density.
double divergence_in_chart(const Chart& chart, const SurfaceField& V, const Vec& c, double step, bool richardson,
                           const std::function<double(const Vec&)>& rho = {});
// div_mu V at p, computed in the working chart around p.
double divergence_mu(const ModelHypersurface& hs, const SurfaceField& V, const Point& p, const FdOptions& fd = {});

OperatorResult sublaplacian_apply(const ModelHypersurface& hs, const ScalarField& f, const Point& p, Method method,
                                  const FdOptions& fd = {});

// g_eps-Riemannian density of S in the chart: sqrt det(J^T G_eps J).
double induced_volume_eps_density(const ModelHypersurface& hs, const Chart& chart, const Vec& c, double eps);
// iota_{N_eps} Omega_eps on the chart frame.
double induced_volume_eps_direct(const ModelHypersurface& hs, const Chart& chart, const Vec& c, double eps);

// Z = X0 - (X0 u / N u) N, the part of the Reeb field tangent to S.
Vec reeb_tangential(const ModelHypersurface& hs, const Vec& x);
// g_eps(Z, Z) = 1/eps^2 + (X0 u)^2 / (N u)^2.
double reeb_tangential_norm2(const ModelHypersurface& hs, const Vec& x, double eps);

double laplace_beltrami_eps_apply(const ModelHypersurface& hs, const ScalarField& f, const Point& p, double eps,
                                  LbMethod method = LbMethod::FrameExpansion, const FdOptions& fd = {});

std::vector<Vec> make_grid(const ModelHypersurface& hs, int count, double r_min, double r_max, std::uint64_t seed);

struct ConvergenceReport {
  std::vector<double> eps_schedule;
  std::vector<double> sup_errors;
  double fitted_order = 0.0;
  bool strictly_decreasing = false;
  std::string grid;
  std::string function_id;
  // per grid point
  std::vector<Vec> points;
  std::vector<double> reference;            // Delta f
  std::vector<std::vector<double>> approx;  // [eps index][point] Delta_eps f
};

// Least-squares slope of log(error) against log(eps).
double fitted_order(const std::vector<double>& eps, const std::vector<double>& errors);

ConvergenceReport convergence_study(const ModelHypersurface& hs, const TestFunction& f, const std::vector<Vec>& grid,
                                    const std::vector<double>& eps_schedule, double margin = 0.2,
                                    std::string grid_label = {}, const FdOptions& fd = {});

std::vector<double> default_eps_schedule();

}  // namespace hypersub
