#include "hypersub/model_space.hpp"

#include "hypersub/errors.hpp"

#include <array>
#include <cmath>
#include <cstdio>

namespace hypersub {

std::string_view to_string(Family f) {
  switch (f) {
    case Family::Heisenberg: return "heisenberg";
    case Family::Sphere: return "sphere";
    case Family::AntiDeSitter: return "ads";
  }
  return "?";
}

Family parse_family(std::string_view name) {
  if (name == "heisenberg") return Family::Heisenberg;
  if (name == "sphere") return Family::Sphere;
  if (name == "ads" || name == "anti-de-sitter" || name == "antidesitter") return Family::AntiDeSitter;
  throw ArgumentError("unknown family '" + std::string(name) + "'");
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

ModelSpace::ModelSpace(Family family, int n, double k, double box) : family_(family), n_(n), k_(k), box_(box) {
  if (n < 1 || n > 3) throw ArgumentError("n must be in {1, 2, 3}");
  if (!(k > 0.0) || !std::isfinite(k)) throw ArgumentError("k must be positive");
  if (!(box > 0.0)) throw ArgumentError("sampling box must be positive");
  const int D = ambient_dim();
  const int pairs = family == Family::Heisenberg ? n : n + 1;
  const double scale = family == Family::Heisenberg ? 1.0 : 1.0 / (k * k);

  d_omega_ = Mat::Zero(D, D);
  for (int m = 0; m < pairs; ++m) {
    d_omega_(2 * m, 2 * m + 1) = scale;
    d_omega_(2 * m + 1, 2 * m) = -scale;
  }

  metric_ = Mat::Zero(D, D);
  switch (family) {
    case Family::Heisenberg:
      for (int i = 0; i < 2 * n; ++i) metric_(i, i) = 1.0;
      break;
    case Family::Sphere:
      for (int i = 0; i < D; ++i) metric_(i, i) = scale;
      break;
    case Family::AntiDeSitter:
      for (int i = 0; i < D; ++i) metric_(i, i) = i < 2 * n ? scale : -scale;
      break;
  }

  reeb_linear_ = Mat::Zero(D, D);
  if (family != Family::Heisenberg) {
    const double c = 2.0 * k * k;
    for (int m = 0; m < pairs; ++m) {
      // AdS flips the rotation in the spacelike planes.
      const double s = (family == Family::AntiDeSitter && m < n) ? -c : c;
      reeb_linear_(2 * m + 1, 2 * m) = s;
      reeb_linear_(2 * m, 2 * m + 1) = -s;
    }
  }
}

ModelSpace ModelSpace::heisenberg(int n, double box_half_width) {
  return ModelSpace(Family::Heisenberg, n, 1.0, box_half_width);
}
ModelSpace ModelSpace::sphere(int n, double k) { return ModelSpace(Family::Sphere, n, k, 1.0); }
ModelSpace ModelSpace::anti_de_sitter(int n, double k) { return ModelSpace(Family::AntiDeSitter, n, k, 1.0); }

ModelSpace ModelSpace::make(Family family, int n, double k) {
  switch (family) {
    case Family::Heisenberg: return heisenberg(n);
    case Family::Sphere: return sphere(n, k);
    case Family::AntiDeSitter: return anti_de_sitter(n, k);
  }
  throw ArgumentError("bad family");
}

std::string ModelSpace::label() const {
  std::string s = std::string(to_string(family_)) + " n=" + std::to_string(n_);
  if (family_ != Family::Heisenberg) {
    char buf[32];
    std::snprintf(buf, sizeof buf, " k=%g", k_);
    s += buf;
  }
  return s;
}

double ModelSpace::constraint(const Vec& x) const {
  switch (family_) {
    case Family::Heisenberg: return 0.0;
    case Family::Sphere: return x.squaredNorm() - 1.0;
    case Family::AntiDeSitter: {
      const int t = 2 * n_;
      return x.head(t).squaredNorm() - x[t] * x[t] - x[t + 1] * x[t + 1] + 1.0;
    }
  }
  return 0.0;
}

Vec ModelSpace::project_tangent(const Vec& x, const Vec& v) const {
  switch (family_) {
    case Family::Heisenberg: return v;
    case Family::Sphere: return v - (x.dot(v) / x.squaredNorm()) * x;
    case Family::AntiDeSitter: {
      const int t = 2 * n_;
      auto eta = [t](const Vec& a, const Vec& b) {
        return a.head(t).dot(b.head(t)) - a[t] * b[t] - a[t + 1] * b[t + 1];
      };
      return v - (eta(x, v) / eta(x, x)) * x;
    }
  }
  return v;
}

Mat ModelSpace::tangent_basis(const Vec& x) const {
  const int D = ambient_dim();
  if (family_ == Family::Heisenberg) return Mat::Identity(D, D);
  Mat cands(D, D);
  for (int i = 0; i < D; ++i) cands.col(i) = project_tangent(x, Vec::Unit(D, i));
  return gram_schmidt(cands, Mat::Identity(D, D), dim());
}

Vec ModelSpace::omega(const Vec& x) const {
  Vec a = 0.5 * (d_omega_.transpose() * x);
  if (family_ == Family::Heisenberg) a[2 * n_] -= 1.0;
  return a;
}

Vec ModelSpace::reeb(const Vec& x) const {
  if (family_ == Family::Heisenberg) return -Vec::Unit(ambient_dim(), 2 * n_);
  return reeb_linear_ * x;
}

Mat ModelSpace::horizontal_cometric(const Vec& x) const {
  const int D = ambient_dim();
  switch (family_) {
    case Family::Heisenberg: {
      // X_{2m-1} = d_{2m-1} - x_{2m}/2 d_z, X_{2m} = d_{2m} + x_{2m-1}/2 d_z
      Mat F = Mat::Zero(D, 2 * n_);
      for (int m = 0; m < n_; ++m) {
        F(2 * m, 2 * m) = 1.0;
        F(2 * m + 1, 2 * m + 1) = 1.0;
        F(2 * n_, 2 * m) = -0.5 * x[2 * m + 1];
        F(2 * n_, 2 * m + 1) = 0.5 * x[2 * m];
      }
      return F * F.transpose();
    }
    case Family::Sphere: {
      const Vec j = reeb_linear_ * x / (2.0 * k_ * k_);
      return k_ * k_ * (Mat(Mat::Identity(D, D)) - x * x.transpose() - j * j.transpose());
    }
    case Family::AntiDeSitter: {
      const Vec j = reeb_linear_ * x / (2.0 * k_ * k_);
      Mat eta = Mat::Identity(D, D);
      eta(D - 2, D - 2) = -1.0;
      eta(D - 1, D - 1) = -1.0;
      return k_ * k_ * (eta + x * x.transpose() + j * j.transpose());
    }
  }
  return {};
}

Mat ModelSpace::horizontal_frame(const Vec& x) const {
  const Mat T = tangent_basis(x);
  const Vec a = omega(x);
  const Vec X0 = reeb(x);
  Mat cands(T.rows(), T.cols());
  for (int i = 0; i < T.cols(); ++i) cands.col(i) = T.col(i) - a.dot(T.col(i)) * X0;
  return gram_schmidt(cands, metric_, 2 * n_);
}

Mat ModelSpace::metric_eps(const Vec& x, double eps) const {
  if (!(eps > 0.0)) throw ArgumentError("eps must be positive");
  const int D = ambient_dim();
  const Vec a = omega(x);
  const Vec X0 = reeb(x);
  const Mat P = Mat(Mat::Identity(D, D)) - X0 * a.transpose();
  return P.transpose() * metric_ * P + (a * a.transpose()) / (eps * eps);
}

Form contact_form(const ModelSpace& ms) {
  return Form(1, [ms](const Vec& x, std::span<const Vec> v) { return ms.omega(x).dot(v[0]); });
}

VectorField reeb_field(const ModelSpace& ms) {
  return VectorField([ms](const Vec& x) { return ms.reeb(x); },
                     [ms](const Vec&) { return ms.reeb_jacobian(); });
}

Form ambient_volume(const ModelSpace& ms) {
  const ContactData cd = ms.contact_data();
  return cd.Omega;
}

ContactData ModelSpace::contact_data() const {
  const ModelSpace ms = *this;
  CovectorField a([ms](const Vec& x) { return ms.omega(x); },
                  [ms](const Vec&) { return Mat(0.5 * ms.d_omega_matrix().transpose()); });
  ContactData cd;
  cd.omega = a.form();
  cd.d_omega = exterior_derivative(a);
  cd.metric = [ms](const Point&, const Tangent& v, const Tangent& w) {
    return ms.fibre_metric(v.components, w.components);
  };
  cd.reeb = reeb_field(ms);
  // omega(X0) = 1 and omega kills D, so theta0 coincides with omega.
  cd.theta0 = cd.omega;
  cd.Omega = wedge(cd.omega, wedge_power(cd.d_omega, n_));
  return cd;
}

Form metric_volume_eps(const ModelSpace& ms, double eps) {
  if (!(eps > 0.0)) throw ArgumentError("eps must be positive");
  const Form Omega = ambient_volume(ms);
  return Form(ms.dim(), [ms, eps, Omega](const Vec& x, std::span<const Vec> vs) {
    const Mat G = ms.metric_eps(x, eps);
    Mat B = gram_schmidt(ms.tangent_basis(x), G, ms.dim());
    std::array<Vec, kMaxDim> cols;
    for (int i = 0; i < B.cols(); ++i) cols[i] = B.col(i);
    if (Omega(x, std::span<const Vec>(cols.data(), B.cols())) < 0.0) B.col(0) = -B.col(0);
    Mat V(x.size(), static_cast<int>(vs.size()));
    for (int i = 0; i < V.cols(); ++i) V.col(i) = vs[i];
    return Mat(B.transpose() * G * V).determinant();
  });
}

NormalizationResult verify_normalization(const ModelSpace& ms, int samples, std::uint64_t seed) {
  if (samples < 1) throw ArgumentError("samples must be >= 1");
  const ContactData cd = ms.contact_data();
  const Form top = wedge_power(cd.d_omega, ms.n());
  const double target = factorial(ms.n());
  RngStream rng(seed);
  NormalizationResult res;
  for (int s = 0; s < samples; ++s) {
    const Point p = sample_point(ms, rng);
    Mat F;
    try {
      F = ms.horizontal_frame(p.coords);
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " at " + to_string(p.coords));
    }
    std::array<Vec, kMaxDim> cols;
    for (int i = 0; i < F.cols(); ++i) cols[i] = F.col(i);
    const double value = top(p.coords, std::span<const Vec>(cols.data(), F.cols()));
    cols[F.cols()] = ms.reeb(p.coords);
    const double sign = cd.Omega(p.coords, std::span<const Vec>(cols.data(), F.cols() + 1)) < 0.0 ? -1.0 : 1.0;
    const double r = std::abs(sign * value - target);
    if (s == 0 || r > res.max_residual) {
      res.max_residual = r;
      res.worst_point = p.coords;
    }
  }
  return res;
}

Point sample_point(const ModelSpace& ms, RngStream& rng) {
  const int D = ms.ambient_dim();
  Vec x(D);
  switch (ms.family()) {
    case Family::Heisenberg:
      for (int i = 0; i < D; ++i) x[i] = rng.uniform(-ms.box_half_width(), ms.box_half_width());
      break;
    case Family::Sphere:
      for (int i = 0; i < D; ++i) x[i] = rng.normal();
      x /= x.norm();
      break;
    case Family::AntiDeSitter: {
      for (int i = 0; i < D; ++i) x[i] = rng.normal();
      const int t = 2 * ms.n();
      const double radius = std::sqrt(1.0 + x.head(t).squaredNorm());
      const double tn = std::hypot(x[t], x[t + 1]);
      x[t] *= radius / tn;
      x[t + 1] *= radius / tn;
      break;
    }
  }
  return {x};
}

ReebResidual reeb_residual(const ModelSpace& ms, const Vec& x) {
  const Vec X0 = ms.reeb(x);
  const Mat B = gram_schmidt(ms.tangent_basis(x), ms.metric_eps(x, 1.0), ms.dim());
  double acc = 0.0;
  for (int i = 0; i < B.cols(); ++i) {
    const double c = ms.d_omega(X0, B.col(i));
    acc += c * c;
  }
  return {std::abs(ms.omega(x, X0) - 1.0), std::sqrt(acc)};
}

}  // namespace hypersub
