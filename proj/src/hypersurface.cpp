#include "hypersub/hypersurface.hpp"

#include "hypersub/errors.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace hypersub {

namespace {

constexpr double kPi = std::numbers::pi;

// Ambient radius factor: |y| = htilde(r).
double htilde(Family f, double k, double r) {
  switch (f) {
    case Family::Heisenberg: return r;
    case Family::Sphere: return std::sin(k * r);
    case Family::AntiDeSitter: return std::sinh(k * r);
  }
  return 0.0;
}

double htilde_prime(Family f, double k, double r) {
  switch (f) {
    case Family::Heisenberg: return 1.0;
    case Family::Sphere: return k * std::cos(k * r);
    case Family::AntiDeSitter: return k * std::cosh(k * r);
  }
  return 0.0;
}

// x_{2n+1} as a function of r (sphere, AdS).
double height(Family f, double k, double r) { return f == Family::Sphere ? std::cos(k * r) : std::cosh(k * r); }
double height_prime(Family f, double k, double r) {
  return f == Family::Sphere ? -k * std::sin(k * r) : k * std::sinh(k * r);
}

double radius_of(Family f, int n, double k, const Vec& x) {
  const double s = x.head(2 * n).norm();
  switch (f) {
    case Family::Heisenberg: return s;
    case Family::Sphere: return std::atan2(s, x[2 * n]) / k;
    case Family::AntiDeSitter: return std::asinh(s) / k;
  }
  return 0.0;
}

Vec point_on(Family f, int n, double k, double r, const Vec& theta) {
  const int D = f == Family::Heisenberg ? 2 * n + 1 : 2 * n + 2;
  Vec x = Vec::Zero(D);
  x.head(2 * n) = htilde(f, k, r) * theta;
  if (f != Family::Heisenberg) x[2 * n] = height(f, k, r);
  return x;
}

double r_upper(Family f, double k) {
  return f == Family::Sphere ? kPi / k : std::numeric_limits<double>::infinity();
}

}  // namespace

// ---------------------------------------------------------------------------

ModelHypersurface::ModelHypersurface(ModelSpace space, double char_tolerance)
    : space_(std::move(space)), char_tolerance_(char_tolerance), volume_(ambient_volume(space_)) {
  if (!(char_tolerance > 0.0)) throw ArgumentError("char_tolerance must be positive");
}

ScalarField ModelHypersurface::defining_function() const {
  const int iu = u_index();
  const int D = ambient_dim();
  return ScalarField([iu](const Vec& x) { return x[iu]; }, [iu, D](const Vec&) { return Vec(Vec::Unit(D, iu)); });
}

Form ModelHypersurface::zeta() const { return contact_form(space_); }

// The AdS quadric is measured relative to x_{2n+1}^2: far out, its terms are
// large and cancel, so the absolute value is dominated by round-off.
double ModelHypersurface::constraint_residual(const Vec& x) const {
  double q = std::abs(space_.constraint(x));
  if (family() == Family::AntiDeSitter) q /= 1.0 + x[height_index()] * x[height_index()];
  return std::max(q, std::abs(u(x)));
}

bool ModelHypersurface::contains(const Vec& x, double tol) const {
  if (x.size() != ambient_dim() || !x.allFinite()) return false;
  if (constraint_residual(x) > tol) return false;
  if (family() == Family::AntiDeSitter && !(x[height_index()] > 0.0)) return false;
  return true;
}

void ModelHypersurface::require_on_surface(const Vec& x, double tol) const {
  if (!contains(x, tol)) throw DomainError("point not on the hypersurface: " + to_string(x));
}

double ModelHypersurface::r_max() const { return r_upper(family(), k()); }

double ModelHypersurface::radius(const Vec& x) const { return radius_of(family(), n(), k(), x); }

Vec ModelHypersurface::radius_gradient(const Vec& x) const {
  const int m = 2 * n();
  const double s = x.head(m).norm();
  Vec g = Vec::Zero(ambient_dim());
  switch (family()) {
    case Family::Heisenberg:
      g.head(m) = x.head(m) / s;
      break;
    case Family::Sphere: {
      const double h = x[m];
      const double q = s * s + h * h;
      g.head(m) = (h / (q * k())) * x.head(m) / s;
      g[m] = -s / (q * k());
      break;
    }
    case Family::AntiDeSitter:
      g.head(m) = x.head(m) / (s * k() * std::sqrt(1.0 + s * s));
      break;
  }
  return g;
}

double ModelHypersurface::h(double r) const { return h_k(space_, r); }

double ModelHypersurface::h_prime(double r) const {
  switch (family()) {
    case Family::Heisenberg: return 1.0;
    case Family::Sphere: return std::cos(k() * r);
    case Family::AntiDeSitter: return std::cosh(k() * r);
  }
  return 0.0;
}

double ModelHypersurface::radial_divergence(double r) const {
  const double twon = 2.0 * n();
  switch (family()) {
    case Family::Heisenberg: return twon / r;
    case Family::Sphere: return twon * k() / std::tan(k() * r);
    case Family::AntiDeSitter: return twon * k() / std::tanh(k() * r);
  }
  return 0.0;
}

Vec ModelHypersurface::radial_field(const Vec& x) const {
  const int m = 2 * n();
  const double s = x.head(m).norm();
  if (!(s > 0.0)) throw SingularityError("radial field undefined at a characteristic point");
  Vec R = Vec::Zero(ambient_dim());
  switch (family()) {
    case Family::Heisenberg:
      R.head(m) = x.head(m) / s;
      break;
    case Family::Sphere:
      R.head(m) = (k() * x[m] / s) * x.head(m);
      R[m] = -k() * s;
      break;
    case Family::AntiDeSitter:
      R.head(m) = (k() * x[m] / s) * x.head(m);
      R[m] = k() * s;
      break;
  }
  return R;
}

VectorField ModelHypersurface::radial_vector_field() const {
  const ModelHypersurface self = *this;
  const int m = 2 * n();
  return VectorField([self](const Vec& x) { return self.radial_field(x); }, {},
                     [m](const Vec& x) { return x.head(m).norm() > 0.0; });
}

Vec ModelHypersurface::point_at(double r, const Vec& theta) const {
  if (!(r >= 0.0) || !(r < r_max())) throw DomainError("radius outside the radial interval");
  return point_on(family(), n(), k(), r, theta);
}

Vec ModelHypersurface::retract(const Vec& x) const {
  Vec y = x;
  y[u_index()] = 0.0;
  const int m = 2 * n();
  switch (family()) {
    case Family::Heisenberg:
      break;
    case Family::Sphere:
      y /= y.norm();
      break;
    case Family::AntiDeSitter: {
      const double lorentz = y.head(m).squaredNorm() - y[m] * y[m];
      if (lorentz < 0.0 && y[m] > 0.0) {
        y /= std::sqrt(-lorentz);
      } else {
        y[m] = std::sqrt(1.0 + y.head(m).squaredNorm());
      }
      break;
    }
  }
  return y;
}

Vec ModelHypersurface::sample(RngStream& rng, double r_min, double r_max_) const {
  Vec theta(2 * n());
  for (int i = 0; i < theta.size(); ++i) theta[i] = rng.normal();
  theta /= theta.norm();
  return point_at(rng.uniform(r_min, r_max_), theta);
}

double h_k(const ModelSpace& ms, double r) {
  const double top = r_upper(ms.family(), ms.k());
  if (!(r > 0.0) || !(r < top)) throw DomainError("h_k: r outside the radial interval");
  switch (ms.family()) {
    case Family::Heisenberg: return r;
    case Family::Sphere: return std::sin(ms.k() * r) / ms.k();
    case Family::AntiDeSitter: return std::sinh(ms.k() * r) / ms.k();
  }
  return 0.0;
}

// ---------------------------------------------------------------------------

double characteristic_witness(const ModelHypersurface& hs, const Vec& x) {
  const int iu = hs.u_index();
  // grad u = e_u, so sum (X_i u)^2 = (A_D)_{uu}
  return hs.space().horizontal_cometric(x)(iu, iu);
}

CharacteristicTest is_characteristic(const ModelHypersurface& hs, const Point& p) {
  hs.require_on_surface(p.coords);
  const double w = characteristic_witness(hs, p.coords);
  return {w <= hs.char_tolerance() * hs.char_tolerance(), w};
}

Vec horizontal_normal_unsigned(const ModelHypersurface& hs, const Vec& x) {
  const Mat AD = hs.space().horizontal_cometric(x);
  const int iu = hs.u_index();
  const double w = AD(iu, iu);
  if (!(w > hs.char_tolerance() * hs.char_tolerance()))
    throw SingularityError("characteristic point " + to_string(x));
  return AD.col(iu) / std::sqrt(w);
}

Mat w_cometric(const ModelHypersurface& hs, const Vec& x) {
  const Mat AD = hs.space().horizontal_cometric(x);
  const int iu = hs.u_index();
  const double w = AD(iu, iu);
  if (!(w > hs.char_tolerance() * hs.char_tolerance()))
    throw SingularityError("characteristic point " + to_string(x));
  const Vec a = AD.col(iu);
  return AD - (a * a.transpose()) / w;
}

Mat w_projector(const ModelHypersurface& hs, const Vec& x) {
  return w_cometric(hs, x) * hs.space().metric_eps(x, 1.0);
}

// A G seed rather than w_projector * seed: the eps = 1 metric cancels large
// terms on AdS far from the vertex and the FD derivatives of the frame pick
// that noise up.
Mat transported_frame(const ModelHypersurface& hs, const Mat& seed, const Vec& q) {
  const Mat& G = hs.space().fibre_metric_matrix();
  return orthonormalize_in_order(w_cometric(hs, q) * (G * seed), G);
}

double surface_orientation(const ModelHypersurface& hs, const Vec& x, const Mat& Z) {
  const int m = hs.dim();
  if (hs.family() == Family::Heisenberg) return Mat(Z.topRows(m)).determinant();
  Mat M(m + 1, m + 1);
  M.col(0) = x.head(m + 1);
  M.rightCols(m) = Z.topRows(m + 1);
  return M.determinant();
}

Mat positive_surface_basis(const ModelHypersurface& hs, const Vec& x) {
  const int m = hs.dim();
  const int D = hs.ambient_dim();
  const int cand_count = hs.family() == Family::Heisenberg ? m : m + 1;
  Mat cands(D, cand_count);
  for (int i = 0; i < cand_count; ++i) {
    Vec v = hs.space().project_tangent(x, Vec::Unit(D, i));
    v[hs.u_index()] = 0.0;
    cands.col(i) = v;
  }
  Mat B = gram_schmidt(cands, Mat::Identity(D, D), m);
  if (surface_orientation(hs, x, B) < 0.0) B.col(0) = -B.col(0);
  return B;
}

namespace {

// Sign making Omega(v, positive basis of TS) > 0.
double orientation_sign(const ModelHypersurface& hs, const Vec& x, const Vec& v) {
  const Mat B = positive_surface_basis(hs, x);
  std::array<Vec, kMaxDim> cols;
  cols[0] = v;
  for (int i = 0; i < B.cols(); ++i) cols[i + 1] = B.col(i);
  const double val = hs.volume()(x, std::span<const Vec>(cols.data(), B.cols() + 1));
  return val < 0.0 ? -1.0 : 1.0;
}

}  // namespace

Tangent sr_normal(const ModelHypersurface& hs, const Point& p) {
  hs.require_on_surface(p.coords);
  const Vec m = horizontal_normal_unsigned(hs, p.coords);
  return {p, orientation_sign(hs, p.coords, m) * m};
}

Tangent sr_normal_closed_form(const ModelHypersurface& hs, const Point& p) {
  hs.require_on_surface(p.coords);
  const Vec& x = p.coords;
  const int n = hs.n();
  const double s = x.head(2 * n).norm();
  if (!(s > hs.char_tolerance())) throw SingularityError("characteristic point " + to_string(x));
  Vec N = Vec::Zero(hs.ambient_dim());
  if (hs.family() == Family::Heisenberg) {
    for (int m = 0; m < n; ++m) {
      N[2 * m] = x[2 * m + 1] / s;
      N[2 * m + 1] = -x[2 * m] / s;
    }
    N[2 * n] = -0.5 * s;
  } else {
    const double k = hs.k();
    const double h = x[2 * n];
    for (int m = 0; m < n; ++m) {
      N[2 * m] = k * x[2 * m + 1] * h / s;
      N[2 * m + 1] = -k * x[2 * m] * h / s;
    }
    N[2 * n + 1] = k * s;
  }
  return {p, N};
}

Tangent riemannian_normal_eps(const ModelHypersurface& hs, const Point& p, double eps) {
  if (!(eps > 0.0)) throw ArgumentError("eps must be positive");
  hs.require_on_surface(p.coords);
  const Vec& x = p.coords;
  const int iu = hs.u_index();
  const Mat AD = hs.space().horizontal_cometric(x);
  const Vec X0 = hs.space().reeb(x);
  const double x0u = X0[iu];
  Vec v = AD.col(iu) + eps * eps * x0u * X0;
  v /= std::sqrt(AD(iu, iu) + eps * eps * x0u * x0u);
  return {p, orientation_sign(hs, x, v) * v};
}

std::vector<Tangent> HorizontalFrame::tangents() const {
  std::vector<Tangent> out;
  for (int i = 0; i < vectors.cols(); ++i) out.push_back({base, vectors.col(i)});
  return out;
}

HorizontalFrame horizontal_frame(const ModelHypersurface& hs, const Point& p) {
  hs.require_on_surface(p.coords);
  const Vec& x = p.coords;
  const Vec m = horizontal_normal_unsigned(hs, x);
  const Mat& G = hs.space().fibre_metric_matrix();
  const Mat F = hs.space().horizontal_frame(x);
  Mat cands(F.rows(), F.cols());
  for (int i = 0; i < F.cols(); ++i) cands.col(i) = F.col(i) - bilinear(G, F.col(i), m) * m;
  return {p, gram_schmidt(cands, G, hs.dim() - 1)};
}

QuasiContactResult quasi_contact_check(const ModelHypersurface& hs, const Point& p, double threshold) {
  if (hs.n() < 2) throw UnsupportedError("quasi-contact check needs n >= 2 (W is a line field for n = 1)");
  const HorizontalFrame fr = horizontal_frame(hs, p);
  const int w = static_cast<int>(fr.vectors.cols());
  Mat M(w, w);
  for (int i = 0; i < w; ++i)
    for (int j = 0; j < w; ++j) M(i, j) = hs.space().d_omega(fr.vectors.col(i), fr.vectors.col(j));
  Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeFullV);
  QuasiContactResult res;
  res.rank = 0;
  for (int i = 0; i < w; ++i) {
    res.singular_values.push_back(svd.singularValues()[i]);
    if (svd.singularValues()[i] > threshold) ++res.rank;
  }
  const Vec coeff = svd.matrixV().col(w - 1);
  res.kernel = fr.vectors * coeff;
  const Mat& G = hs.space().fibre_metric_matrix();
  res.kernel /= std::sqrt(bilinear(G, res.kernel, res.kernel));
  const Vec R = hs.radial_field(p.coords);
  const double c = bilinear(G, res.kernel, R);
  const Vec perp = res.kernel - c * R;
  res.radial_angle = std::atan2(std::sqrt(std::max(0.0, bilinear(G, perp, perp))), std::abs(c));
  return res;
}

int bracket_generation_rank(const ModelHypersurface& hs, const Point& p, double threshold) {
  const HorizontalFrame fr = horizontal_frame(hs, p);
  const Mat seed = fr.vectors;
  const int w = static_cast<int>(seed.cols());
  // Frame transported to nearby points by projecting the seed and re-orthonormalizing.
  std::vector<VectorField> fields;
  for (int i = 0; i < w; ++i) {
    fields.emplace_back([hs, seed, i](const Vec& q) -> Vec {
      return transported_frame(hs, seed, q).col(i);
    });
  }
  // Rank is taken in g_1-orthonormal coordinates of T_xS; raw ambient
  // components are badly scaled on AdS far from the vertex.
  const Mat g1 = hs.space().metric_eps(p.coords, 1.0);
  const Mat B = gram_schmidt(positive_surface_basis(hs, p.coords), g1, hs.dim());
  const Mat BtG = B.transpose() * g1;
  // Up to 15 columns for n = 3, beyond the fixed-size Mat capacity.
  Eigen::MatrixXd big(hs.dim(), w + w * (w - 1) / 2);
  int c = 0;
  for (int i = 0; i < w; ++i) big.col(c++) = BtG * seed.col(i);
  for (int i = 0; i < w; ++i)
    for (int j = i + 1; j < w; ++j) big.col(c++) = BtG * lie_bracket(fields[i], fields[j], p).components;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(big);
  const auto& sv = svd.singularValues();
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > threshold * sv[0]) ++rank;
  return rank;
}

Mat heisenberg2_frame(const Vec& x) {
  const double r = x.head(4).norm();
  if (!(r > 0.0)) throw SingularityError("U frame undefined at the origin");
  const double x1 = x[0], y1 = x[1], x2 = x[2], y2 = x[3];
  Mat U = Mat::Zero(5, 4);
  U.col(0) << x1, y1, x2, y2, 0.0;
  U.col(1) << y2, x2, -y1, -x1, 0.0;
  U.col(2) << x2, -y2, -x1, y1, 0.0;
  U.col(3) << y1, -x1, y2, -x2, 0.0;
  return U / r;
}

VectorField heisenberg2_field(int index) {
  if (index < 1 || index > 4) throw ArgumentError("U index must be 1..4");
  // U_i = L_i x / |x|, L_i constant on the first four coordinates.
  Mat L = Mat::Zero(5, 5);
  Vec probe(5);
  for (int j = 0; j < 4; ++j) {
    probe.setZero();
    probe[j] = 1.0;
    const Mat U = heisenberg2_frame(probe);
    L.col(j) = U.col(index - 1);
  }
  return VectorField(
      [L](const Vec& x) -> Vec { return L * x / x.head(4).norm(); },
      [L](const Vec& x) -> Mat {
        const double r = x.head(4).norm();
        Vec gr = Vec::Zero(5);
        gr.head(4) = x.head(4) / r;
        return L / r - (L * x) * gr.transpose() / (r * r);
      },
      [](const Vec& x) { return x.size() == 5 && x.head(4).norm() > 0.0; });
}

// ---------------------------------------------------------------------------
// Charts

Vec Chart::components(const Vec& c, const Vec& v) const {
  const Mat J = jacobian(c);
  const Mat JtJ = J.transpose() * J;
  return JtJ.ldlt().solve(J.transpose() * v);
}

SphericalChart::SphericalChart(const ModelHypersurface& hs, double singular_margin)
    : family_(hs.family()), n_(hs.n()), k_(hs.k()), margin_(singular_margin) {}

namespace {

Vec sphere_direction(const Vec& c) {
  const int m = static_cast<int>(c.size());
  Vec th(m);
  double prod = 1.0;
  for (int i = 0; i < m - 1; ++i) {
    th[i] = prod * std::cos(c[i + 1]);
    prod *= std::sin(c[i + 1]);
  }
  th[m - 1] = prod;
  return th;
}

// d theta / d a_j where a_j = c[j + 1].
Vec sphere_direction_derivative(const Vec& c, int j) {
  const int m = static_cast<int>(c.size());
  Vec d = Vec::Zero(m);
  for (int i = 0; i < m; ++i) {
    if (i < m - 1 && j > i) continue;
    double v = 1.0;
    for (int l = 0; l < i && l < m - 1; ++l) v *= (l == j) ? std::cos(c[l + 1]) : std::sin(c[l + 1]);
    if (i < m - 1) v *= (i == j) ? -std::sin(c[i + 1]) : std::cos(c[i + 1]);
    d[i] = v;
  }
  return d;
}

}  // namespace

Vec SphericalChart::to_ambient(const Vec& c) const {
  if (!is_regular(c)) throw DomainError("spherical chart: singular point " + to_string(c));
  return point_on(family_, n_, k_, c[0], sphere_direction(c));
}

Vec SphericalChart::from_ambient(const Vec& x) const {
  const int m = 2 * n_;
  Vec c(m);
  c[0] = radius_of(family_, n_, k_, x);
  const Vec y = x.head(m);
  for (int i = 0; i + 2 < m; ++i) c[i + 1] = std::atan2(y.tail(m - i - 1).norm(), y[i]);
  double last = std::atan2(y[m - 1], y[m - 2]);
  if (last < 0.0) last += 2.0 * kPi;
  c[m - 1] = last;
  return c;
}

Mat SphericalChart::jacobian(const Vec& c) const {
  if (!is_regular(c)) throw DomainError("spherical chart: singular point " + to_string(c));
  const int m = 2 * n_;
  const int D = family_ == Family::Heisenberg ? m + 1 : m + 2;
  const double r = c[0];
  const Vec th = sphere_direction(c);
  Mat J = Mat::Zero(D, m);
  J.col(0).head(m) = htilde_prime(family_, k_, r) * th;
  if (family_ != Family::Heisenberg) J(m, 0) = height_prime(family_, k_, r);
  const double ht = htilde(family_, k_, r);
  for (int j = 0; j + 1 < m; ++j) J.col(j + 1).head(m) = ht * sphere_direction_derivative(c, j);
  return J;
}

namespace {

double angular_factor(const Vec& c, int n) {
  double f = 1.0;
  for (int i = 1; i <= 2 * n - 2; ++i) f *= std::pow(std::sin(c[i]), 2 * n - i - 1);
  return f;
}

}  // namespace

double SphericalChart::density(const Vec& c) const {
  if (!is_regular(c)) throw DomainError("spherical chart: singular point " + to_string(c));
  const double hk = family_ == Family::Heisenberg ? c[0] : htilde(family_, k_, c[0]) / k_;
  return 0.5 * factorial(n_) * std::pow(hk, 2 * n_) * angular_factor(c, n_);
}

double SphericalChart::jac_det(const Vec& c) const {
  if (!is_regular(c)) throw DomainError("spherical chart: singular point " + to_string(c));
  const double hk = family_ == Family::Heisenberg ? c[0] : htilde(family_, k_, c[0]) / k_;
  return std::pow(hk, 2 * n_ - 1) * angular_factor(c, n_);
}

double SphericalChart::singular_distance(const Vec& c) const {
  double d = std::min(c[0], r_upper(family_, k_) - c[0]);
  for (int i = 1; i <= 2 * n_ - 2; ++i) d = std::min(d, std::min(c[i], kPi - c[i]));
  return d;
}

bool SphericalChart::is_regular(const Vec& c) const {
  if (c.size() != 2 * n_ || !c.allFinite()) return false;
  return singular_distance(c) > margin_;
}

WorkingChart::WorkingChart(const ModelHypersurface& hs, int pole)
    : family_(hs.family()), n_(hs.n()), k_(hs.k()), pole_(pole >= 0 ? 1 : -1) {
  mu_scale_ = 0.5 * factorial(n_);
  if (family_ != Family::Heisenberg) mu_scale_ /= std::pow(k_, 2 * n_ + 1);
}

WorkingChart WorkingChart::around(const ModelHypersurface& hs, const Vec& x) {
  if (hs.family() == Family::Sphere) return WorkingChart(hs, x[hs.height_index()] >= 0.0 ? 1 : -1);
  return WorkingChart(hs, 1);
}

Vec WorkingChart::to_ambient(const Vec& c) const {
  const int m = 2 * n_;
  const double q = c.squaredNorm();
  switch (family_) {
    case Family::Heisenberg: {
      Vec x = Vec::Zero(m + 1);
      x.head(m) = c;
      return x;
    }
    case Family::AntiDeSitter: {
      Vec x = Vec::Zero(m + 2);
      x.head(m) = c;
      x[m] = std::sqrt(1.0 + q);
      return x;
    }
    case Family::Sphere: {
      Vec x = Vec::Zero(m + 2);
      x.head(m) = (2.0 / (1.0 + q)) * c;
      x[0] *= pole_;
      x[m] = pole_ * (1.0 - q) / (1.0 + q);
      return x;
    }
  }
  return {};
}

Vec WorkingChart::from_ambient(const Vec& x) const {
  const int m = 2 * n_;
  if (family_ != Family::Sphere) return x.head(m);
  Vec c = x.head(m) / (1.0 + pole_ * x[m]);
  c[0] *= pole_;
  return c;
}

Mat WorkingChart::jacobian(const Vec& c) const {
  const int m = 2 * n_;
  const double q = c.squaredNorm();
  switch (family_) {
    case Family::Heisenberg: {
      Mat J = Mat::Zero(m + 1, m);
      J.topRows(m).setIdentity();
      return J;
    }
    case Family::AntiDeSitter: {
      Mat J = Mat::Zero(m + 2, m);
      J.topRows(m).setIdentity();
      J.row(m) = c.transpose() / std::sqrt(1.0 + q);
      return J;
    }
    case Family::Sphere: {
      Mat J = Mat::Zero(m + 2, m);
      const double a = 1.0 + q;
      J.topRows(m) = (2.0 / a) * Mat(Mat::Identity(m, m)) - (4.0 / (a * a)) * (c * c.transpose());
      J.row(0) *= pole_;
      J.row(m) = (-4.0 * pole_ / (a * a)) * c.transpose();
      return J;
    }
  }
  return {};
}

double WorkingChart::density(const Vec& c) const {
  const double s = c.norm();
  switch (family_) {
    case Family::Heisenberg: return mu_scale_ * s;
    case Family::AntiDeSitter: return mu_scale_ * s / std::sqrt(1.0 + s * s);
    case Family::Sphere: {
      const double a = 1.0 + s * s;
      return mu_scale_ * (2.0 * s / a) * std::pow(2.0 / a, 2 * n_);
    }
  }
  return 0.0;
}

bool WorkingChart::is_regular(const Vec& c) const { return c.size() == 2 * n_ && c.allFinite() && c.norm() > 0.0; }

Vec WorkingChart::components(const Vec& c, const Vec& v) const {
  const int m = 2 * n_;
  if (family_ != Family::Sphere) return v.head(m);
  const double a = 0.5 * (1.0 + c.squaredNorm());
  Vec vy = v.head(m);
  vy[0] *= pole_;
  return a * vy - (pole_ * a * v[m]) * c;
}

Mat WorkingChart::components(const Vec& c, const Mat& V) const {
  const int m = 2 * n_;
  if (family_ != Family::Sphere) return V.topRows(m);
  const double a = 0.5 * (1.0 + c.squaredNorm());
  Mat out = a * V.topRows(m);
  out.row(0) *= pole_;
  out -= (pole_ * a) * (c * V.row(m));
  return out;
}

double induced_volume_density(const Chart& chart, const Vec& c) {
  if (!chart.is_regular(c)) throw DomainError("induced_volume_density: singular chart point " + to_string(c));
  return chart.density(c);
}

double induced_volume_direct(const ModelHypersurface& hs, const Chart& chart, const Vec& c) {
  if (!chart.is_regular(c)) throw DomainError("induced_volume_direct: singular chart point " + to_string(c));
  const Vec x = chart.to_ambient(c);
  const Tangent N = sr_normal(hs, Point{x});
  const Mat J = chart.jacobian(c);
  std::array<Vec, kMaxDim> cols;
  cols[0] = N.components;
  for (int i = 0; i < J.cols(); ++i) cols[i + 1] = J.col(i);
  return hs.volume()(x, std::span<const Vec>(cols.data(), J.cols() + 1));
}

}  // namespace hypersub
