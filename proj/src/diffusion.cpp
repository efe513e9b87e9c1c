#include "hypersub/diffusion.hpp"

#include "hypersub/errors.hpp"
#include "hypersub/fd.hpp"
#include "hypersub/linalg.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

namespace hypersub {

void SimConfig::validate() const {
  if (n < 1 || n > 3) throw ArgumentError("n must be in 1..3");
  if (!(k > 0.0)) throw ArgumentError("k must be positive");
  if (!(r0 > 0.0)) throw ArgumentError("start radius must be positive");
  if (!(step > 0.0) || !(horizon > 0.0)) throw ArgumentError("step and horizon must be positive");
  if (step > horizon) throw ArgumentError("step must not exceed the horizon");
  if (paths < 1) throw ArgumentError("need at least one path");
  if (paths > 0xFFFFFFFFull) throw ArgumentError("too many paths");
  if (!(hit_threshold > 0.0) || !(hit_threshold < r0)) throw ArgumentError("hit threshold must lie in (0, r0)");
  if (!(guard_radius > r0)) throw ArgumentError("guard radius must exceed r0");
  if (!(fd_step > 0.0)) throw ArgumentError("fd step must be positive");
  if (step_count() >= 0xFFFFFFFFull) throw ArgumentError("too many steps");
  for (double t : snapshot_times)
    if (!(t > 0.0) || t > horizon * (1.0 + 1e-12)) throw ArgumentError("snapshot times must lie in (0, T]");
}

// The step is adjusted so that an integer number of steps hits T exactly.
std::uint64_t SimConfig::step_count() const {
  return static_cast<std::uint64_t>(std::max(1.0, std::round(horizon / step)));
}

std::vector<double> SimConfig::snapshots() const {
  std::vector<double> t = snapshot_times;
  if (t.empty()) t.push_back(horizon);
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  return t;
}

double RadialKind::drift(double r) const {
  const double half = 0.5 * (order - 1);
  switch (kind) {
    case Kind::Bessel: return half / r;
    case Kind::Legendre: return half * k / std::tan(k * r);
    case Kind::HypBessel: return half * k / std::tanh(k * r);
  }
  return 0.0;
}

double RadialKind::upper_endpoint() const {
  return kind == Kind::Legendre ? std::numbers::pi / k : std::numeric_limits<double>::infinity();
}

std::string_view RadialKind::name() const {
  switch (kind) {
    case Kind::Bessel: return "bessel";
    case Kind::Legendre: return "legendre";
    case Kind::HypBessel: return "hyperbolic-bessel";
  }
  return "?";
}

RadialKind radial_kind_for(const ModelHypersurface& hs) {
  const int d = 2 * hs.n() + 1;
  switch (hs.family()) {
    case Family::Heisenberg: return {RadialKind::Kind::Bessel, d, 1.0};
    case Family::Sphere: return {RadialKind::Kind::Legendre, d, hs.k()};
    case Family::AntiDeSitter: return {RadialKind::Kind::HypBessel, d, hs.k()};
  }
  throw ArgumentError("unknown family");
}

double PathStats::ecdf(double t) const {
  if (sorted_terminal.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto it = std::upper_bound(sorted_terminal.begin(), sorted_terminal.end(), t);
  return static_cast<double>(it - sorted_terminal.begin()) / static_cast<double>(sorted_terminal.size());
}

ItoCoefficients ito_coefficients(const ModelHypersurface& hs, const Vec& x, double fd_step, bool richardson) {
  hs.require_on_surface(x);
  const Mat A = w_cometric(hs, x);
  const int w = hs.dim() - 1;
  // Pivoted LDL^T of the rank 2n-1 matrix A; the trailing pivots vanish, so
  // the first 2n-1 columns of P^T L sqrt(D) already give sigma sigma^T = A.
  const Eigen::LDLT<Mat> ldlt(A);
  const Vec d = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt();
  const Mat L = ldlt.matrixL();
  const Mat factor = ldlt.transpositionsP().transpose() * Mat(L * d.asDiagonal());
  const WorkingChart chart = WorkingChart::around(hs, x);
  const Vec c0 = chart.from_ambient(x);
  const int m = hs.dim();
  const double h = fd_step * std::min(1.0, c0.norm());
  // Row l of rho * (chart components of A): column j is the l-th component of A e_j.
  auto weighted = [&](const Vec& c) -> Mat {
    return chart.density(c) * chart.components(c, w_cometric(hs, chart.to_ambient(c)));
  };
  Vec b = Vec::Zero(hs.ambient_dim());
  for (int l = 0; l < m; ++l) {
    const Mat deriv = central_derivative(
        [&](double t) {
          Vec c = c0;
          c[l] += t;
          return weighted(c);
        },
        h, richardson);
    b += deriv.row(l).transpose();
  }
  b *= 0.5 / chart.density(c0);
  return {b, factor.leftCols(w)};
}

double radial_value(const ModelHypersurface& hs, const Vec& x, bool* clamped) {
  if (clamped) *clamped = false;
  const int m = hs.dim();
  const double z = x[m];
  switch (hs.family()) {
    case Family::Heisenberg: return x.head(m).norm();
    case Family::Sphere: {
      const double zc = std::clamp(z, -1.0, 1.0);
      if (zc != z && clamped) *clamped = true;
      return std::acos(zc) / hs.k();
    }
    case Family::AntiDeSitter: {
      const double zc = std::max(z, 1.0);
      if (zc != z && clamped) *clamped = true;
      return std::acosh(zc) / hs.k();
    }
  }
  return 0.0;
}

std::vector<double> radial_extract(const ModelHypersurface& hs, std::span<const Vec> path, std::uint64_t* clamped) {
  std::vector<double> out;
  out.reserve(path.size());
  std::uint64_t count = 0;
  for (const Vec& x : path) {
    bool c = false;
    out.push_back(radial_value(hs, x, &c));
    if (c) ++count;
  }
  if (clamped) *clamped = count;
  return out;
}

MomentStats moments(std::span<const double> xs) {
  MomentStats s;
  const auto N = static_cast<double>(xs.size());
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double v : xs) sum += v;
  s.mean = sum / N;
  double ss = 0.0;
  for (double v : xs) ss += (v - s.mean) * (v - s.mean);
  s.variance = xs.size() > 1 ? ss / (N - 1.0) : 0.0;
  s.se = std::sqrt(s.variance / N);
  return s;
}

double ks_statistic(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw ArgumentError("KS statistic needs two nonempty samples");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const auto na = static_cast<double>(x.size()), nb = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double t = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= t) ++i;
    while (j < y.size() && y[j] <= t) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

DistributionComparison compare_distributions(std::span<const double> a, std::span<const double> b) {
  DistributionComparison out;
  out.ks = ks_statistic(a, b);
  const MomentStats ma = moments(a), mb = moments(b);
  std::vector<double> a2(a.begin(), a.end()), b2(b.begin(), b.end());
  for (double& v : a2) v *= v;
  for (double& v : b2) v *= v;
  const MomentStats sa = moments(a2), sb = moments(b2);
  out.mean_gap = ma.mean - mb.mean;
  out.mean_gap_se = std::hypot(ma.se, mb.se);
  out.second_moment_gap = sa.mean - sb.mean;
  out.second_moment_gap_se = std::hypot(sa.se, sb.se);
  return out;
}

namespace {

struct PathRecord {
  double terminal = 0.0;
  bool completed = false;
  bool hit = false;
  bool exploded = false;
  bool clamped = false;
  double max_residual = 0.0;
  std::vector<double> snap_r;
  std::vector<char> snap_hit;
};

// Step indices (1-based, after the step) at which snapshots are taken.
std::vector<std::uint64_t> snapshot_steps(const SimConfig& cfg, const std::vector<double>& times) {
  const std::uint64_t N = cfg.step_count();
  const double h = cfg.horizon / static_cast<double>(N);
  std::vector<std::uint64_t> s;
  for (double t : times)
    s.push_back(std::clamp<std::uint64_t>(static_cast<std::uint64_t>(std::llround(t / h)), 1, N));
  return s;
}

template <class F>
void parallel_paths(std::uint64_t paths, unsigned threads, F&& body) {
  unsigned T = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  T = static_cast<unsigned>(std::min<std::uint64_t>(T, paths));
  if (T <= 1) {
    for (std::uint64_t p = 0; p < paths; ++p) body(p);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(T);
  for (unsigned t = 0; t < T; ++t) {
    pool.emplace_back([&, t] {
      try {
        const std::uint64_t lo = paths * t / T, hi = paths * (t + 1) / T;
        for (std::uint64_t p = lo; p < hi; ++p) body(p);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

PathStats reduce(std::vector<PathRecord>& records, const std::vector<double>& times, std::uint64_t seed,
                 std::uint32_t stream) {
  PathStats st;
  st.paths = records.size();
  st.seed = seed;
  st.stream = stream;
  for (double t : times) st.snapshots.push_back({t, {}});
  for (std::uint64_t p = 0; p < records.size(); ++p) {
    const PathRecord& r = records[p];
    if (r.completed) st.terminal.push_back(r.terminal);
    if (r.hit) ++st.hits;
    if (r.exploded) ++st.explosions;
    if (r.clamped) ++st.clamped;
    st.max_retraction_residual = std::max(st.max_retraction_residual, r.max_residual);
    for (std::size_t s = 0; s < times.size(); ++s)
      st.snapshots[s].entries.push_back({p, r.snap_r[s], r.snap_hit[s] != 0});
  }
  st.completed = st.terminal.size();
  st.hit_fraction = static_cast<double>(st.hits) / static_cast<double>(st.paths);
  st.r = moments(st.terminal);
  std::vector<double> sq = st.terminal;
  for (double& v : sq) v *= v;
  st.r2 = moments(sq);
  st.sorted_terminal = st.terminal;
  std::sort(st.sorted_terminal.begin(), st.sorted_terminal.end());
  return st;
}

// Shared stopping rules. Returns true when the path must stop.
struct Monitor {
  double delta;
  double upper;  // right endpoint of the radial interval (inf if none)
  double guard;
  bool hit_at(double r) const { return r <= delta || r >= upper - delta; }
  bool stop_at(double r) const { return r <= 0.5 * delta || r >= upper - 0.5 * delta; }
  bool exploded_at(double r) const { return r > guard; }
};

void fill_snapshots(PathRecord& rec, std::size_t from, double r) {
  for (std::size_t s = from; s < rec.snap_r.size(); ++s) {
    rec.snap_r[s] = r;
    rec.snap_hit[s] = rec.hit;
  }
}

}  // namespace

PathStats simulate_full(const ModelHypersurface& hs, const SimConfig& cfg) {
  cfg.validate();
  if (hs.family() != cfg.family || hs.n() != cfg.n || (hs.family() != Family::Heisenberg && hs.k() != cfg.k))
    throw ArgumentError("config does not match the hypersurface");
  const double upper = hs.r_max();
  if (!(cfg.r0 + cfg.hit_threshold < upper)) throw ArgumentError("start radius too close to the upper endpoint");

  const std::uint64_t N = cfg.step_count();
  const double h = cfg.horizon / static_cast<double>(N);
  const double sqrt_h = std::sqrt(h);
  const std::vector<double> times = cfg.snapshots();
  const std::vector<std::uint64_t> snap_steps = snapshot_steps(cfg, times);
  const CounterRng rng(cfg.seed, kFullStream);
  const Monitor mon{cfg.hit_threshold, upper, cfg.guard_radius};
  const int m = hs.dim();
  const int w = m - 1;

  std::vector<PathRecord> records(cfg.paths);
  parallel_paths(cfg.paths, cfg.threads, [&](std::uint64_t p) {
    PathRecord& rec = records[p];
    rec.snap_r.assign(times.size(), 0.0);
    rec.snap_hit.assign(times.size(), 0);
    const auto pid = static_cast<std::uint32_t>(p);

    Vec theta = Vec::Zero(m);
    if (cfg.randomize_angles) {
      std::array<double, kMaxDim> z{};
      rng.normals(pid, 0xFFFFFFFFu, std::span<double>(z.data(), m));
      for (int i = 0; i < m; ++i) theta[i] = z[i];
      theta /= theta.norm();
    } else {
      theta[0] = 1.0;
    }
    Vec x = hs.point_at(cfg.r0, theta);

    std::array<double, kMaxDim> xi{};
    Vec dW(w);
    std::size_t next_snap = 0;
    double r = cfg.r0;
    for (std::uint64_t s = 0; s < N; ++s) {
      const ItoCoefficients ic = ito_coefficients(hs, x, cfg.fd_step, cfg.fd_richardson);
      rng.normals(pid, static_cast<std::uint32_t>(s), std::span<double>(xi.data(), w));
      for (int i = 0; i < w; ++i) dW[i] = xi[i];
      x = hs.retract(Vec(x + ic.drift * h + ic.sigma * (sqrt_h * dW)));
      rec.max_residual = std::max(rec.max_residual, hs.constraint_residual(x));
      r = hs.radius(x);
      if (!std::isfinite(r) || mon.exploded_at(r)) {
        rec.exploded = true;
        fill_snapshots(rec, next_snap, r);
        return;
      }
      if (mon.hit_at(r)) rec.hit = true;
      if (mon.stop_at(r)) {
        fill_snapshots(rec, next_snap, r);
        return;
      }
      while (next_snap < snap_steps.size() && snap_steps[next_snap] == s + 1) {
        rec.snap_r[next_snap] = radial_value(hs, x);
        rec.snap_hit[next_snap] = rec.hit;
        ++next_snap;
      }
    }
    rec.completed = true;
    rec.terminal = radial_value(hs, x, &rec.clamped);
  });
  return reduce(records, times, cfg.seed, kFullStream);
}

PathStats simulate_radial_reference(const RadialKind& rk, const SimConfig& cfg) {
  cfg.validate();
  if (!(rk.k > 0.0)) throw ArgumentError("radial parameter k must be positive");
  if (rk.order < 2) throw ArgumentError("radial order must be at least 2");
  const double upper = rk.upper_endpoint();
  if (!(cfg.r0 > 0.0) || !(cfg.r0 < upper)) throw ArgumentError("start radius outside the state space");
  if (!(cfg.r0 + cfg.hit_threshold < upper)) throw ArgumentError("start radius too close to the upper endpoint");

  const std::uint64_t N = cfg.step_count();
  const double h = cfg.horizon / static_cast<double>(N);
  const double sqrt_h = std::sqrt(h);
  const std::vector<double> times = cfg.snapshots();
  const std::vector<std::uint64_t> snap_steps = snapshot_steps(cfg, times);
  const CounterRng rng(cfg.seed, kReferenceStream);
  const Monitor mon{cfg.hit_threshold, upper, cfg.guard_radius};

  std::vector<PathRecord> records(cfg.paths);
  parallel_paths(cfg.paths, cfg.threads, [&](std::uint64_t p) {
    PathRecord& rec = records[p];
    rec.snap_r.assign(times.size(), 0.0);
    rec.snap_hit.assign(times.size(), 0);
    const auto pid = static_cast<std::uint32_t>(p);
    double r = cfg.r0;
    std::size_t next_snap = 0;
    double xi = 0.0;
    for (std::uint64_t s = 0; s < N; ++s) {
      rng.normals(pid, static_cast<std::uint32_t>(s), std::span<double>(&xi, 1));
      r += rk.drift(r) * h + sqrt_h * xi;
      if (!std::isfinite(r) || mon.exploded_at(r)) {
        rec.exploded = true;
        fill_snapshots(rec, next_snap, r);
        return;
      }
      if (mon.hit_at(r)) rec.hit = true;
      if (mon.stop_at(r) || r <= 0.0) {
        rec.hit = true;
        fill_snapshots(rec, next_snap, r);
        return;
      }
      while (next_snap < snap_steps.size() && snap_steps[next_snap] == s + 1) {
        rec.snap_r[next_snap] = r;
        rec.snap_hit[next_snap] = rec.hit;
        ++next_snap;
      }
    }
    rec.completed = true;
    rec.terminal = r;
  });
  return reduce(records, times, cfg.seed, kReferenceStream);
}

}  // namespace hypersub
