#pragma once

#include "hypersub/hypersurface.hpp"
#include "hypersub/rng.hpp"

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace hypersub {

struct SimConfig {
  Family family = Family::Heisenberg;
  int n = 1;
  double k = 1.0;
  double r0 = 1.0;
  double step = 1e-3;
  double horizon = 1.0;
  std::uint64_t paths = 10000;
  std::uint64_t seed = 42;
  double hit_threshold = 1e-3;
  double guard_radius = 1e3;
  std::vector<double> snapshot_times;  // empty: horizon only
  bool randomize_angles = true;
  unsigned threads = 0;  // 0: hardware concurrency
  double fd_step = 1e-4;
  bool fd_richardson = false;

  void validate() const;
  std::uint64_t step_count() const;
  std::vector<double> snapshots() const;
};

struct RadialKind {
  enum class Kind { Bessel, Legendre, HypBessel };
  Kind kind;
  int order;  // d = 2n + 1
  double k;

  double drift(double r) const;
  double upper_endpoint() const;  // pi/k for Legendre, +inf otherwise
  std::string_view name() const;
};

RadialKind radial_kind_for(const ModelHypersurface& hs);

struct MomentStats {
  double mean = 0.0;
  double variance = 0.0;
  double se = 0.0;
};

struct SnapshotEntry {
  std::uint64_t path;
  double r;
  bool hit;
};

struct Snapshot {
  double time;
  std::vector<SnapshotEntry> entries;
};

struct PathStats {
  std::vector<double> terminal;         // completed paths, path order
  std::vector<double> sorted_terminal;  // empirical CDF support
  MomentStats r;
  MomentStats r2;
  std::uint64_t paths = 0;
  std::uint64_t completed = 0;
  std::uint64_t hits = 0;
  std::uint64_t explosions = 0;
  double hit_fraction = 0.0;
  double max_retraction_residual = 0.0;
  std::uint64_t clamped = 0;
  std::uint64_t seed = 0;
  std::uint32_t stream = 0;
  std::vector<Snapshot> snapshots;

  double ecdf(double t) const;
};

struct ItoCoefficients {
  Vec drift;  // ambient, b_j = Delta(x_j) / 2
  Mat sigma;  // ambient x (2n-1), sigma sigma^T = A
};

ItoCoefficients ito_coefficients(const ModelHypersurface& hs, const Vec& x, double fd_step = 1e-4,
                                 bool richardson = true);

inline constexpr std::uint32_t kFullStream = 1;
inline constexpr std::uint32_t kReferenceStream = 2;

PathStats simulate_full(const ModelHypersurface& hs, const SimConfig& cfg);
PathStats simulate_radial_reference(const RadialKind& rk, const SimConfig& cfg);

// Radial coordinate from x_{2n+1} (sphere: arccos, AdS: arccosh). Out-of-range
// heights are clamped and counted.
double radial_value(const ModelHypersurface& hs, const Vec& x, bool* clamped = nullptr);
std::vector<double> radial_extract(const ModelHypersurface& hs, std::span<const Vec> path,
                                   std::uint64_t* clamped = nullptr);

struct DistributionComparison {
  double ks = 0.0;
  double mean_gap = 0.0;
  double mean_gap_se = 0.0;
  double second_moment_gap = 0.0;
  double second_moment_gap_se = 0.0;
};

double ks_statistic(std::span<const double> a, std::span<const double> b);
DistributionComparison compare_distributions(std::span<const double> a, std::span<const double> b);
MomentStats moments(std::span<const double> xs);

}  // namespace hypersub
