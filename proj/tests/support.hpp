#pragma once

#include "hypersub/linalg.hpp"
#include "hypersub/rng.hpp"

#include <initializer_list>

namespace hypersub::test {

inline Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

// Hand-rolled generators for the property tests.
inline Vec random_vec(RngStream& rng, int n, double scale = 1.0) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = scale * rng.normal();
  return v;
}

inline Mat random_mat(RngStream& rng, int rows, int cols) {
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

inline Vec random_direction(RngStream& rng, int n) {
  Vec v = random_vec(rng, n);
  return v / v.norm();
}

inline double max_abs_diff(const Vec& a, const Vec& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace hypersub::test
