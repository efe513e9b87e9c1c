#pragma once

#include <Eigen/Dense>

#include <string>

namespace hypersub {

// Ambient dimension never exceeds 2n+2 with n <= 3, so everything fits in
// stack storage. Keeps the simulation inner loop free of heap traffic.
inline constexpr int kMaxDim = 8;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

inline double bilinear(const Mat& G, const Vec& a, const Vec& b) { return a.dot(G * b); }

// Pivoted Gram-Schmidt in the (possibly only semi-definite) form G. At each
// step the candidate with the largest remaining norm is taken; ties resolve to
// the lowest column index, so the output is a deterministic function of the
// input. Throws NumericalError when fewer than `count` directions survive `tol`.
Mat gram_schmidt(const Mat& candidates, const Mat& G, int count, double tol = 1e-10);

// Plain Gram-Schmidt keeping column order. Used on nearly-orthonormal input
// (frames transported across a finite-difference stencil).
Mat orthonormalize_in_order(const Mat& columns, const Mat& G);

std::string to_string(const Vec& v);

}  // namespace hypersub
