#include "hypersub/linalg.hpp"

#include "hypersub/errors.hpp"

#include <cmath>
#include <cstdio>

namespace hypersub {

Mat gram_schmidt(const Mat& candidates, const Mat& G, int count, double tol) {
  const int dim = static_cast<int>(candidates.rows());
  const int m = static_cast<int>(candidates.cols());
  if (count > m) throw ArgumentError("gram_schmidt: more vectors requested than candidates");
  Mat rest = candidates;
  Mat out(dim, count);
  bool used[kMaxDim] = {};
  for (int j = 0; j < count; ++j) {
    int best = -1;
    double best_norm = -1.0;
    for (int c = 0; c < m; ++c) {
      if (used[c]) continue;
      const double nn = bilinear(G, rest.col(c), rest.col(c));
      if (nn > best_norm) {
        best_norm = nn;
        best = c;
      }
    }
    if (best < 0 || !(best_norm > tol * tol))
      throw NumericalError("gram_schmidt: breakdown at vector " + std::to_string(j));
    used[best] = true;
    Vec q = rest.col(best) / std::sqrt(best_norm);
    // second pass against the already accepted vectors to clean up drift
    for (int i = 0; i < j; ++i) q -= bilinear(G, out.col(i), q) * out.col(i);
    q /= std::sqrt(bilinear(G, q, q));
    out.col(j) = q;
    for (int c = 0; c < m; ++c) {
      if (used[c]) continue;
      rest.col(c) -= bilinear(G, q, rest.col(c)) * q;
    }
  }
  return out;
}

Mat orthonormalize_in_order(const Mat& columns, const Mat& G) {
  Mat out = columns;
  for (int j = 0; j < out.cols(); ++j) {
    Vec q = out.col(j);
    for (int i = 0; i < j; ++i) q -= bilinear(G, out.col(i), q) * out.col(i);
    const double nn = bilinear(G, q, q);
    if (!(nn > 1e-20)) throw NumericalError("orthonormalize_in_order: degenerate column");
    out.col(j) = q / std::sqrt(nn);
  }
  return out;
}

std::string to_string(const Vec& v) {
  std::string s = "(";
  char buf[32];
  for (int i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%s%.6g", i ? ", " : "", v[i]);
    s += buf;
  }
  return s + ")";
}

}  // namespace hypersub
