#pragma once

namespace hypersub {

struct FdOptions {
  double step = 1e-4;
  bool richardson = true;
};

// Central difference of g at 0. With Richardson the 2h and h estimates are
// combined into an O(h^4) one. Works for double and Eigen values alike.
template <class G>
auto central_derivative(const G& g, double h, bool richardson) {
  using R = decltype(g(0.0));
  auto diff = [&](double s) -> R { return R((g(s) - g(-s)) / (2.0 * s)); };
  R d1 = diff(h);
  if (!richardson) return d1;
  R d2 = diff(2.0 * h);
  return R((4.0 * d1 - d2) / 3.0);
}

}  // namespace hypersub
