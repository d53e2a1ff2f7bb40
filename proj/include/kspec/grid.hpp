// Uniform symmetric grids on [-L, L] with trapezoid quadrature weights.
// N is odd so x = 0 is a node; boundary handling downstream is Dirichlet
// through ghost points just outside the interval.
#pragma once

#include <cmath>
#include <vector>

#include "kspec/errors.hpp"

namespace kspec {

struct Grid1D {
  double L = 20.0;
  int N = 2001;

  Grid1D() = default;
  Grid1D(double L_, int N_) : L(L_), N(N_) {
    if (N < 3 || N % 2 == 0)
      throw ValidationError("grid1d.N", "must be odd and >= 3");
    if (!(L > 0.0))
      throw ValidationError("grid1d.L", "must be positive");
  }

  double h() const { return 2.0 * L / (N - 1); }
  double x(int i) const { return -L + i * h(); }

  std::vector<double> points() const {
    std::vector<double> p(N);
    for (int i = 0; i < N; ++i) p[i] = x(i);
    return p;
  }

  // trapezoid weights: h at interior nodes, h/2 at the ends
  std::vector<double> weights() const {
    std::vector<double> w(N, h());
    w.front() = w.back() = 0.5 * h();
    return w;
  }
};

struct Grid2D {
  Grid1D gx;
  Grid1D gy;
};

}  // namespace kspec
