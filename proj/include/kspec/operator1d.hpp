// Discretization and eigendecomposition of the 1D transverse operator
// H0 = -d2/dx2 + V(x) on [-L, L] with Dirichlet ghost points: the 3-point
// stencil gives a symmetric tridiagonal matrix whose full spectrum is the
// channel basis for every downstream module.  Also provides the 2D
// spectral-bottom check on a tensor grid.
#pragma once

#include <lapacke.h>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "kspec/errors.hpp"
#include "kspec/grid.hpp"
#include "kspec/models.hpp"

namespace kspec {

struct EigenPair {
  double lambda = 0.0;
  std::vector<double> psi;
  int index = 0;
};

struct Tridiag {
  std::vector<double> d;  // diagonal 2/h^2 + V(x_i)
  std::vector<double> e;  // off-diagonal -1/h^2
};

template <PotentialModel M>
Tridiag assemble_h0(const M& model, const Grid1D& grid) {
  Tridiag t;
  const double h2 = grid.h() * grid.h();
  t.d.resize(grid.N);
  t.e.assign(grid.N - 1, -1.0 / h2);
  for (int i = 0; i < grid.N; ++i)
    t.d[i] = 2.0 / h2 + model.potential(grid.x(i));
  return t;
}

struct Spectrum {
  Grid1D grid;
  std::vector<double> lambda;  // ascending
  Eigen::MatrixXd psi;         // column j: trapezoid-normalized mode j

  EigenPair pair(int j) const {
    EigenPair p;
    p.lambda = lambda[j];
    p.index = j;
    p.psi.assign(psi.col(j).data(), psi.col(j).data() + grid.N);
    return p;
  }
};

// Full eigendecomposition.  Eigenvectors are normalized in the trapezoid
// L2 norm and sign-fixed so the leftmost component above 1e-8 of the max
// is positive; both conventions make downstream constants reproducible.
inline Spectrum eigen_h0(const Tridiag& t, const Grid1D& grid,
                         double residual_tol = 1e-6) {
  const int N = grid.N;
  Spectrum s;
  s.grid = grid;
  s.lambda = t.d;
  std::vector<double> e = t.e;
  s.psi.resize(N, N);
  lapack_int info = LAPACKE_dstevd(LAPACK_COL_MAJOR, 'V', N, s.lambda.data(),
                                   e.data(), s.psi.data(), N);
  if (info != 0)
    throw EigensolverFailure("tridiagonal eigensolver returned info=" +
                             std::to_string(info));
  const auto w = grid.weights();
  Eigen::Map<const Eigen::VectorXd> wv(w.data(), N);
  for (int j = 0; j < N; ++j) {
    auto col = s.psi.col(j);
    double nrm = std::sqrt(col.cwiseAbs2().dot(wv));
    col /= nrm;
    double mx = col.cwiseAbs().maxCoeff();
    for (int i = 0; i < N; ++i) {
      if (std::fabs(col(i)) > 1e-8 * mx) {
        if (col(i) < 0) col = -col;
        break;
      }
    }
  }
  // residual invariant ||H psi - lambda psi|| <= tol, checked on every mode
  const double h2 = grid.h() * grid.h();
  double worst = 0.0;
  for (int j = 0; j < N; ++j) {
    double r2 = 0.0;
    for (int i = 0; i < N; ++i) {
      double hv = t.d[i] * s.psi(i, j);
      if (i > 0) hv -= s.psi(i - 1, j) / h2;
      if (i + 1 < N) hv -= s.psi(i + 1, j) / h2;
      double r = hv - s.lambda[j] * s.psi(i, j);
      r2 += r * r;
    }
    worst = std::max(worst, std::sqrt(r2) / std::max(1.0, std::fabs(s.lambda[j])));
  }
  if (worst > residual_tol)
    throw EigensolverFailure("eigenpair residual " + std::to_string(worst) +
                             " exceeds tolerance");
  return s;
}

// Indices of genuine bound states: eigenvalues below lambda_e by a margin
// that excludes box-quantized continuum artifacts.  margin < 0 selects the
// default 0.25*(lambda_e - highest candidate), floored at 0.05.
inline std::vector<int> discrete_modes(const Spectrum& s, double lambda_e,
                                       double margin = -1.0) {
  const double floor_margin = 0.05;
  if (margin < 0.0) {
    double top = -std::numeric_limits<double>::infinity();
    for (double l : s.lambda)
      if (l < lambda_e - floor_margin) top = std::max(top, l);
    if (std::isinf(top))
      throw NoDiscreteModes("no eigenvalues below the essential edge");
    margin = std::max(floor_margin, 0.25 * (lambda_e - top));
  }
  std::vector<int> idx;
  for (int j = 0; j < static_cast<int>(s.lambda.size()); ++j)
    if (s.lambda[j] < lambda_e - margin) idx.push_back(j);
  if (idx.empty())
    throw NoDiscreteModes("no eigenvalues below the essential edge");
  return idx;
}

// Smallest eigenvalue of the 2D operator -Lap + V(x) on the tensor grid,
// by inverse iteration with a shift strictly below the bottom: the bottom
// equals lambda0(1D) + mu1(y) for a tensor Dirichlet grid, so the shift
// lambda0 + mu1/2 is safe and gives a contraction factor <= 1/6 per step.
template <PotentialModel M>
double spectral_bottom_2d(const M& model, const Grid1D& gx, const Grid1D& gy,
                          long cap = 1000000, double tol = 1e-10) {
  const long n = static_cast<long>(gx.N) * gy.N;
  if (n > cap)
    throw EigensolverFailure("2D grid " + std::to_string(n) +
                             " exceeds eigensolver cap " + std::to_string(cap));
  // 1D bottom on the same x-grid, eigenvalues only
  Tridiag t = assemble_h0(model, gx);
  std::vector<double> d = t.d, e = t.e;
  lapack_int info = LAPACKE_dstevd(LAPACK_COL_MAJOR, 'N', gx.N, d.data(),
                                   e.data(), nullptr, gx.N);
  if (info != 0) throw EigensolverFailure("1D eigensolve failed in 2D bottom");
  const double hy = gy.h();
  const double mu1 = 2.0 / (hy * hy) * (1.0 - std::cos(M_PI / (gy.N + 1)));
  const double sigma = d[0] + 0.5 * mu1;

  const double hx2 = gx.h() * gx.h(), hy2 = hy * hy;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(5 * n);
  auto id = [&](int ix, int iy) { return static_cast<long>(iy) * gx.N + ix; };
  for (int iy = 0; iy < gy.N; ++iy) {
    for (int ix = 0; ix < gx.N; ++ix) {
      long r = id(ix, iy);
      trip.emplace_back(r, r, 2.0 / hx2 + 2.0 / hy2 +
                              model.potential(gx.x(ix)) - sigma);
      if (ix > 0) trip.emplace_back(r, id(ix - 1, iy), -1.0 / hx2);
      if (ix + 1 < gx.N) trip.emplace_back(r, id(ix + 1, iy), -1.0 / hx2);
      if (iy > 0) trip.emplace_back(r, id(ix, iy - 1), -1.0 / hy2);
      if (iy + 1 < gy.N) trip.emplace_back(r, id(ix, iy + 1), -1.0 / hy2);
    }
  }
  Eigen::SparseMatrix<double> A(n, n);
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(A);
  if (llt.info() != Eigen::Success)
    throw EigensolverFailure("2D shifted operator is not positive definite");

  Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
  v.normalize();
  double rq_prev = 0.0;
  for (int it = 0; it < 200; ++it) {
    v = llt.solve(v);
    v.normalize();
    double rq = v.dot(A * v);
    if (it > 0 && std::fabs(rq - rq_prev) <= tol * std::max(1.0, std::fabs(rq)))
      return rq + sigma;
    rq_prev = rq;
  }
  throw EigensolverFailure("2D inverse iteration did not converge");
}

inline void export_modes_csv(const std::string& path, const Spectrum& s,
                             const std::vector<int>& modes) {
  std::ofstream out(path);
  out << "x";
  for (int j : modes) out << ",psi_" << j;
  out << "\n";
  out.precision(17);
  for (int i = 0; i < s.grid.N; ++i) {
    out << s.grid.x(i);
    for (int j : modes) out << "," << s.psi(i, j);
    out << "\n";
  }
}

}  // namespace kspec
