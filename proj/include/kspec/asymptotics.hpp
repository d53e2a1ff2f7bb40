// Perturbation constants and the small-eps eigenvalue/resonance prediction.
//   K1 = 1/2 iint gamma psi_*^2 dx dy
//   K2 = 1/2 iint gamma psi_* U_* dx dy,  U_* the corrector field
// The perturbed transverse decay rate expands as
//   k(eps) = c1 eps + c2 eps^2 + O(eps^3),  c1 = -b i kap K1,  c2 = kap^2 K2
// with kap = sqrt(Lambda_*) on the principal branch and b = +-1 selecting
// the branch lambda ~ b i kap.  The mode kind follows the sign of Re k at
// the first order where it does not vanish: Re k > 0 decays transversely
// (eigenvalue), Re k < 0 grows (resonance).
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "kspec/corrector.hpp"
#include "kspec/errors.hpp"
#include "kspec/gamma.hpp"
#include "kspec/grid.hpp"
#include "kspec/operator1d.hpp"

namespace kspec {

inline double compute_K1(const GammaSpec& gamma, const Spectrum& sx, int jstar,
                         const Grid1D& gy) {
  const auto wx = sx.grid.weights();
  const auto wy = gy.weights();
  double acc = 0.0;
  for (int iy = 0; iy < gy.N; ++iy) {
    double row = 0.0;
    for (int ix = 0; ix < sx.grid.N; ++ix) {
      double p = sx.psi(ix, jstar);
      row += wx[ix] * gamma.eval(sx.grid.x(ix), gy.x(iy)) * p * p;
    }
    acc += wy[iy] * row;
  }
  return 0.5 * acc;
}

inline cd compute_K2(const GammaSpec& gamma, const Spectrum& sx, int jstar,
                     const CorrectorField& U, const Grid1D& gy) {
  const auto wx = sx.grid.weights();
  const auto wy = gy.weights();
  cd acc = 0.0;
  for (int iy = 0; iy < gy.N; ++iy) {
    cd row = 0.0;
    for (int ix = 0; ix < sx.grid.N; ++ix)
      row += wx[ix] * gamma.eval(sx.grid.x(ix), gy.x(iy)) *
             sx.psi(ix, jstar) * U.values(ix, iy);
    acc += wy[iy] * row;
  }
  return 0.5 * acc;
}

// lambda_b(k) = b i sqrt(kap^2 - k^2), principal branch, continued from the
// upper side when the argument touches the cut.  Requires |k| < |kap| so the
// branch point is never crossed.
inline cd lambda_of_k(cd k, cd kappa_star, int b) {
  if (std::abs(k) >= std::abs(kappa_star))
    throw BranchCut("|k| >= |kappa_star|: outside the branch-continuity disc");
  cd s = kappa_star * kappa_star - k * k;
  if (s.real() < 0.0 && std::fabs(s.imag()) <= 1e-14 * std::fabs(s.real()))
    s = cd(s.real(), +0.0);
  return cd(0.0, b) * std::sqrt(s);
}

enum class ModeKind { eigenvalue, resonance, undetermined };

inline const char* kind_name(ModeKind k) {
  switch (k) {
    case ModeKind::eigenvalue: return "eigenvalue";
    case ModeKind::resonance: return "resonance";
    default: return "undetermined";
  }
}

struct BranchPrediction {
  int b = +1;
  cd c1{0.0, 0.0};             // k(eps) = c1 eps + c2 eps^2 + ...
  cd c2{0.0, 0.0};
  ModeKind kind = ModeKind::undetermined;
  std::vector<cd> k;           // series value per requested eps
  std::vector<cd> lambda;      // lambda series per requested eps
};

struct SpectralPrediction {
  double lambda_star = 0.0;
  cd kappa_star{0.0, 0.0};
  double K1 = 0.0;
  cd K2{0.0, 0.0};
  int case_id = 0;             // classification case 1..6, 0 = outside table
  bool extended_regime = false;  // open channels present, K2 generally complex
  bool degenerate = false;       // K1 and K2 both vanish at this order
  double re_lambda_coeff3 = 0.0;  // Re lambda = coeff * eps^3 + O(eps^4), K1 != 0
  std::array<BranchPrediction, 2> branches;
  std::vector<double> eps;
};

struct PredictOptions {
  double zero_mode_tol = 1e-3;  // |Lambda_*| below this is the zero mode
  double k1_tol = 1e-8;         // |K1| below this counts as vanishing
  double kind_rel_tol = 1e-12;  // Re c_n below this (relative) is treated as 0
  bool throw_on_degenerate = true;
};

namespace detail {

inline ModeKind kind_from_series(cd c1, cd c2, double rel_tol) {
  double scale = std::max(std::abs(c1), std::abs(c2));
  if (scale <= 0.0) return ModeKind::undetermined;
  if (std::fabs(c1.real()) > rel_tol * scale)
    return c1.real() > 0.0 ? ModeKind::eigenvalue : ModeKind::resonance;
  if (std::fabs(c2.real()) > rel_tol * scale)
    return c2.real() > 0.0 ? ModeKind::eigenvalue : ModeKind::resonance;
  return ModeKind::undetermined;
}

}  // namespace detail

inline SpectralPrediction predict(const Spectrum& sx, int jstar,
                                  const GammaSpec& gamma, const Grid1D& gy,
                                  const std::vector<double>& eps_list,
                                  const CorrectorField& U,
                                  const PredictOptions& opt = {}) {
  SpectralPrediction out;
  out.lambda_star = sx.lambda[jstar];
  out.kappa_star = std::sqrt(cd(out.lambda_star, 0.0));
  out.K1 = compute_K1(gamma, sx, jstar, gy);
  out.K2 = compute_K2(gamma, sx, jstar, U, gy);
  out.eps = eps_list;
  for (int j : U.kept)
    if (sx.lambda[j] < out.lambda_star - 1e-12) out.extended_regime = true;

  if (std::fabs(out.K1) < 1e-13 && std::abs(out.K2) < 1e-13) {
    out.degenerate = true;
    if (opt.throw_on_degenerate)
      throw Undetermined("degenerate perturbation (K1 = K2 = 0): "
                         "prediction undetermined at this order");
    return out;
  }

  const cd kap = out.kappa_star;
  const bool k1_zero = std::fabs(out.K1) < opt.k1_tol;
  out.re_lambda_coeff3 = -out.lambda_star * out.K1 * out.K2.real();

  if (std::fabs(out.lambda_star) < opt.zero_mode_tol) {
    out.case_id = 1;  // zero mode: unmoved at every order computed here
  } else if (out.lambda_star > 0.0) {
    double re_c2 = (kap * kap * out.K2).real();
    out.case_id = re_c2 > 0.0 ? 2 : 3;
  } else {
    if (!k1_zero)
      out.case_id = 4;
    else
      out.case_id = out.K2.real() > 0.0 ? 5 : 6;
  }

  for (int ib = 0; ib < 2; ++ib) {
    BranchPrediction& br = out.branches[ib];
    br.b = ib == 0 ? +1 : -1;
    br.c1 = -cd(0.0, br.b) * kap * out.K1;
    br.c2 = kap * kap * out.K2;
    // a vanishing K1 (quadrature roundoff) must not leak a spurious Re c1:
    // the case table and the sign-of-series derivations have to agree
    br.kind = out.case_id == 1
                  ? ModeKind::undetermined
                  : detail::kind_from_series(k1_zero ? cd(0.0) : br.c1, br.c2,
                                             opt.kind_rel_tol);
    br.k.reserve(eps_list.size());
    br.lambda.reserve(eps_list.size());
    for (double e : eps_list) {
      br.k.push_back(br.c1 * e + br.c2 * e * e);
      cd lam = cd(0.0, br.b) * kap;
      if (!k1_zero) {
        lam += cd(0.0, br.b) * kap * (out.K1 * out.K1 / 2.0) * e * e;
        lam += -out.lambda_star * out.K1 * out.K2 * e * e * e;
      } else {
        lam += -cd(0.0, br.b) * 0.5 * kap * kap * kap * out.K2 * out.K2 *
               e * e * e * e;
      }
      br.lambda.push_back(lam);
    }
  }
  return out;
}

}  // namespace kspec
