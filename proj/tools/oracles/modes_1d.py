#!/usr/bin/env python3
"""Oracle for the 1D transverse spectrum.

Three independent methods pin the discrete eigenvalues of
H = -d2/dx2 + V(x):

  1. closed forms for reflectionless wells V = c - s(s+1) sech^2(x),
     whose bound states sit at c - (s-n)^2 for n = 0..floor(s),
  2. two-sided shooting integration with dense-output RK45 (no shared
     discretization with the library),
  3. the library's own discretization (tridiagonal matrix, Dirichlet
     ghosts, L=20, N=2001), whose values are frozen into the C++ tests.

The printed table is the contract: column 3 anchors test_operator1d.cpp,
columns 1-2 bound the discretization error independently.
"""
import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from common import MODELS, LAM_E, grid1d, eig_h0, discrete_modes


def analytic_levels(name):
    # V = c - s(s+1) sech^2 x has bound states at c - (s-n)^2, n=0..floor(s)
    coef = {"sine-gordon": (1.0, 1.0), "phi4": (4.0, 2.0),
            "shallow": (1.0, (-1.0 + np.sqrt(4.2)) / 2.0),
            "pt1": (0.0, 1.0), "pt2": (0.0, 2.0)}
    c, s = coef[name]
    return [c - (s - n)**2 for n in range(int(np.floor(s)) + 1)
            if c - (s - n)**2 < c - 1e-9]


def shoot_level(V, lam_e, lo, hi, L=20.0):
    """Eigenvalue in (lo,hi) by matching log-derivatives of two-sided decaying
    solutions at x=0; root of the Wronskian in the eigenvalue parameter."""
    def wronskian(lam):
        kap = np.sqrt(lam_e - lam)
        def rhs(x, u):
            return [u[1], (V(np.array([x]))[0] - lam) * u[0]]
        sl = solve_ivp(rhs, [-L, 0.0], [1e-12, kap * 1e-12],
                       rtol=1e-11, atol=1e-16)
        sr = solve_ivp(rhs, [L, 0.0], [1e-12, -kap * 1e-12],
                       rtol=1e-11, atol=1e-16)
        ul, dl = sl.y[0][-1], sl.y[1][-1]
        ur, dr = sr.y[0][-1], sr.y[1][-1]
        return dl * ur - dr * ul
    return brentq(wronskian, lo, hi, xtol=1e-13, rtol=8.9e-16)


def main():
    x = grid1d(20.0, 2001)
    print("model          n   analytic             shooting             "
          "discrete (L=20,N=2001)")
    for name, V in MODELS.items():
        lam, _ = eig_h0(V(x), x)
        dm = discrete_modes(lam, LAM_E[name])
        ana = analytic_levels(name)
        for n, j in enumerate(dm):
            width = min(0.4, 0.5 * (LAM_E[name] - ana[n]))
            sh = shoot_level(V, LAM_E[name], ana[n] - width, ana[n] + width)
            print(f"{name:12s}  {n}   {ana[n]:+.12f}   {sh:+.12f}   "
                  f"{lam[j]:+.12f}")
        print(f"{'':12s}      discrete-vs-analytic max "
              f"{max(abs(lam[j] - a) for j, a in zip(dm, ana)):.3e}")

    print("\nh-refinement of the phi4 internal mode (order check):")
    errs = []
    for N in (501, 1001, 2001):
        xs = grid1d(20.0, N)
        lam, _ = eig_h0(MODELS["phi4"](xs), xs)
        j = discrete_modes(lam, 4.0)[1]
        errs.append(abs(lam[j] - 3.0))
        print(f"  N={N:5d}  |lam1 - 3| = {errs[-1]:.6e}")
    hs = [40.0 / (N - 1) for N in (501, 1001, 2001)]
    slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
    print(f"  order: {slope:.3f}")


if __name__ == "__main__":
    main()
