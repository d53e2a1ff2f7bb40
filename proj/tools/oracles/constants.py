#!/usr/bin/env python3
"""Oracle for the perturbation constants and scalar-equation roots.

Prints, at full precision, every derived number frozen into the C++ tests:

  * K1 and K2 for the pinned case-table configurations (main grid),
  * K2 grid-refinement deltas (N=1001 vs N=2001),
  * channel-truncation error of the corrector (criterion-6 config),
  * windowed K1/K2 and scalar-equation roots for the root-vs-series sweep,
  * roots and decay rates for the evolution configuration.

Everything here mirrors the library's discretization (common.py); the
independence of the method is established separately in modes_1d.py and
by the closed-form kernel identities exercised in the C++ unit tests.
"""
import numpy as np

from common import (MODELS, LAM_E, grid1d, trap_w, eig_h0, discrete_modes,
                    assemble_corrector, K1_of, K2_of, gam_eval, ScalarReduction)

CASES = [
    # tag, model, mode index, profile, params
    ("st2", "shallow", 0, "lobes", dict(A=1.0, alpha=1.0, y0=4.0, beta=4.0)),
    ("st3", "shallow", 0, "x-gauss", dict(A=1.0, alpha=1.0)),
    ("st4", "pt1", 0, "even-gauss", dict(A=1.0, alpha=1.0, beta=1.0)),
    ("st5", "pt2", 1, "x-gauss", dict(A=1.0, alpha=1.0)),
    ("st6", "pt1", 0, "y-gauss", dict(A=1.0, alpha=1.0)),
    ("c46", "phi4", 1, "x-gauss", dict(A=1.0, alpha=1.0)),
    ("ev", "phi4", 1, "even-gauss", dict(A=-1.5, alpha=1.0, beta=0.25)),
]


def constants_on_grid(N):
    print(f"--- constants, L=20 N={N}, channel cut lam_*+150 ---")
    out = {}
    for tag, model, jsel, gname, gp in CASES:
        x = grid1d(20.0, N)
        lam, psi = eig_h0(MODELS[model](x), x)
        jstar = discrete_modes(lam, LAM_E[model])[jsel]
        gxy = gam_eval(gname, x, x, **gp)
        U = assemble_corrector(lam, psi, jstar, x, gxy, lam_cut=lam[jstar] + 150.0)
        K1 = K1_of(gxy, psi[:, jstar], x)
        K2 = K2_of(gxy, psi[:, jstar], U, x)
        print(f"{tag:4s} {model:9s} mode{jsel} lam*={lam[jstar]:+.12f}  "
              f"K1={K1:+.12e}  K2={K2.real:+.12e}{K2.imag:+.12e}j")
        out[tag] = (K1, K2)
    return out


def truncation_study():
    print("--- corrector channel-truncation error (c46 config) ---")
    x = grid1d(20.0, 2001)
    lam, psi = eig_h0(MODELS["phi4"](x), x)
    jstar = discrete_modes(lam, 4.0)[1]
    gxy = gam_eval("x-gauss", x, x, A=1.0, alpha=1.0)
    w = trap_w(x)
    Ufull = assemble_corrector(lam, psi, jstar, x, gxy, lam_cut=None)
    K2f = K2_of(gxy, psi[:, jstar], Ufull, x)
    den = np.sqrt(float(np.sum(w[:, None] * w[None, :] * np.abs(Ufull)**2)))
    for cut in (50.0, 100.0, 150.0, 250.0):
        Uc = assemble_corrector(lam, psi, jstar, x, gxy, lam_cut=lam[jstar] + cut)
        num = np.sqrt(float(np.sum(w[:, None] * w[None, :] * np.abs(Uc - Ufull)**2)))
        K2c = K2_of(gxy, psi[:, jstar], Uc, x)
        print(f"  cut=lam*+{cut:5.0f}: rel U err {num/den:.3e}   "
              f"|dK2| {abs(K2c - K2f):.3e}")


def root_sweep():
    print("--- scalar-equation roots, c46 config, window W=8 stride 2 ---")
    P = ScalarReduction(MODELS["phi4"], 4.0, 1, "x-gauss", dict(A=1.0, alpha=1.0))
    print(f"  window K1={P.K1:+.12e}  K2={P.K2.real:+.12e}{P.K2.imag:+.12e}j")
    errs, epss = [], [0.1, 0.05, 0.025, 0.0125]
    for eps in epss:
        for b in (+1, -1):
            k, res, nits, fits = P.solve_k(eps, b)
            pred = (-b * 1j * eps * np.sqrt(P.kap2) * P.K1
                    + eps**2 * P.kap2 * P.K2)
            print(f"  eps={eps:7.4f} b={b:+d}  "
                  f"k={k.real:+.12e}{k.imag:+.12e}j  "
                  f"|k-pred|={abs(k - pred):.3e}  res={res:.1e}")
            if b == +1:
                errs.append(abs(k - pred))
    slope = np.polyfit(np.log(epss), np.log(errs), 1)[0]
    print(f"  fitted order (b=+1): {slope:.3f}")


def evolution_roots():
    print("--- evolution configuration roots (phi4 mode1, even-gauss "
          "beta=0.25, eps=0.2) ---")
    for A in (-1.5, 1.5):
        E = ScalarReduction(MODELS["phi4"], 4.0, 1, "even-gauss",
                            dict(A=A, alpha=1.0, beta=0.25))
        print(f"  A={A:+.2f}: window K1={E.K1:+.12e}  "
              f"K2={E.K2.real:+.12e}{E.K2.imag:+.12e}j")
        for b in (+1, -1):
            k, res, nits, fits = E.solve_k(0.2, b)
            lam = E.lam_of_k(k, b)
            print(f"    b={b:+d}  k={k.real:+.12e}{k.imag:+.12e}j  "
                  f"lam={lam.real:+.12e}{lam.imag:+.12e}j  res={res:.1e}")


def main():
    constants_on_grid(2001)
    c1 = constants_on_grid(1001)
    truncation_study()
    root_sweep()
    evolution_roots()


if __name__ == "__main__":
    main()
