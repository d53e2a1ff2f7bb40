"""Shared reference numerics for freezing test constants.

Mirrors the library's discretization choices exactly (3-point stencil with
Dirichlet ghost points, trapezoid quadrature, continuum channel kernels,
channel truncation) so the values printed by the oracle scripts anchor the
C++ implementation against coding errors.  Method-level cross-checks
(shooting integration, closed-form reflectionless wells) live in
modes_1d.py and do not share this discretization.
"""
import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.signal import lfilter


def grid1d(L, N):
    return np.linspace(-L, L, N)


def trap_w(x):
    h = x[1] - x[0]
    w = np.full(len(x), h)
    w[0] = w[-1] = h / 2
    return w


def eig_h0(V, x):
    """Eigenpairs of -d2/dx2 + V on [-L,L], Dirichlet, trapezoid-normalized.

    Sign convention: first component larger than 1e-8 of the max is positive.
    """
    h = x[1] - x[0]
    d = 2.0 / h**2 + V
    e = np.full(len(x) - 1, -1.0 / h**2)
    lam, psi = eigh_tridiagonal(d, e)
    w = trap_w(x)
    psi = psi / np.sqrt(w @ psi**2)
    for j in range(psi.shape[1]):
        v = psi[:, j]
        big = np.abs(v) > 1e-8 * np.max(np.abs(v))
        if v[np.argmax(big)] < 0:
            psi[:, j] = -v
    return lam, psi


V_SG = lambda x: 1.0 - 2.0 / np.cosh(x)**2
V_P4 = lambda x: 4.0 - 6.0 / np.cosh(x)**2
V_SHALLOW = lambda x: 1.0 - 0.8 / np.cosh(x)**2
V_PT1 = lambda x: -2.0 / np.cosh(x)**2
V_PT2 = lambda x: -6.0 / np.cosh(x)**2
LAM_E = {"sine-gordon": 1.0, "phi4": 4.0, "shallow": 1.0, "pt1": 0.0, "pt2": 0.0}
MODELS = {"sine-gordon": V_SG, "phi4": V_P4, "shallow": V_SHALLOW,
          "pt1": V_PT1, "pt2": V_PT2}


def discrete_modes(lam, lam_e):
    """Indices of modes safely below the essential-spectrum edge."""
    floor = 0.05
    cand = lam[lam < lam_e - floor]
    if len(cand) == 0:
        return []
    margin = max(floor, 0.25 * (lam_e - cand.max()))
    return list(np.where(lam < lam_e - margin)[0])


def conv_exp(kap, y, w, g):
    """S_i = sum_j w_j e^{-kap|y_i-y_j|} g_j via two IIR scans, O(N)."""
    f = np.exp(-kap * (y[1] - y[0]))
    src = (w * g).astype(complex)
    Lf = lfilter([1.0], [1.0, -f], src)
    Rt = lfilter([1.0], [1.0, -f], src[::-1])[::-1]
    return Lf + Rt - src


def conv_abs(y, w, g):
    return np.abs(y[:, None] - y[None, :]) @ (w * g)


def rtilde_channel(cj, y, w, g, star, k=0.0):
    """Reduced-resolvent channel kernel (negative of the free resolvent in
    non-star channels; the star channel carries |y-t|/2 at k=0)."""
    if star:
        if abs(k) < 1e-12:
            return 0.5 * conv_abs(y, w, g.astype(complex))
        return (np.sum(w * g) - conv_exp(k, y, w, g)) / (2 * k)
    kap = np.sqrt(complex(cj + k**2))
    return -conv_exp(kap, y, w, g) / (2 * kap)


def assemble_corrector(lam, psi, jstar, x, gam_xy, lam_cut=None, k=0.0):
    """U(x,y) = sum_j psi_j(x) u_j(y) with u_j the channel kernel applied to
    the transverse source g_j(y) = <psi_j, gamma(.,y) psi_*>."""
    w = trap_w(x)
    src = gam_xy * psi[:, jstar][:, None]
    keep = (list(range(len(lam))) if lam_cut is None
            else [j for j in range(len(lam)) if lam[j] <= lam_cut])
    A = (psi[:, keep].T * w) @ src
    Uch = np.zeros((len(keep), len(x)), dtype=complex)
    for row, j in enumerate(keep):
        Uch[row] = rtilde_channel(lam[j] - lam[jstar], x, w, A[row],
                                  star=(j == jstar), k=k)
    return psi[:, keep].astype(complex) @ Uch


def K1_of(gam_xy, psi_s, x):
    w = trap_w(x)
    return 0.5 * float(w @ (gam_xy * psi_s[:, None]**2) @ w)


def K2_of(gam_xy, psi_s, U, x):
    w = trap_w(x)
    return 0.5 * complex(w @ (gam_xy * psi_s[:, None] * U) @ w)


def gam_eval(kind, x, y, **p):
    X, Y = x[:, None], y[None, :]
    a = p.get("alpha", 1.0)
    A = p.get("A", 1.0)
    if kind == "x-gauss":
        return A * X * np.exp(-a * (X**2 + Y**2))
    if kind == "y-gauss":
        return A * Y * np.exp(-a * (X**2 + Y**2))
    if kind == "xy-gauss":
        return A * X * Y * np.exp(-a * (X**2 + Y**2))
    if kind == "even-gauss":
        return A * np.exp(-a * X**2 - p.get("beta", a) * Y**2)
    if kind == "lobes":
        y0, b = p["y0"], p.get("beta", 4.0)
        return A * np.exp(-a * X**2) * (np.exp(-b * (Y - y0)**2)
                                        + np.exp(-b * (Y + y0)**2))
    raise ValueError(kind)


class ScalarReduction:
    """Windowed scalar reduction 2k = F(eps,k) for the perturbed pencil.

    Restricts the main grid to |x| <= W with the given stride, truncates
    channels at lam_* + lam_cut_offset, and solves for the root k near 0 by
    Newton iteration on G(k) = 2k - F(eps,k) with the series warm start.
    """

    def __init__(self, V, lam_e, jsel, gname, gp, L=20.0, N=2001, W=8.0,
                 stride=2, lam_cut_offset=150.0):
        x = grid1d(L, N)
        lam, psi = eig_h0(V(x), x)
        dm = discrete_modes(lam, lam_e)
        self.jstar = dm[jsel]
        self.lam_star = lam[self.jstar]
        self.kap2 = complex(self.lam_star)
        idx = np.where(np.abs(x) <= W + 1e-12)[0][::stride]
        self.xw = x[idx]
        self.ww = trap_w(self.xw)
        keep = [j for j in range(len(lam))
                if lam[j] <= self.lam_star + lam_cut_offset]
        self.lams = lam[keep]
        self.Psi = psi[idx][:, keep]
        self.istar = keep.index(self.jstar)
        self.gam = gam_eval(gname, self.xw, self.xw, **gp)
        self.psis = self.Psi[:, self.istar]
        self.src = self.gam * self.psis[:, None]
        self.PsiW = (self.Psi * self.ww[:, None]).T
        self.K1 = K1_of(self.gam, self.psis, self.xw)
        U0 = self.rtilde_apply(0.0, self.src)
        self.K2 = 0.5 * complex(self.ww @ (self.gam * self.psis[:, None] * U0)
                                @ self.ww)

    def lam_of_k(self, k, b):
        return b * 1j * np.sqrt(self.kap2 - k * k)

    def rtilde_apply(self, k, g):
        A = self.PsiW @ g
        out = np.zeros((len(self.lams), g.shape[1]), dtype=complex)
        for r in range(len(self.lams)):
            out[r] = rtilde_channel(self.lams[r] - self.lam_star, self.xw,
                                    self.ww, A[r], star=(r == self.istar), k=k)
        return self.Psi.astype(complex) @ out

    def F(self, eps, k, b, tol=1e-12, maxit=100):
        lam = self.lam_of_k(k, b)
        g = self.src.astype(complex)
        for it in range(maxit):
            gn = self.src + eps * lam * self.gam * self.rtilde_apply(k, g)
            d = np.max(np.abs(gn - g))
            g = gn
            if d <= tol * max(1.0, np.max(np.abs(g))):
                break
        else:
            raise RuntimeError(f"no contraction: eps={eps} k={k} resid={d}")
        ell = self.ww @ (self.psis[:, None] * g) @ self.ww
        return -eps * lam * ell, it + 1

    def solve_k(self, eps, b, k0=None, maxiter=40):
        if k0 is None:
            k0 = (-b * 1j * eps * np.sqrt(self.kap2) * self.K1
                  + eps**2 * self.kap2 * self.K2)
        k = complex(k0)
        for it in range(maxiter):
            Fv, nit = self.F(eps, k, b)
            G = 2 * k - Fv
            if abs(G) <= 1e-12 * max(1.0, abs(k)):
                return k, abs(G), it, nit
            d = 1e-7 * max(1.0, abs(k))
            Gp = (2 * (k + d) - self.F(eps, k + d, b)[0]
                  - (2 * (k - d) - self.F(eps, k - d, b)[0])) / (2 * d)
            k = k - G / Gp
        Fv, nit = self.F(eps, k, b)
        return k, abs(2 * k - Fv), maxiter, nit
