"""Mode stability for the linearization around the ODE blowup profile in d = 5.

Separating u1 = rho^l R(rho) Y_l in (L_0 - lambda) u = 0 and setting z = rho^2
gives the hypergeometric equation with

    a = (lambda + l - 1) / 2,  b = (lambda + l + 4) / 2,  c = 5/2 + l.

A solution regular at both rho = 0 and rho = 1 forces a or b to be a pole of
Gamma, i.e. a zero of s(lambda, l) = 1 / (Gamma(a) Gamma(b)). For Re lambda > -1
this leaves (lambda, l) = (1, 0) and (0, 1).
"""
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma, rgamma

from . import geometry
from .discretization import FieldPair, ScalarField
from .errors import ConvergenceError, PoleError, UnsupportedDimension

SERIES_TOL = 1e-17
MAX_TERMS = 20_000
# above this the 1 - z connection formula is used; below it the direct series
# is both convergent and free of the Gamma-factor cancellation that the
# connection formula suffers near z = 1/2 for large parameters
DIRECT_SERIES_MAX_Z = 0.9


@dataclass(frozen=True)
class SpectralParams:
    lam: complex
    l: int
    d: int = 5

    def __post_init__(self):
        if self.d != 5:
            raise UnsupportedDimension("hypergeometric reduction implemented for d = 5")

    @property
    def a(self):
        return (self.lam + self.l - 1) / 2

    @property
    def b(self):
        return (self.lam + self.l + 4) / 2

    @property
    def c(self):
        return 2.5 + self.l


def _is_nonpositive_int(x):
    x = complex(x)
    return x.imag == 0 and x.real <= 0 and float(x.real).is_integer()


def _series(a, b, c, z):
    term = 1.0 + 0j
    total = term
    small = 0
    for n in range(MAX_TERMS):
        term *= (a + n) * (b + n) / ((c + n) * (n + 1)) * z
        total += term
        if term == 0:
            return total
        small = small + 1 if abs(term) <= SERIES_TOL * max(abs(total), 1e-300) else 0
        if small >= 3:
            return total
    raise ConvergenceError("hypergeometric series did not converge")


def hyp2f1(a, b, c, z):
    """Gauss hypergeometric function for real z in [0, 1).

    Direct power series for z <= 0.9 (adaptive truncation). Above 0.9 the
    connection formula to 1 - z is used when c - a - b is not an integer;
    in the integer case the direct series is still convergent and is summed.
    """
    if _is_nonpositive_int(c):
        raise PoleError("c is a non-positive integer")
    z = float(z)
    if not 0 <= z < 1:
        raise ValueError("z must lie in [0, 1)")
    s = c - a - b
    if z <= DIRECT_SERIES_MAX_Z or (np.imag(s) == 0 and float(np.real(s)).is_integer()):
        val = _series(a, b, c, z)
    else:
        w = 1 - z
        t1 = gamma(c) * gamma(s) * rgamma(c - a) * rgamma(c - b) * _series(a, b, 1 - s, w)
        t2 = w**s * gamma(c) * gamma(-s) * rgamma(a) * rgamma(b) * _series(c - a, c - b, 1 + s, w)
        val = t1 + t2
    return complex(val) if np.iscomplexobj(val) and np.imag(val) != 0 else float(np.real(val))


def aux_params(l):
    """Parameters of the auxiliary equation: a = (5 + 2l)/4, b = a + 1/2, c = 2a."""
    a = (5 + 2 * l) / 4
    return a, a + 0.5, 2 * a


def phi0(l, z):
    """Closed form of 2F1(a, a + 1/2; 2a; z), analytic at z = 0."""
    s = np.sqrt(1 - np.asarray(z, dtype=float))
    return (2 / (1 + s)) ** (1.5 + l) / s


def phi1(l, z):
    """Closed form of 2F1(a, a + 1/2; 3/2; 1 - z), analytic at z = 1."""
    s = np.sqrt(1 - np.asarray(z, dtype=float))
    p = 1.5 + l
    return ((1 - s) ** (-p) - (1 + s) ** (-p)) / (2 * p * s)


def dphi0(l, z):
    s = np.sqrt(1 - np.asarray(z, dtype=float))
    p = 1.5 + l
    return phi0(l, z) * (1 / (2 * s**2) + p / (2 * s * (1 + s)))


def dphi1(l, z):
    s = np.sqrt(1 - np.asarray(z, dtype=float))
    p = 1.5 + l
    N = (1 - s) ** (-p) - (1 + s) ** (-p)
    dN = p * (1 - s) ** (-p - 1) + p * (1 + s) ** (-p - 1)
    dds = (dN * s - N) / (2 * p * s**2)
    return dds * (-1 / (2 * s))


def psi_pair(l, rho):
    """psi_j = rho^(l+1) phi_j(rho^2) and their rho-derivatives."""
    rho = np.asarray(rho, dtype=float)
    z = rho**2
    out = []
    for f, df in ((phi0, dphi0), (phi1, dphi1)):
        val = rho ** (l + 1) * f(l, z)
        der = (l + 1) * rho**l * f(l, z) + 2 * rho ** (l + 2) * df(l, z)
        out.append((val, der))
    return out


def wronskian_exact(l, rho):
    rho = np.asarray(rho, dtype=float)
    return -(2.0 ** (l + 1.5)) / (rho**2 * (1 - rho**2) ** 1.5)


def wronskian(l, rho):
    (p0, d0), (p1, d1) = psi_pair(l, rho)
    return p0 * d1 - d0 * p1


def wronskian_check(l, rho):
    """Max relative deviation of W(psi_0, psi_1) from the closed form on rho."""
    w = wronskian(l, rho)
    ex = wronskian_exact(l, rho)
    return float(np.max(np.abs(w - ex) / np.abs(ex)))


def reciprocal_gamma_product(lam, l):
    """1/(Gamma((lam+l-1)/2) Gamma((lam+l+4)/2)); zero exactly at the mode-equation eigenvalues."""
    a = (np.asarray(lam) + l - 1) / 2
    b = (np.asarray(lam) + l + 4) / 2
    return rgamma(a) * rgamma(b)


def scan_grid(re_min=-1.0, re_max=3.0, im_max=5.0, step=0.02):
    """Lattice points with re_min < Re <= re_max and |Im| <= im_max, exact multiples of step."""
    k_lo = int(np.floor(re_min / step + 1e-9)) + 1
    k_hi = int(np.floor(re_max / step + 1e-9))
    re = np.arange(k_lo, k_hi + 1) * step
    m = int(np.floor(im_max / step + 1e-9))
    im = np.arange(-m, m + 1) * step
    return re, im


def mode_stability_scan(l_max=8, re_min=-1.0, re_max=3.0, im_max=5.0, step=0.02, flag_tol=1e-8):
    """Evaluate |s(lambda, l)| on a rectangular grid and flag near-zeros.

    Returns dict with 're', 'im', 'abs_s' (shape (l_max+1, n_re, n_im)) and
    'flagged', a list of (lambda, l).
    """
    re, im = scan_grid(re_min, re_max, im_max, step)
    lam = re[:, None] + 1j * im[None, :]
    abs_s = np.stack([np.abs(reciprocal_gamma_product(lam, l)) for l in range(l_max + 1)])
    flagged = [(complex(lam[i, j]), int(l)) for l, i, j in zip(*np.nonzero(abs_s < flag_tol))]
    return {"re": re, "im": im, "abs_s": abs_s, "flagged": flagged, "step": step}


def eigenfunctions(grid, alpha=0.0, which="g"):
    """Closed-form eigenfunction g_alpha (eigenvalue 1) or h_alpha,axis (eigenvalue 0)."""
    from .operators import _check_admissible, axis_component

    a = axis_component(alpha, grid)
    _check_admissible(a)
    if which == "g":
        c, s = np.cosh(a), np.sinh(a)
        D = c - s * grid.Z
        return FieldPair(ScalarField(c / D**2, grid), ScalarField(2 * c**2 / D**3, grid))
    if which == "h":
        _, _, h1, h2 = geometry.axis_profile_derivatives(grid.Z, a)
        return FieldPair(ScalarField(h1, grid), ScalarField(h2, grid))
    raise ValueError("which must be 'g' or 'h'")


def _atanh_tail(rho):
    """G = (2 atanh rho - 2(rho + rho^3/3 + rho^5/5)) / (10 rho^4) and two derivatives.

    Summed as (1/5) sum_{k>=3} rho^(2k-3) / (2k+1) for small rho, where the
    closed form suffers cancellation.
    """
    rho = np.asarray(rho, dtype=float)
    G, G1, G2 = (np.zeros_like(rho) for _ in range(3))
    small = rho < 0.5
    r = rho[small]
    for k in range(3, 80):
        p = 2 * k - 3
        G[small] += r**p / (2 * k + 1) / 5
        G1[small] += p * r ** (p - 1) / (2 * k + 1) / 5
        if p > 1:
            G2[small] += p * (p - 1) * r ** (p - 2) / (2 * k + 1) / 5
    r = rho[~small]
    N = 2 * np.arctanh(r) - 2 * (r + r**3 / 3 + r**5 / 5)
    N1 = 2 * r**6 / (1 - r**2)
    N2 = (12 * r**5 - 8 * r**7) / (1 - r**2) ** 2
    G[~small] = N / (10 * r**4)
    G1[~small] = N1 / (10 * r**4) - 4 * N / (10 * r**5)
    G2[~small] = N2 / (10 * r**4) - 8 * N1 / (10 * r**5) + 20 * N / (10 * r**6)
    return G, G1, G2


def multiplicity_solution(rho, c0=0.0):
    """u = c0 rho + (rho/10) log(1 - rho^2) + G(rho) with u', u''."""
    rho = np.asarray(rho, dtype=float)
    G, G1, G2 = _atanh_tail(rho)
    L = np.log1p(-rho**2)
    q = rho * L / 10
    q1 = L / 10 - rho**2 / (5 * (1 - rho**2))
    q2 = -rho / (5 * (1 - rho**2)) - 2 * rho / (5 * (1 - rho**2) ** 2)
    return c0 * rho + q + G, c0 + q1 + G1, q2 + G2


def multiplicity_ode_check(rho, c0=0.0):
    """Max residual of u'' + (4/rho) u' - (4/rho^2) u + rho / (1 - rho^2)."""
    rho = np.asarray(rho, dtype=float)
    u, u1, u2 = multiplicity_solution(rho, c0)
    res = u2 + 4 / rho * u1 - 4 / rho**2 * u + rho / (1 - rho**2)
    return float(np.abs(res).max())


def homogeneous_pair_check(rho):
    """Residuals of rho and rho^-4 in the homogeneous equation and of W = -5 rho^-4."""
    rho = np.asarray(rho, dtype=float)
    phi, dphi, ddphi = rho, np.ones_like(rho), np.zeros_like(rho)
    psi, dpsi, ddpsi = rho**-4, -4 * rho**-5, 20 * rho**-6
    r_phi = np.abs(ddphi + 4 / rho * dphi - 4 / rho**2 * phi).max()
    r_psi = np.abs((ddpsi + 4 / rho * dpsi - 4 / rho**2 * psi) * rho**6).max()
    W = phi * dpsi - dphi * psi
    r_w = np.abs(W / (-5 * rho**-4) - 1).max()
    return float(r_phi), float(r_psi), float(r_w)


def boundary_growth_marker(n=12):
    """Behaviour of the particular solution as rho -> 1.

    On rho_k = 1 - 10^-k the first derivative grows like |log(1 - rho)| and
    the second derivative grows without bound. Returns the node sequence, u',
    u'' and the ratios u' / log(1 - rho).
    """
    rho = 1 - 10.0 ** -np.arange(1, n + 1)
    _, u1, u2 = multiplicity_solution(rho)
    return {"rho": rho, "du": u1, "ddu": u2, "log_ratio": u1 / np.log(1 - rho),
            "ddu_monotone": bool(np.all(np.diff(np.abs(u2)) > 0))}
