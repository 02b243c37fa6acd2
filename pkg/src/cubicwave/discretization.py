"""Axisymmetric collocation on the unit ball of R^d.

Fields are sampled on a tensor grid (rho_i, mu_j), mu = cos(theta) measured
from the boost axis. Radial nodes are the positive half of an even-sized
Chebyshev extreme-point grid on [-1, 1]; values at negative rho are supplied by
the parity rule f(-rho, mu) = f(rho, -mu), so rho = 0 is never a node. Each
radial or angular derivative flips the sign in that rule. Angular
nodes are Gauss-Gegenbauer nodes for the weight (1 - mu^2)^((d-3)/2), i.e.
sin^(d-2)(theta) d(theta).

Cartesian derivatives use the representation f(xi) = H(z, w) with z the axial
coordinate and w = |xi_perp|^2. The operators d/dz and d/dw map smooth
axisymmetric functions to smooth axisymmetric functions, so they can be applied
repeatedly on the grid. Non-axial derivatives are reported on the meridional
half-plane spanned by the axis and the first transverse direction.

A second representation, HarmonicBasis, expands fields in the regular basis
rho^l P_n^{(0, l + d/2 - 1)}(2 rho^2 - 1) C_l(mu). Every member is smooth at
the origin, the free operator maps it into itself, and transforms between grid
values and coefficients only ever multiply by rho^l.
"""
import itertools
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from math import factorial

import numpy as np
from scipy.fft import dct
from scipy.special import eval_gegenbauer, eval_jacobi, gamma, roots_jacobi

from .errors import ConfigError, ResolutionWarning

TAIL_THRESHOLD = 1e-6
CHOP_TOL = 1e-14


def cheb_extreme(M):
    """Chebyshev extreme points cos(k pi / M) and the differentiation matrix."""
    k = np.arange(M + 1)
    x = np.cos(np.pi * k / M)
    c = np.hstack([2.0, np.ones(M - 1), 2.0]) * (-1.0) ** k
    dX = x[:, None] - x[None, :]
    D = np.outer(c, 1.0 / c) / (dX + np.eye(M + 1))
    D -= np.diag(D.sum(axis=1))
    return x, D


def clenshaw_curtis(M):
    """Clenshaw-Curtis weights on the M + 1 extreme points (Trefethen's clencurt)."""
    theta = np.pi * np.arange(M + 1) / M
    w = np.zeros(M + 1)
    ii = np.arange(1, M)
    v = np.ones(M - 1)
    if M % 2 == 0:
        w[0] = w[M] = 1.0 / (M**2 - 1)
        for k in range(1, M // 2):
            v -= 2 * np.cos(2 * k * theta[ii]) / (4 * k**2 - 1)
        v -= np.cos(M * theta[ii]) / (M**2 - 1)
    else:
        w[0] = w[M] = 1.0 / M**2
        for k in range(1, (M - 1) // 2 + 1):
            v -= 2 * np.cos(2 * k * theta[ii]) / (4 * k**2 - 1)
    w[ii] = 2 * v / M
    return w


def barycentric_diff(x):
    """Differentiation matrix for polynomial interpolation on the nodes x."""
    n = len(x)
    dX = x[:, None] - x[None, :] + np.eye(n)
    w = 1.0 / np.prod(dX, axis=1)
    D = (w[None, :] / w[:, None]) / dX
    np.fill_diagonal(D, 0.0)
    D -= np.diag(D.sum(axis=1))
    return D


def sphere_area(d):
    """|S^{d-1}|."""
    return 2 * np.pi ** (d / 2) / gamma(d / 2)


def ball_volume(d):
    return sphere_area(d) / d


@dataclass(frozen=True)
class GridSpec:
    d: int = 5
    n_r: int = 32
    n_theta: int = 8
    axis: int | None = None

    def __post_init__(self):
        if self.d < 3 or self.d % 2 == 0:
            raise ConfigError("dimension must be odd and at least 3")
        if self.n_r < 8 or self.n_theta < 4:
            raise ConfigError("need n_r >= 8 and n_theta >= 4")
        if self.axis is not None and not 0 <= self.axis < self.d:
            raise ConfigError("axis index out of range")

    @property
    def axis_index(self):
        return self.d - 1 if self.axis is None else self.axis

    @property
    def transverse_index(self):
        """The transverse coordinate used for the meridional half-plane."""
        return 0 if self.axis_index != 0 else 1


class Grid:
    """Realized nodes, quadrature weights and differentiation operators."""

    def __init__(self, spec):
        self.spec = spec
        d, n_r, n_t = spec.d, spec.n_r, spec.n_theta
        self.d = d
        M = 2 * n_r - 1
        x, D = cheb_extreme(M)
        self.r = x[:n_r]
        # column M - k of D multiplies the node -r_k
        self._Dp = D[:n_r, :n_r]
        self._Dn = D[:n_r, M - np.arange(n_r)]
        wcc = clenshaw_curtis(M)[:n_r]
        # even extension: half of the symmetric sum over [-1, 1]
        self.w_r = wcc * self.r ** (d - 1)
        a = (d - 3) / 2
        mu, wmu = roots_jacobi(n_t, a, a)
        self.mu = mu
        self.theta = np.arccos(mu)
        self.w_mu = wmu * sphere_area(d - 1)
        self._Dmu = barycentric_diff(mu)
        # Chebyshev coefficient route for radial derivatives
        k = np.arange(M + 1)
        T = np.cos(np.pi * np.outer(k, k) / M)  # T_k(x_j) = cos(pi j k / M)
        half = np.ones(M + 1)
        half[[0, M]] = 0.5
        self._to_cheb = (2.0 / M) * (half[:, None] * T * half[None, :])
        self._cheb_der = np.polynomial.chebyshev.chebder(np.eye(M + 1), axis=0)
        self._cheb_der = np.vstack([self._cheb_der, np.zeros((1, M + 1))])
        self._from_cheb = T[:n_r]
        self.R, self.MU = np.meshgrid(self.r, self.mu, indexing="ij")
        self.Z = self.R * self.MU
        self.S = self.R * np.sqrt(1 - self.MU**2)
        self.W = self.S**2
        self.shape = (n_r, n_t)

    # sampling
    def cartesian_points(self):
        """Meridional-plane Cartesian coordinates of the nodes, shape (n_r, n_theta, d)."""
        xi = np.zeros(self.shape + (self.d,))
        xi[..., self.spec.axis_index] = self.Z
        xi[..., self.spec.transverse_index] = self.S
        return xi

    def sample(self, fn):
        """ScalarField from a callable on Cartesian points (..., d)."""
        return ScalarField(np.asarray(fn(self.cartesian_points()), dtype=float), self)

    def sample_zw(self, fn):
        """ScalarField from a callable fn(z, w) of the axial coordinate and |xi_perp|^2."""
        return ScalarField(np.asarray(fn(self.Z, self.W), dtype=float) + 0 * self.Z, self)

    def constant(self, c):
        return ScalarField(np.full(self.shape, float(c)), self)

    # quadrature
    def integrate_ball(self, v):
        return float(self.w_r @ np.asarray(v) @ self.w_mu)

    def integrate_sphere(self, v_sphere):
        return float(np.asarray(v_sphere) @ self.w_mu)

    # differentiation on raw arrays
    def d_r(self, v, parity=1):
        """Radial derivative of an array with f(-rho, mu) = parity * f(rho, -mu).

        The result has the opposite parity, so chained radial derivatives must
        alternate the sign. The derivative is taken on the Chebyshev series of
        the even/odd extension with coefficients below CHOP_TOL (relative)
        discarded; this keeps repeated derivatives of resolved fields at
        round-off level instead of amplifying sample noise by N^2 per order.
        """
        full = np.vstack([v, parity * v[::-1, ::-1]])
        c = self._to_cheb @ full
        scale = np.abs(c).max()
        if scale > 0:
            c[np.abs(c) < CHOP_TOL * scale] = 0.0
        return self._from_cheb @ (self._cheb_der @ c)

    def d_mu(self, v):
        return v @ self._Dmu.T

    def d_z(self, v):
        return self.MU * self.d_r(v) + (1 - self.MU**2) / self.R * self.d_mu(v)

    def d_w(self, v):
        return self.d_r(v) / (2 * self.R) - self.MU / (2 * self.R**2) * self.d_mu(v)

    def laplace_sphere(self, v):
        dm = self.d_mu(v)
        return (1 - self.MU**2) * self.d_mu(dm) - (self.d - 1) * self.MU * dm

    def laplacian(self, v):
        dr = self.d_r(v)
        return (self.d_r(dr, -1) + (self.d - 1) / self.R * dr
                + self.laplace_sphere(v) / self.R**2)

    def euler(self, v):
        """xi . grad = rho d/drho."""
        return self.R * self.d_r(v)

    def spectral_tail(self, v):
        """Relative size of the trailing Chebyshev / Gegenbauer coefficients."""
        v = np.asarray(v)
        scale = np.abs(v).max()
        if scale == 0:
            return 0.0
        full = np.vstack([v, v[::-1, ::-1]])  # rho from 1 down to -1
        cr = np.abs(dct(full, type=1, axis=0))
        k = max(2, full.shape[0] // 10)
        tail_r = cr[-k:].max() / max(cr.max(), 1e-300)
        lam = (self.d - 2) / 2
        n_t = len(self.mu)
        ls = np.arange(n_t)
        C = eval_gegenbauer(ls[:, None], lam, self.mu[None, :])
        cm = np.abs((v * self.w_mu) @ C.T) / np.sqrt((C**2) @ self.w_mu)
        tail_m = cm[:, -1].max() / max(cm.max(), 1e-300) if n_t > 4 else 0.0
        return max(tail_r, tail_m)

    @cached_property
    def sphere_row(self):
        return 0  # r[0] = 1


def make_grid(spec=None, **kw):
    """Build a Grid from a GridSpec or keyword arguments."""
    if spec is None:
        spec = GridSpec(**kw)
    return Grid(spec)


@dataclass
class ScalarField:
    values: np.ndarray
    grid: Grid = field(repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise ConfigError("field shape does not match grid")

    def _wrap(self, v):
        return ScalarField(v, self.grid)

    def _other(self, o):
        return o.values if isinstance(o, ScalarField) else o

    def __add__(self, o):
        return self._wrap(self.values + self._other(o))

    __radd__ = __add__

    def __sub__(self, o):
        return self._wrap(self.values - self._other(o))

    def __rsub__(self, o):
        return self._wrap(self._other(o) - self.values)

    def __mul__(self, o):
        return self._wrap(self.values * self._other(o))

    __rmul__ = __mul__

    def __neg__(self):
        return self._wrap(-self.values)

    @property
    def sphere(self):
        """Trace on the unit sphere (the rho = 1 row)."""
        return self.values[0]

    def max_abs(self):
        return float(np.abs(self.values).max())


@dataclass
class FieldPair:
    first: ScalarField
    second: ScalarField

    def __post_init__(self):
        if self.first.grid is not self.second.grid:
            raise ConfigError("both slots must live on the same grid")

    @property
    def grid(self):
        return self.first.grid

    def __add__(self, o):
        return FieldPair(self.first + o.first, self.second + o.second)

    def __sub__(self, o):
        return FieldPair(self.first - o.first, self.second - o.second)

    def __mul__(self, c):
        return FieldPair(self.first * c, self.second * c)

    __rmul__ = __mul__

    def __neg__(self):
        return FieldPair(-self.first, -self.second)

    def stacked(self):
        return np.concatenate([self.first.values.ravel(), self.second.values.ravel()])

    def max_abs(self):
        return max(self.first.max_abs(), self.second.max_abs())

    @classmethod
    def from_callables(cls, grid, f1, f2):
        return cls(grid.sample(f1), grid.sample(f2))

    @classmethod
    def constant(cls, grid, c1, c2):
        return cls(grid.constant(c1), grid.constant(c2))


class HDerivatives:
    """Memoized d/dz^a d/dw^b of one field, the building block of Cartesian tensors."""

    def __init__(self, f):
        self.grid = f.grid
        self._cache = {(0, 0): f.values}

    def __call__(self, a, b):
        key = (a, b)
        if key not in self._cache:
            if b > 0:
                self._cache[key] = self.grid.d_w(self(a, b - 1))
            else:
                self._cache[key] = self.grid.d_z(self(a - 1, 0))
        return self._cache[key]


def _partial_values(H, n, grid):
    """Cartesian partial derivative with multi-index n on the meridional half-plane."""
    ax, t1 = grid.spec.axis_index, grid.spec.transverse_index
    a, n1 = n[ax], n[t1]
    base_w, coef = 0, 1.0
    for i, ni in enumerate(n):
        if i in (ax, t1):
            continue
        if ni % 2:
            return np.zeros(grid.shape)
        base_w += ni // 2
        coef *= factorial(ni) / factorial(ni // 2)
    out = np.zeros(grid.shape)
    for m1 in range(n1 // 2 + 1):
        c = factorial(n1) / (factorial(m1) * factorial(n1 - 2 * m1))
        out = out + c * (2 * grid.S) ** (n1 - 2 * m1) * H(a, base_w + n1 - m1)
    return coef * out


def multi_indices(d, k):
    """All multi-indices of length d and total order k."""
    for cut in itertools.combinations(range(k + d - 1), d - 1):
        bounds = (-1,) + cut + (k + d - 1,)
        yield tuple(bounds[i + 1] - bounds[i] - 1 for i in range(d))


def _check(f):
    tail = f.grid.spectral_tail(f.values)
    if tail > TAIL_THRESHOLD:
        warnings.warn(f"spectral tail {tail:.2e} exceeds {TAIL_THRESHOLD:.0e}",
                      ResolutionWarning, stacklevel=3)


def partial(f, n, check=False, _H=None):
    """Cartesian partial derivative d^n f for a multi-index n (tuple of length d)."""
    if check:
        _check(f)
    H = _H or HDerivatives(f)
    return ScalarField(_partial_values(H, tuple(n), f.grid), f.grid)


def cartesian_derivative(f, j, check=True):
    """d f / d xi^j on the grid (meridional half-plane values for non-axial j)."""
    n = [0] * f.grid.d
    n[j] = 1
    return partial(f, n, check=check)


def contraction(f, g, k, Hf=None, Hg=None):
    """Pointwise full contraction sum_{i_1..i_k} d_{i_1..i_k} f d_{i_1..i_k} g."""
    grid = f.grid
    Hf = Hf or HDerivatives(f)
    Hg = Hg or (Hf if g is f else HDerivatives(g))
    out = np.zeros(grid.shape)
    for n in multi_indices(grid.d, k):
        mult = factorial(k) / np.prod([factorial(m) for m in n])
        pf = _partial_values(Hf, n, grid)
        pg = pf if Hg is Hf else _partial_values(Hg, n, grid)
        out += mult * pf * pg
    return out


def sobolev_seminorm(f, k, check=True):
    """(sum_{|n|=k} multinomial * int_B |d^n f|^2)^(1/2)."""
    if k > (f.grid.d + 1) // 2:
        raise ConfigError("order exceeds (d + 1) / 2")
    if check:
        _check(f)
    if k == 0:
        return np.sqrt(f.grid.integrate_ball(f.values**2))
    return np.sqrt(max(f.grid.integrate_ball(contraction(f, f, k)), 0.0))


def write_snapshot(path, f, tau=0.0):
    """Flat text snapshot: header (d, N_r, N_theta, tau) then row-major values."""
    g = f.grid
    with open(path, "w") as fh:
        fh.write(f"{g.d},{g.spec.n_r},{g.spec.n_theta},{tau!r}\n")
        for row in f.values:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def read_snapshot(path):
    with open(path) as fh:
        d, n_r, n_t, tau = fh.readline().strip().split(",")
        vals = np.loadtxt(fh, delimiter=",", ndmin=2)
    grid = make_grid(d=int(d), n_r=int(n_r), n_theta=int(n_t))
    return ScalarField(vals, grid), float(tau)


class HarmonicBasis:
    """Regular spectral basis rho^l P_n^{(0, beta_l)}(2 rho^2 - 1) C_l(mu), l < n_theta.

    Coefficient vectors are ordered by (l, n). Grid values come from the
    synthesis matrix; coefficients from quadrature-based analysis. Radial
    degrees are capped so that analysis o synthesis is the identity exactly.
    """

    def __init__(self, grid, n_radial=None):
        self.grid = grid
        d, n_r = grid.d, grid.spec.n_r
        self.L = grid.spec.n_theta - 1
        lam = (d - 2) / 2
        r = grid.r
        x = 2 * r**2 - 1
        self.K, self.offsets, self.beta = [], [0], []
        self._radial_syn, self._radial_ana, self._P, self._dP, self._ddP = [], [], [], [], []
        self._ang = []
        for l in range(self.L + 1):
            K = max(1, (2 * n_r - 2 * l - d) // 4 + 1)
            if n_radial is not None:
                K = min(K, n_radial)
            beta = l + lam
            n = np.arange(K)[None, :]
            P = eval_jacobi(n, 0, beta, x[:, None])
            dP = (n + beta + 1) / 2 * eval_jacobi(n - 1, 1, beta + 1, x[:, None])
            ddP = (n + beta + 1) * (n + beta + 2) / 4 * eval_jacobi(n - 2, 2, beta + 2, x[:, None])
            dP[:, 0] = 0
            ddP[:, :2] = 0
            syn = r[:, None] ** l * P
            h = (grid.w_r[:, None] * syn**2).sum(axis=0)
            ana = (grid.w_r[:, None] * syn / h).T
            C = eval_gegenbauer(l, lam, grid.mu)
            nu = C**2 @ grid.w_mu
            self._ang.append((C, grid.w_mu * C / nu))
            self._radial_syn.append(syn)
            self._radial_ana.append(ana)
            self._P.append(P)
            self._dP.append(dP)
            self._ddP.append(ddP)
            self.K.append(K)
            self.beta.append(beta)
            self.offsets.append(self.offsets[-1] + K)
        self.size = self.offsets[-1]

    def block(self, l):
        return slice(self.offsets[l], self.offsets[l + 1])

    @cached_property
    def synthesis(self):
        """Matrix mapping coefficients to flattened grid values."""
        n_r, n_t = self.grid.shape
        S = np.zeros((n_r * n_t, self.size))
        for l in range(self.L + 1):
            C = self._ang[l][0]
            S[:, self.block(l)] = np.einsum("ik,j->ijk", self._radial_syn[l], C).reshape(n_r * n_t, -1)
        return S

    @cached_property
    def analysis(self):
        """Matrix mapping flattened grid values to coefficients."""
        n_r, n_t = self.grid.shape
        A = np.zeros((self.size, n_r * n_t))
        for l in range(self.L + 1):
            wC = self._ang[l][1]
            A[self.block(l)] = np.einsum("ki,j->kij", self._radial_ana[l], wC).reshape(-1, n_r * n_t)
        return A

    def to_coeffs(self, f):
        v = f.values if isinstance(f, ScalarField) else np.asarray(f)
        return self.analysis @ v.ravel()

    def to_field(self, c):
        return ScalarField((self.synthesis @ c).reshape(self.grid.shape), self.grid)

    def pair_to_coeffs(self, u):
        return np.concatenate([self.to_coeffs(u.first), self.to_coeffs(u.second)])

    def coeffs_to_pair(self, c):
        n = self.size
        return FieldPair(self.to_field(c[:n]), self.to_field(c[n:]))

    def radial_blocks(self, l):
        """Coefficient matrices of rho d/drho and of the Laplacian in sector l."""
        r = self.grid.r[:, None]
        rl = r**l
        P, dP, ddP = self._P[l], self._dP[l], self._ddP[l]
        euler = rl * (4 * r**2 * dP + l * P)
        lap = rl * (16 * r**2 * ddP + 4 * (2 * l + self.grid.d) * dP)
        ana = self._radial_ana[l]
        return ana @ euler, ana @ lap

    def sector_of(self, c):
        """Harmonic degree carrying the largest coefficient mass of c (one slot or stacked)."""
        c = np.asarray(c)
        n = self.size
        mass = np.zeros(self.L + 1)
        for part in (c[:n], c[n:2 * n]) if len(c) == 2 * n else (c,):
            for l in range(self.L + 1):
                mass[l] += np.sum(np.abs(part[self.block(l)]) ** 2)
        return int(np.argmax(mass))
