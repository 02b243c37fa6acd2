"""Free and linearized similarity-frame operators, nonlinearities and generator matrices.

Lt u = (-xi.grad u1 - u1 + u2, Lap u1 - xi.grad u2 - 2 u2)
L_alpha u = Lt u + (0, V_alpha u1),   V_alpha = 6 / (A_0 - A_j xi^j)^2
N_alpha(u) = (0, 3 psi_alpha u1^2 + u1^3)

Rapidities act along the grid axis only, so an alpha argument may be a scalar
(the axis component) or a full vector whose non-axial entries vanish.
"""
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from . import geometry
from ._fit import log_linear_fit
from .discretization import FieldPair, HarmonicBasis, ScalarField, make_grid
from .errors import ConfigError, DomainError

MAX_UNKNOWNS = 10_000


def axis_component(alpha, grid):
    """Scalar rapidity along the grid axis; rejects off-axis components."""
    a = np.atleast_1d(np.asarray(alpha, dtype=float))
    if a.size == 1:
        return float(a[0])
    if a.size != grid.d:
        raise ConfigError("rapidity length must equal the dimension")
    ax = grid.spec.axis_index
    if np.any(np.delete(a, ax) != 0):
        raise ConfigError("only boosts along the grid axis are axisymmetric")
    return float(a[ax])


def _check_admissible(a):
    if not np.isfinite(a) or not np.cosh(a) - abs(np.sinh(a)) > 0:
        raise DomainError("inadmissible rapidity")


def potential(grid, alpha):
    """V_alpha on the grid."""
    a = axis_component(alpha, grid)
    _check_admissible(a)
    D = np.cosh(a) - np.sinh(a) * grid.Z
    return ScalarField(6.0 / D**2, grid)


def profile(grid, alpha):
    """Static pair Psi_alpha on the grid."""
    a = axis_component(alpha, grid)
    p1, p2, _, _ = geometry.axis_profile_derivatives(grid.Z, a)
    return FieldPair(ScalarField(p1, grid), ScalarField(p2, grid))


def apply_free(u):
    g = u.grid
    u1, u2 = u.first.values, u.second.values
    return FieldPair(ScalarField(-g.euler(u1) - u1 + u2, g),
                     ScalarField(g.laplacian(u1) - g.euler(u2) - 2 * u2, g))


def apply_linearized(u, alpha):
    Lu = apply_free(u)
    V = potential(u.grid, alpha)
    return FieldPair(Lu.first, Lu.second + V * u.first)


def apply_nonlinear(u, alpha):
    """Remainder nonlinearity (0, 3 psi_alpha u1^2 + u1^3)."""
    g = u.grid
    a = axis_component(alpha, g)
    psi = geometry.axis_profile_derivatives(g.Z, a)[0]
    u1 = u.first.values
    return FieldPair(ScalarField(np.zeros(g.shape), g), ScalarField(3 * psi * u1**2 + u1**3, g))


def apply_full_nonlinearity(u):
    """Cubic term (0, psi1^3) of the full system."""
    g = u.grid
    return FieldPair(ScalarField(np.zeros(g.shape), g), ScalarField(u.first.values**3, g))


@dataclass
class GeneratorMatrix:
    """Dense generator acting on stacked coefficient vectors of a HarmonicBasis."""

    matrix: np.ndarray
    basis: HarmonicBasis = field(repr=False)
    alpha: float
    which: str

    @property
    def d(self):
        return self.basis.grid.d

    @property
    def grid(self):
        return self.basis.grid

    def vec(self, u):
        return self.basis.pair_to_coeffs(u)

    def unvec(self, c):
        return self.basis.coeffs_to_pair(np.real(c))

    def projections(self):
        """Riesz data for the eigenvalues nearest 1 and 0.

        Returns {1: (right, left), 0: (right, left)} with left . right = 1,
        taken from a dense eigen-decomposition with left eigenvectors.
        """
        w, vl, vr = sla.eig(self.matrix, left=True, right=True)
        out = {}
        for lam in (1, 0):
            k = int(np.argmin(np.abs(w - lam)))
            r = np.real_if_close(vr[:, k], tol=1e6)
            y = np.real_if_close(vl[:, k].conj(), tol=1e6)
            r = np.real(r / r[np.argmax(np.abs(r))])
            y = np.real(y)
            out[lam] = (r, y / (y @ r), complex(w[k]))
        return out


def free_blocks(basis):
    """Block-diagonal coefficient matrices of xi.grad and Lap."""
    n = basis.size
    E = np.zeros((n, n))
    Lap = np.zeros((n, n))
    for l in range(basis.L + 1):
        b = basis.block(l)
        E[b, b], Lap[b, b] = basis.radial_blocks(l)
    return E, Lap


def sector_generator(basis, l, which="linearized"):
    """l-sector radial generator of Lt (which='free') or L_0 (which='linearized')."""
    E, Lap = basis.radial_blocks(l)
    K = E.shape[0]
    I = np.eye(K)
    V = 6 * I if which == "linearized" else 0 * I
    return np.block([[-E - I, I], [Lap + V, -E - 2 * I]])


def assemble_generator(grid, alpha=0.0, which="linearized", n_radial=None, basis=None):
    """Generator matrix for Lt (which='free') or L_alpha (which='linearized')."""
    if which not in ("free", "linearized"):
        raise ConfigError("which must be 'free' or 'linearized'")
    if basis is None and 2 * int(np.prod(grid.shape)) > MAX_UNKNOWNS:
        raise ConfigError("generator too large for dense assembly")
    basis = basis or HarmonicBasis(grid, n_radial)
    n = basis.size
    if 2 * n > MAX_UNKNOWNS:
        raise ConfigError("generator too large for dense assembly")
    E, Lap = free_blocks(basis)
    I = np.eye(n)
    M = np.block([[-E - I, I], [Lap, -E - 2 * I]])
    a = axis_component(alpha, grid)
    if which == "linearized":
        V = potential(grid, a).values.ravel()
        M[n:, :n] += basis.analysis @ (V[:, None] * basis.synthesis)
    return GeneratorMatrix(M, basis, a, which)


def generator_from_apply(grid, alpha=0.0, which="linearized", basis=None):
    """Column-by-column assembly through apply_free / apply_linearized (reference path)."""
    basis = basis or HarmonicBasis(grid)
    n = basis.size
    M = np.zeros((2 * n, 2 * n))
    for k in range(2 * n):
        e = np.zeros(2 * n)
        e[k] = 1.0
        u = basis.coeffs_to_pair(e)
        out = apply_free(u) if which == "free" else apply_linearized(u, alpha)
        M[:, k] = basis.pair_to_coeffs(out)
    return GeneratorMatrix(M, basis, axis_component(alpha, grid), which)


def _eig_records(matrix_fn, sectors):
    recs = []
    for sector, mat in matrix_fn():
        w, vr = np.linalg.eig(mat)
        for k, lam in enumerate(w):
            recs.append((complex(lam), sector(vr[:, k]) if callable(sector) else sector))
    return recs


def discrete_spectrum(d=5, n_r=64, n_theta=5, alpha=0.0, refine=1.5, tol=1e-4):
    """Eigenvalues with harmonic sector and refinement-convergence flags.

    alpha = 0 uses the decoupled l-sector generators; otherwise the coupled
    axisymmetric generator, with the sector of each eigenvalue given by the
    harmonic degree carrying most of its eigenvector. An eigenvalue counts as
    converged when the refined grid (n_r -> refine * n_r) has an eigenvalue
    within tol of it.
    """

    def compute(nr):
        grid = make_grid(d=d, n_r=nr, n_theta=n_theta)
        basis = HarmonicBasis(grid)
        if alpha == 0:
            return _eig_records(lambda: [(l, sector_generator(basis, l)) for l in range(basis.L + 1)], None)
        M = assemble_generator(grid, alpha, basis=basis)
        return _eig_records(lambda: [(basis.sector_of, M.matrix)], None)

    coarse = compute(n_r)
    fine = np.array([lam for lam, _ in compute(int(round(refine * n_r)))])
    out = []
    for lam, l in coarse:
        dist = np.abs(fine - lam).min()
        out.append({"re": lam.real, "im": lam.imag, "l": l, "converged": bool(dist < tol), "shift": float(dist)})
    return out


def semigroup_decay_probe(M, initial, tau_max=8.0, deflate=False, window=None, n_samples=81,
                          norm_fn=None, max_resid=0.05):
    """Propagate u' = M u exactly (matrix exponential) and fit the norm growth rate.

    initial: FieldPair or coefficient vector. deflate removes the lambda = 1 and
    lambda = 0 components using the numerically computed left eigenvectors.
    Returns dict with taus, norms, rate and fit quality.
    """
    from .energy_norm import norm as energy_norm

    norm_fn = norm_fn or (lambda c: energy_norm(M.unvec(c)))
    c0 = M.vec(initial) if isinstance(initial, FieldPair) else np.asarray(initial, dtype=float)
    if deflate:
        for r, y, _ in M.projections().values():
            c0 = c0 - (y @ c0) * r
    taus = np.linspace(0, tau_max, n_samples)
    step = sla.expm(M.matrix * (taus[1] - taus[0]))
    c = c0.copy()
    norms = []
    for _ in taus:
        norms.append(norm_fn(c))
        c = step @ c
    window = window or (tau_max / 4, tau_max)
    rate, resid = log_linear_fit(taus, norms, window, max_resid=max_resid)
    return {"tau": taus, "norm": np.array(norms), "rate": rate, "quality": resid}
