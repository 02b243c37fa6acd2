"""Graded energy inner product for d = 5 and the surface operators zeta in odd d.

For pairs u = (u1, u2) the component forms are

    (u|v)_1 = int_B d^3u1 . d^3v1 + int_B d^2u2 . d^2v2 + int_S d^2u1 . d^2v1
    (u|v)_2 = int_B d(Lap u1) . d(Lap v1) + int_B d^2u2 . d^2v2 + int_S du2 . dv2
    (u|v)_3 = 5 (u|v)_1 + (u|v)_2 + int_S u2 v2
    (u|v)_4 = (u|v)_1 + (u|v)_2 + int_S du1 . du1
    (u|v)_5 = (int_S zeta(u)) (int_S zeta(v))

with full tensor contractions. zeta(w) = D_d w1 + Dt_d w2 where D_d, Dt_d are
polynomials in the radial derivative omega . grad, evaluated on the sphere.
Fields are real, so the forms are symmetric bilinear.
"""
import numpy as np

from .discretization import FieldPair, HDerivatives, contraction
from .errors import UnsupportedDimension

# highest radial order first
D_COEFFS = {
    5: (1, 5, 3),
    7: (1, 12, 33, 15),
    9: (1, 22, 141, 279, 105),
    11: (1, 35, 405, 1830, 2895, 945),
}
DT_COEFFS = {
    3: (1,),
    5: (1, 3),
    7: (1, 9, 15),
    9: (1, 18, 87, 105),
    11: (1, 30, 285, 975, 945),
}


def _require(d, table=D_COEFFS):
    if d not in table:
        raise UnsupportedDimension(f"no surface operator coefficients for d = {d}")


def radial_operator(grid, values, coeffs):
    """Apply sum_k c_k (omega . grad)^(n - k) on the whole grid."""
    n = len(coeffs) - 1
    out = np.zeros(grid.shape)
    dv, parity = values, 1
    for k in range(n + 1):
        out = out + coeffs[n - k] * dv
        if k < n:
            dv, parity = grid.d_r(dv, parity), -parity
    return out


def zeta(u, d=None, node=None):
    """zeta(omega, u) at the sphere nodes (or at one node index)."""
    grid = u.grid
    d = grid.d if d is None else d
    if d != grid.d:
        raise UnsupportedDimension("field grid dimension differs from d")
    _require(d)
    z = (radial_operator(grid, u.first.values, D_COEFFS[d])
         + radial_operator(grid, u.second.values, DT_COEFFS[d]))[0]
    return z if node is None else float(z[node])


class _Cache:
    """Derivative caches for the two slots of a pair."""

    def __init__(self, u):
        self.u = u
        self.h1 = HDerivatives(u.first)
        self.h2 = HDerivatives(u.second)
        self._lap = None

    @property
    def lap_field(self):
        if self._lap is None:
            from .discretization import ScalarField
            lap = ScalarField(self.u.grid.laplacian(self.u.first.values), self.u.grid)
            self._lap = (lap, HDerivatives(lap))
        return self._lap


def _pieces(u, v, cu, cv):
    """All integrals that enter the five forms."""
    g = u.grid
    same = u is v

    def con(a, b, k, ha, hb):
        return contraction(a, b, k, ha, ha if same else hb)

    p = {}
    p["B3u1"] = g.integrate_ball(con(u.first, v.first, 3, cu.h1, cv.h1))
    p["B2u2"] = g.integrate_ball(con(u.second, v.second, 2, cu.h2, cv.h2))
    p["S2u1"] = g.integrate_sphere(con(u.first, v.first, 2, cu.h1, cv.h1)[0])
    lu, hlu = cu.lap_field
    lv, hlv = cv.lap_field
    p["B1lap"] = g.integrate_ball(contraction(lu, lv, 1, hlu, hlu if same else hlv))
    p["S1u2"] = g.integrate_sphere(con(u.second, v.second, 1, cu.h2, cv.h2)[0])
    p["S0u2"] = g.integrate_sphere(u.second.sphere * v.second.sphere)
    p["S1u1"] = g.integrate_sphere(con(u.first, v.first, 1, cu.h1, cv.h1)[0])
    p["zeta"] = g.integrate_sphere(zeta(u)) * g.integrate_sphere(zeta(v))
    return p


def all_forms(u, v=None):
    """Array of the five component forms (u|v)_1..(u|v)_5."""
    if u.grid.d != 5:
        raise UnsupportedDimension("component forms are implemented for d = 5")
    v = u if v is None else v
    cu = _Cache(u)
    cv = cu if v is u else _Cache(v)
    p = _pieces(u, v, cu, cv)
    f1 = p["B3u1"] + p["B2u2"] + p["S2u1"]
    f2 = p["B1lap"] + p["B2u2"] + p["S1u2"]
    f3 = 5 * f1 + f2 + p["S0u2"]
    f4 = f1 + f2 + p["S1u1"]
    return np.array([f1, f2, f3, f4, p["zeta"]])


def inner(u, v, i):
    """Component form (u|v)_i, i in 1..5."""
    if not 1 <= i <= 5:
        raise ValueError("component index must be in 1..5")
    return float(all_forms(u, v)[i - 1])


def inner_full(u, v):
    return float(all_forms(u, v).sum())


def norm(u):
    return float(np.sqrt(max(inner_full(u, u), 0.0)))


def _free_in_harmonic_basis(u):
    """Lt u through the harmonic Galerkin blocks.

    Collocation of the Laplacian divides by rho and rho^2 near the origin; the
    resulting noise is then differentiated d - 2 more times by the surface
    operators. The coefficient route is exact on polynomials without that loss.
    """
    from .discretization import CHOP_TOL, HarmonicBasis
    from .operators import free_blocks

    basis = HarmonicBasis(u.grid)
    E, Lap = free_blocks(basis)
    n = basis.size
    c = basis.pair_to_coeffs(u)
    c[np.abs(c) < CHOP_TOL * np.abs(c).max(initial=0.0)] = 0.0
    c1, c2 = c[:n], c[n:]
    return basis.coeffs_to_pair(np.concatenate([-E @ c1 - c1 + c2, Lap @ c1 - E @ c2 - 2 * c2]))


def verify_zeta_identity(u, d=None):
    """Residual of zeta(Lt u) + zeta(u) - Lap_S(Dt_{d-2}(u1 + omega . grad u1)).

    Returns (max residual, |surface integral of the correction|, scale) where
    scale is the largest of the sup norms of the three terms.
    """
    grid = u.grid
    d = grid.d if d is None else d
    _require(d)
    Lu = _free_in_harmonic_basis(u)
    lhs = zeta(Lu, d) + zeta(u, d)
    inner_fn = u.first.values + grid.euler(u.first.values)
    corr = grid.laplace_sphere(radial_operator(grid, inner_fn, DT_COEFFS[d - 2]))[0]
    res = float(np.abs(lhs - corr).max())
    surf = abs(grid.integrate_sphere(corr))
    scale = max(np.abs(zeta(Lu, d)).max(), np.abs(zeta(u, d)).max(), np.abs(corr).max())
    return res, surf, float(scale)


def dissipativity_report(u):
    """Margins of the dissipation inequalities for the free operator.

    Returns a dict with arrays 'LuU' = (Lt u|u)_i, 'UU' = ||u||_i^2, margins
    m_i = (Lt u|u)_i + 3/2 ||u||_i^2 (i = 1..4), e5 = |(Lt u|u)_5 + ||u||_5^2|
    and m = (Lt u|u) + ||u||^2.
    """
    from .operators import apply_free

    Lu = apply_free(u)
    cu = all_forms(u)
    cl = all_forms(Lu, u)
    return {
        "LuU": cl,
        "UU": cu,
        "margins": cl[:4] + 1.5 * cu[:4],
        "e5": abs(cl[4] + cu[4]),
        "m": cl.sum() + cu.sum(),
    }


def sobolev_product_norm(u):
    """||u1||_{H^3} and ||u2||_{H^2} combined as (sum of squares)^(1/2)."""
    g = u.grid
    h1, h2 = HDerivatives(u.first), HDerivatives(u.second)
    s = g.integrate_ball(u.first.values**2) + g.integrate_ball(u.second.values**2)
    for k in (1, 2, 3):
        s += g.integrate_ball(contraction(u.first, u.first, k, h1, h1))
    for k in (1, 2):
        s += g.integrate_ball(contraction(u.second, u.second, k, h2, h2))
    return float(np.sqrt(s))


def random_polynomial(grid, degree, rng, scale=1.0):
    """Axisymmetric polynomial sum c_ab z^a w^b with a + 2b <= degree."""
    vals = np.zeros(grid.shape)
    for a in range(degree + 1):
        for b in range((degree - a) // 2 + 1):
            vals += scale * rng.standard_normal() * grid.Z**a * grid.W**b
    from .discretization import ScalarField
    return ScalarField(vals, grid)


def random_polynomial_pair(grid, degree, rng):
    return FieldPair(random_polynomial(grid, degree, rng), random_polynomial(grid, degree, rng))


def norm_equivalence_sample(n_samples, grid, degree=6, seed=0):
    """Extremes of ||u|| / ||u||_{H^3 x H^2} over seeded random polynomial pairs."""
    rng = np.random.default_rng(seed)
    ratios = []
    for _ in range(n_samples):
        u = random_polynomial_pair(grid, degree, rng)
        ratios.append(norm(u) / sobolev_product_norm(u))
    return float(min(ratios)), float(max(ratios))
