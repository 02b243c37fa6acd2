"""Lorentz boosts, the ODE blowup family, similarity coordinates and static profiles.

Rapidities are vectors alpha in R^d. The boost coefficients are

    A_0 = prod_i cosh(alpha_i),   A_j = (prod_{i>j} cosh(alpha_i)) sinh(alpha_j),

and the blowup family is u_{T,alpha}(t, x) = sqrt(2) / (A_0 (T - t) - A_j x^j).
Indices are 0-based in code, so A has length d + 1 with A[0] = A_0 and
A[j + 1] belonging to the coordinate x[j].
"""
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

SQRT2 = np.sqrt(2.0)


def boost_coeffs(alpha):
    """Return the array (A_0, A_1, ..., A_d) for the rapidity alpha."""
    alpha = np.asarray(alpha, dtype=float)
    if alpha.ndim != 1 or not np.all(np.isfinite(alpha)):
        raise DomainError("rapidity must be a finite 1d vector")
    ch = np.cosh(alpha)
    # tail[j] = prod_{i > j} cosh(alpha_i)
    tail = np.ones_like(alpha)
    for j in range(len(alpha) - 2, -1, -1):
        tail[j] = tail[j + 1] * ch[j + 1]
    A = np.empty(len(alpha) + 1)
    A[0] = np.prod(ch)
    A[1:] = tail * np.sinh(alpha)
    return A


def is_admissible(alpha):
    """Sufficient positivity condition A_0 - sum |A_j| > 0 on the closed unit ball."""
    A = boost_coeffs(alpha)
    return A[0] - np.abs(A[1:]).sum() > 0


def axis_rapidity(a, d, axis=None):
    """Rapidity a * e_axis (default axis: the last coordinate)."""
    alpha = np.zeros(d)
    alpha[d - 1 if axis is None else axis] = a
    return alpha


def boost_event(t, x, T, alpha):
    """Apply the boost composition Lambda^d o ... o Lambda^1 fixing the event (T, 0).

    Each factor acts in the (T - t, x^j) plane by
    s' = cosh(a_j) s - sinh(a_j) x^j,  x'^j = cosh(a_j) x^j - sinh(a_j) s,
    with s = T - t, so that u_{T,0} composed with the boost equals u_{T,alpha}.
    Rapidity components do not commute beyond first order; the order is fixed.
    """
    x = np.array(x, dtype=float)
    s = T - t
    for j, a in enumerate(np.asarray(alpha, dtype=float)):
        c, sh = np.cosh(a), np.sinh(a)
        s, x[j] = c * s - sh * x[j], c * x[j] - sh * s
    return T - s, x


def blowup_solution(t, x, T, alpha):
    """Evaluate sqrt(2) / (A_0 (T - t) - A_j x^j); x has trailing axis of length d."""
    A = boost_coeffs(alpha)
    x = np.asarray(x, dtype=float)
    den = A[0] * (T - np.asarray(t, dtype=float)) - x @ A[1:]
    if np.any(den <= 0):
        raise DomainError("point outside the boosted cone of regularity")
    return SQRT2 / den


@dataclass(frozen=True)
class SimilarityFrame:
    T: float
    d: int = 5

    def __post_init__(self):
        if not self.T > 0:
            raise DomainError("blowup time must be positive")
        if self.d not in (5, 7, 9, 11, 13):
            raise DomainError("dimension must be odd in 5..13")


def similarity_map(t, x, frame):
    """(t, x) -> (tau, xi) = (log(T / (T - t)), x / (T - t))."""
    T = frame.T
    t = float(t)
    x = np.asarray(x, dtype=float)
    if t >= T or t < 0:
        raise DomainError("need 0 <= t < T")
    if np.linalg.norm(x) > (T - t) * (1 + 1e-14):
        raise DomainError("point outside the backward light cone")
    return np.log(T / (T - t)), x / (T - t)


def inverse_similarity_map(tau, xi, frame):
    """(tau, xi) -> (t, x) with T - t = T exp(-tau)."""
    s = frame.T * np.exp(-float(tau))
    return frame.T - s, s * np.asarray(xi, dtype=float)


def _denominator(xi, A):
    den = A[0] - np.asarray(xi, dtype=float) @ A[1:]
    if np.any(den <= 0):
        raise DomainError("profile denominator vanishes")
    return den


def static_profile(xi, alpha):
    """psi_alpha(xi) = sqrt(2) / (A_0 - A_j xi^j)."""
    A = boost_coeffs(alpha)
    return SQRT2 / _denominator(xi, A)


def static_profile_pair(xi, alpha):
    """Return (psi_alpha, xi . grad psi_alpha + psi_alpha) in closed form.

    With D = A_0 - A_j xi^j the second slot simplifies to sqrt(2) A_0 / D^2.
    """
    A = boost_coeffs(alpha)
    D = _denominator(xi, A)
    return SQRT2 / D, SQRT2 * A[0] / D**2


def static_profile_gradient(xi, alpha):
    """Closed-form gradient sqrt(2) A_j / D^2, shape (..., d)."""
    A = boost_coeffs(alpha)
    D = _denominator(xi, A)
    return SQRT2 * A[1:] / (D**2)[..., None]


def axis_profile_derivatives(z, a):
    """Axis-boost pair and its a-derivatives as functions of z = xi^axis.

    Returns (psi1, psi2, dpsi1/da, dpsi2/da) for alpha = a e_axis, where
    A_0 = cosh a, A_axis = sinh a, and dA_0/da = sinh a, dA_axis/da = cosh a.
    """
    c, s = np.cosh(a), np.sinh(a)
    D = c - s * np.asarray(z, dtype=float)
    if np.any(D <= 0):
        raise DomainError("profile denominator vanishes")
    dD = s - c * z
    p1 = SQRT2 / D
    p2 = SQRT2 * c / D**2
    h1 = -SQRT2 * dD / D**2
    h2 = SQRT2 * (s / D**2 - 2 * c * dD / D**3)
    return p1, p2, h1, h2
