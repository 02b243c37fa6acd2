"""Nonlinear similarity-frame evolution, rapidity modulation and blowup-time shooting.

The state is the stacked coefficient vector of (psi1, psi2) in a HarmonicBasis.
The full system d/dtau Psi = Lt Psi + (0, psi1^3) is integrated with classical
RK4; the cubic term is formed at the nodes and analysed back. Modulation is
diagnostic: alpha(tau) is re-solved from the lambda = 0 projection at each
recorded sample and never feeds back into the dynamics.
"""
import csv
import json
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from . import energy_norm
from ._fit import log_linear_fit
from .discretization import CHOP_TOL, FieldPair, GridSpec, HarmonicBasis, ScalarField, make_grid, sobolev_seminorm
from .errors import (BlowupDetected, BracketError, ConfigError, DomainError, ModulationDiverged,
                     NonConvergedFit)
from .geometry import axis_profile_derivatives
from .operators import assemble_generator, profile

SQRT2 = np.sqrt(2.0)
# RK4 stability interval on the negative real axis
RK4_REAL_LIMIT = 2.785
DTAU_MAX = 1e-2
GUARD = 50 * SQRT2
TRACE_VERSION = "cubicwave-trace/1"
TRACE_COLUMNS = ("tau", "energy_norm_Phi", "H0", "H1", "H2", "H3", "alpha", "p", "q")


# ---------------------------------------------------------------- configuration

@dataclass
class Perturbation:
    """Closed-form perturbation v = (f, g) of the T = 1 profile data.

    kind: 'none', 'radial' (eps exp(-|x|^2/width^2) in the first slot),
    'axis' (eps (x^axis/width) exp(-|x|^2/width^2)) or 'mixed' (sum of both).
    second_slot scales a copy of the same shape placed in the time derivative.
    """

    kind: str = "radial"
    eps: float = 1e-3
    width: float = 0.5
    second_slot: float = 0.0

    def __post_init__(self):
        if self.kind not in ("none", "radial", "axis", "mixed"):
            raise ConfigError(f"unknown perturbation kind {self.kind!r}")
        if self.width <= 0:
            raise ConfigError("width must be positive")

    def shape(self, x, axis):
        x = np.asarray(x, dtype=float)
        g = np.exp(-np.sum(x**2, axis=-1) / self.width**2)
        if self.kind == "none":
            return 0 * g
        out = 0 * g
        if self.kind in ("radial", "mixed"):
            out = out + g
        if self.kind in ("axis", "mixed"):
            out = out + x[..., axis] / self.width * g
        return self.eps * out

    def callables(self, axis):
        f = lambda x: self.shape(x, axis)
        g = lambda x: self.second_slot * self.shape(x, axis)
        return f, g


@dataclass
class EvolutionConfig:
    grid: GridSpec = field(default_factory=lambda: GridSpec(n_r=48, n_theta=12))
    dtau: float = None
    cfl: float = 0.9
    tau_max: float = 10.0
    perturbation: Perturbation = field(default_factory=Perturbation)
    bracket: tuple = (0.99, 1.01)
    delta: float = 0.1
    window: tuple = (2.0, 8.0)
    record_every: float = 0.05
    shoot_tol: float = 1e-14
    tau_class: float = 10.0
    p_stop: float = 1e-2

    def __post_init__(self):
        if self.tau_max <= 0:
            raise ConfigError("tau_max must be positive")
        lo, hi = self.bracket
        if not lo < hi:
            raise ConfigError("bracket must satisfy T_lo < T_hi")
        if self.cfl <= 0 or self.cfl > 1:
            raise ConfigError("cfl must lie in (0, 1]")


# ---------------------------------------------------------------- data

def prepare_initial_data(perturbation, T, grid, delta=0.1):
    """Psi(0) = Psi_0 + U(T, v) with U(T, v) = v^T + Psi_0^T - Psi_0.

    w^T(xi) = (T w1(T xi), T^2 w2(T xi)); for the constant profile this gives
    Psi_0^T = (T sqrt2, T^2 sqrt2).
    """
    if not abs(T - 1) < delta:
        raise DomainError(f"T = {T} outside (1 - delta, 1 + delta) with delta = {delta}")
    if perturbation is None:
        perturbation = Perturbation(kind="none")
    f, g = perturbation.callables(grid.spec.axis_index)
    x = T * grid.cartesian_points()
    first = T * (SQRT2 + f(x))
    second = T**2 * (SQRT2 + g(x))
    return FieldPair(ScalarField(first + 0 * grid.R, grid), ScalarField(second + 0 * grid.R, grid))


# ---------------------------------------------------------------- integrator

def _chop(c, scale=None):
    """Zero coefficients below CHOP_TOL relative to scale (default: the largest).

    Analysis round-off is otherwise amplified by the radial blocks (entries ~ n^4).
    """
    c = np.array(c, dtype=float)
    scale = np.abs(c).max(initial=0.0) if scale is None else scale
    c[np.abs(c) < CHOP_TOL * scale] = 0.0
    return c


class Evolver:
    """RK4 integrator for the full similarity-frame system on a HarmonicBasis."""

    def __init__(self, grid, dtau=None, cfl=0.9, guard=GUARD, basis=None):
        self.grid = grid
        self.basis = basis or HarmonicBasis(grid)
        self.M = assemble_generator(grid, which="free", basis=self.basis).matrix
        self._S = self.basis.synthesis
        self._A = self.basis.analysis
        self.n = self.basis.size
        self.guard = guard
        self.spectral_radius = float(np.max(np.abs(sla.eigvals(self.M))))
        self.dtau = dtau if dtau is not None else min(cfl * RK4_REAL_LIMIT / self.spectral_radius, DTAU_MAX)
        if self.dtau <= 0:
            raise ConfigError("time step must be positive")

    @classmethod
    def from_config(cls, cfg):
        return cls(make_grid(cfg.grid), dtau=cfg.dtau, cfl=cfg.cfl)

    def coeffs(self, psi):
        return _chop(self.basis.pair_to_coeffs(psi))

    def pair(self, c):
        return self.basis.coeffs_to_pair(c)

    def rhs(self, c):
        out = self.M @ c
        u1 = self._S @ c[:self.n]
        out[self.n:] += _chop(self._A @ u1**3)
        return out

    def max_abs(self, c):
        return max(np.abs(self._S @ c[:self.n]).max(), np.abs(self._S @ c[self.n:]).max())

    def step(self, c, dtau=None, tau=None):
        h = self.dtau if dtau is None else dtau
        k1 = self.rhs(c)
        k2 = self.rhs(c + h / 2 * k1)
        k3 = self.rhs(c + h / 2 * k2)
        k4 = self.rhs(c + h * k3)
        out = c + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(out)) or self.max_abs(out) >= self.guard:
            raise BlowupDetected("solution left the perturbative regime", tau=tau, state=out)
        return out

    def advance(self, c, tau0, tau1):
        """Integrate from tau0 to tau1 exactly (last step shortened)."""
        tau = tau0
        while tau1 - tau > 1e-14:
            h = min(self.dtau, tau1 - tau)
            c = self.step(c, h, tau)
            tau += h
        return c


def step(psi, alpha, dtau, evolver=None):
    """One RK4 step of the full system on a FieldPair.

    alpha is accepted for interface symmetry with the modulated description;
    the dynamics do not depend on it.
    """
    ev = evolver or Evolver(psi.grid)
    return ev.pair(ev.step(ev.coeffs(psi), dtau))


# ---------------------------------------------------------------- modulation

class Modulator:
    """Left-eigenvector projections onto the lambda = 1 and lambda = 0 modes.

    Left vectors are normalised against the exact profile derivatives, so that
    p(Psi_a + eps g_a) = eps and q(Psi_a + eps h_a) = eps. They are recomputed
    when alpha drifts by more than `refresh` from the reference rapidity.
    """

    def __init__(self, basis, refresh=5e-3, tol=1e-14, max_iter=40, alpha_max=0.5):
        self.basis = basis
        self.grid = basis.grid
        self.refresh, self.tol, self.max_iter, self.alpha_max = refresh, tol, max_iter, alpha_max
        self.alpha_ref = None

    def profile_coeffs(self, a):
        return self.basis.pair_to_coeffs(profile(self.grid, a))

    def h_coeffs(self, a):
        _, _, h1, h2 = axis_profile_derivatives(self.grid.Z, a)
        return np.concatenate([self.basis.to_coeffs(h1), self.basis.to_coeffs(h2)])

    def g_coeffs(self, a):
        c, s = np.cosh(a), np.sinh(a)
        D = c - s * self.grid.Z
        return np.concatenate([self.basis.to_coeffs(c / D**2), self.basis.to_coeffs(2 * c**2 / D**3)])

    def set_reference(self, a):
        P = assemble_generator(self.grid, a, basis=self.basis).projections()
        y1, y0 = P[1][1], P[0][1]
        self.y1 = y1 / (y1 @ self.g_coeffs(a))
        self.y0 = y0 / (y0 @ self.h_coeffs(a))
        self.eigenvalues = (P[1][2], P[0][2])
        self.alpha_ref = a

    def solve(self, c, alpha_prev=0.0):
        """Newton for y0 . (c - c(Psi_a)) = 0; returns (alpha, Phi coeffs, p, q)."""
        if self.alpha_ref is None or abs(alpha_prev - self.alpha_ref) > self.refresh:
            self.set_reference(alpha_prev)
        a = float(alpha_prev)
        for _ in range(self.max_iter):
            f = self.y0 @ (c - self.profile_coeffs(a))
            fp = -(self.y0 @ self.h_coeffs(a))
            da = -f / fp
            da = float(np.clip(da, -0.1, 0.1))
            a += da
            if not np.isfinite(a) or abs(a) > self.alpha_max:
                raise ModulationDiverged(f"Newton left the admissible ball (alpha = {a})")
            if abs(da) < self.tol:
                break
        else:
            if abs(da) > 1e-10:
                raise ModulationDiverged("Newton did not converge")
        if abs(a - self.alpha_ref) > self.refresh:
            return self.solve(c, a)
        # Phi inherits the round-off of Psi, not of its own size
        phi = _chop(c - self.profile_coeffs(a), np.abs(c).max())
        return a, phi, float(self.y1 @ phi), float(self.y0 @ phi)


def extract_modulation(psi, alpha_prev=0.0, modulator=None):
    """(alpha, Phi, p, q) for a FieldPair Psi; Phi = Psi - Psi_alpha as a FieldPair."""
    mod = modulator or Modulator(HarmonicBasis(psi.grid))
    a, phi, p, q = mod.solve(mod.basis.pair_to_coeffs(psi), alpha_prev)
    return a, mod.basis.coeffs_to_pair(phi), p, q


# ---------------------------------------------------------------- traces

@dataclass
class EvolutionTrace:
    tau: list = field(default_factory=list)
    energy_norm_Phi: list = field(default_factory=list)
    H0: list = field(default_factory=list)
    H1: list = field(default_factory=list)
    H2: list = field(default_factory=list)
    H3: list = field(default_factory=list)
    alpha: list = field(default_factory=list)
    p: list = field(default_factory=list)
    q: list = field(default_factory=list)
    event: str = "completed"
    meta: dict = field(default_factory=dict)

    def append(self, **rec):
        if self.tau and rec["tau"] <= self.tau[-1]:
            raise ValueError("trace times must increase")
        for k in TRACE_COLUMNS:
            getattr(self, k).append(float(rec.get(k, np.nan)))

    def array(self, name):
        return np.asarray(getattr(self, name), dtype=float)

    def __len__(self):
        return len(self.tau)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write(f"# {TRACE_VERSION}\n")
            w = csv.writer(fh)
            w.writerow(TRACE_COLUMNS)
            for row in zip(*(getattr(self, k) for k in TRACE_COLUMNS)):
                w.writerow([repr(v) for v in row])

    @classmethod
    def read_csv(cls, path):
        with open(path) as fh:
            head = fh.readline().strip()
            if head != f"# {TRACE_VERSION}":
                raise ConfigError(f"unsupported trace format {head!r}")
            rows = list(csv.reader(fh))
        cols = rows[0]
        tr = cls()
        for row in rows[1:]:
            tr.append(**{k: float(v) for k, v in zip(cols, row)})
        return tr


def phi_diagnostics(phi_pair, seminorms=True):
    """Energy norm of Phi and the H^k seminorms (k = 0..3) of its first slot."""
    rec = {"energy_norm_Phi": energy_norm.norm(phi_pair)}
    for k in range(4):
        rec[f"H{k}"] = sobolev_seminorm(phi_pair.first, k, check=False) if seminorms else np.nan
    return rec


def evolve(evolver, psi0, tau_max, record_every=0.05, modulator=None, seminorms=True,
           alpha0=0.0, stop=None):
    """Integrate from Psi(0) and record modulation diagnostics every record_every.

    stop(rec) may return True to end the run early. A BlowupDetected event ends
    the run and is recorded in trace.event. Returns (trace, final coefficients).
    """
    mod = modulator or Modulator(evolver.basis)
    c = evolver.coeffs(psi0) if isinstance(psi0, FieldPair) else np.asarray(psi0, dtype=float)
    trace = EvolutionTrace(meta={"dtau": evolver.dtau})
    a = alpha0
    n_rec = int(round(tau_max / record_every))
    for j in range(n_rec + 1):
        tau = j * record_every
        if j:
            try:
                c = evolver.advance(c, (j - 1) * record_every, tau)
            except BlowupDetected as exc:
                trace.event = f"blowup at tau={exc.tau:.4f}"
                return trace, exc.state
        try:
            a, phi, p, q = mod.solve(c, a)
        except ModulationDiverged:
            trace.event = f"modulation diverged at tau={tau:.4f}"
            return trace, c
        rec = {"tau": tau, "alpha": a, "p": p, "q": q}
        rec.update(phi_diagnostics(evolver.pair(phi), seminorms))
        trace.append(**rec)
        if stop is not None and stop(rec):
            trace.event = f"stopped at tau={tau:.4f}"
            break
    return trace, c


# ---------------------------------------------------------------- shooting

def classify(evolver, perturbation, T, tau_class=10.0, p_stop=1e-2, delta=0.1, modulator=None,
             check_every=0.25):
    """+1 if the lambda = 1 amplitude runs positive (T too large), -1 if negative."""
    mod = modulator or Modulator(evolver.basis)
    c = evolver.coeffs(prepare_initial_data(perturbation, T, evolver.grid, delta))
    a, p, tau = 0.0, 0.0, 0.0
    while tau < tau_class - 1e-12:
        t1 = min(tau + check_every, tau_class)
        try:
            c = evolver.advance(c, tau, t1)
        except BlowupDetected:
            return 1, np.inf
        tau = t1
        try:
            a, _, p, _ = mod.solve(c, a)
        except ModulationDiverged:
            break
        if abs(p) > p_stop:
            break
    if p == 0:
        # undecided at round-off level: treat as a blowup-time overshoot
        return 1, p
    return int(np.sign(p)), p


@dataclass
class ShootResult:
    T: float
    bracket: tuple
    history: list
    secant: bool = False

    def width(self):
        return self.bracket[1] - self.bracket[0]


def shoot_blowup_time(perturbation, bracket=(0.99, 1.01), tol=1e-14, evolver=None, grid=None,
                      tau_class=10.0, p_stop=1e-2, delta=0.1):
    """Bisection on T by the late-time sign of the lambda = 1 amplitude.

    Bisection stops at width tol or when no representable midpoint remains.
    When both final ends were classified at tau_class without early stop, T*
    is the secant root of p through them (p is affine in T there); otherwise
    the midpoint.
    """
    lo, hi = map(float, bracket)
    if not (1 - delta < lo < hi < 1 + delta):
        raise BracketError("bracket must lie inside (1 - delta, 1 + delta)")
    ev = evolver or Evolver(grid or make_grid(n_r=48, n_theta=12))
    mod = Modulator(ev.basis)
    kw = dict(tau_class=tau_class, p_stop=p_stop, delta=delta, modulator=mod)
    s_lo, p_lo = classify(ev, perturbation, lo, **kw)
    s_hi, p_hi = classify(ev, perturbation, hi, **kw)
    history = [(lo, s_lo, p_lo), (hi, s_hi, p_hi)]
    if s_lo == s_hi:
        raise BracketError(f"both bracket ends classify as {s_lo:+d}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        s, p = classify(ev, perturbation, mid, **kw)
        history.append((mid, s, p))
        if s == s_lo:
            lo, p_lo = mid, p
        else:
            hi, p_hi = mid, p
    T, secant = 0.5 * (lo + hi), False
    if max(abs(p_lo), abs(p_hi)) < p_stop and p_lo != p_hi:
        T, secant = float(np.clip(lo - p_lo * (hi - lo) / (p_hi - p_lo), lo, hi)), True
    return ShootResult(T, (lo, hi), history, secant)


# ---------------------------------------------------------------- rates

def fit_decay_rate(trace, window, quantity="energy_norm_Phi", max_resid=0.05):
    """Affine fit of log(quantity) over window; returns (rate, rms residual)."""
    tau = trace.array("tau")
    if quantity == "alpha":
        al = trace.array("alpha")
        vals = np.abs(al - al[-1])
    else:
        vals = trace.array(quantity)
    return log_linear_fit(tau, vals, window, max_resid=max_resid)


def envelope_check(trace, window, factor=2.0):
    """Ratios ||Phi1||_{H^k}(tau) / (delta_k e^{-tau/2}) over the window, k = 0..3.

    delta_k = ||Phi1||_{H^k}(tau_a) e^{tau_a/2} at the window start. Returns
    {k: max ratio}; the envelope holds when every ratio is <= factor.
    """
    tau = trace.array("tau")
    m = (tau >= window[0]) & (tau <= window[1])
    if not m.any():
        raise NonConvergedFit("trace does not reach the envelope window")
    out = {}
    for k in range(4):
        v = trace.array(f"H{k}")[m]
        t = tau[m]
        delta_k = v[0] * np.exp(t[0] / 2)
        if delta_k == 0:
            out[k] = 0.0 if np.all(v == 0) else np.inf
        else:
            out[k] = float(np.max(v / (delta_k * np.exp(-t / 2))))
    return out


def summarize(trace, window, T=None):
    """JSON-ready summary with rates and quality flags."""
    s = {"T": T, "event": trace.event, "window": list(window)}
    for name in ("energy_norm_Phi", "alpha"):
        try:
            rate, q = fit_decay_rate(trace, window, name)
            s[f"rate_{name}"], s[f"quality_{name}"] = rate, q
        except NonConvergedFit as exc:
            s[f"rate_{name}"], s[f"quality_{name}"] = None, str(exc)
    s["alpha_inf"] = trace.alpha[-1] if len(trace) else None
    if len(trace) and np.all(np.isfinite(trace.array("H3"))):
        try:
            s["envelope"] = envelope_check(trace, window)
        except NonConvergedFit as exc:
            s["envelope"] = str(exc)
    return s


def write_summary(path, summary):
    with open(path, "w") as fh:
        json.dump({"format": "cubicwave-summary/1", **summary}, fh, indent=2, default=float)


# ---------------------------------------------------------------- ODE sanity

def ode_blowup_check(T_frame=1.2, t_max=0.9, grid=None, n_samples=10, evolver=None):
    """Constant data of sqrt2/(1-t) evolved in the frame of T_frame, compared at xi = 0.

    Returns (t samples, computed u(t, 0), exact, max relative error).
    """
    ev = evolver or Evolver(grid or make_grid(n_r=16, n_theta=4))
    g = ev.grid
    # data at t = 0: u = sqrt2, u_t = sqrt2
    psi = FieldPair(g.constant(T_frame * SQRT2), g.constant(T_frame**2 * SQRT2))
    c = ev.coeffs(psi)
    ts = np.linspace(0, t_max, n_samples + 1)[1:]
    taus = np.log(T_frame / (T_frame - ts))
    vals, tau = [], 0.0
    for t, tk in zip(ts, taus):
        c = ev.advance(c, tau, tk)
        tau = tk
        psi1 = ev.basis.to_field(c[:ev.n]).values
        # the field is constant; any node represents xi = 0
        vals.append(float(np.mean(psi1)) / (T_frame - t))
    vals = np.array(vals)
    exact = SQRT2 / (1 - ts)
    return ts, vals, exact, float(np.max(np.abs(vals / exact - 1)))
