import numpy as np

from .errors import NonConvergedFit


def log_linear_fit(tau, values, window=None, min_samples=20, max_resid=0.05):
    """Least-squares slope of log(values) against tau inside window.

    Returns (slope, rms residual). NonConvergedFit if too few samples or if
    the rms residual of the affine fit exceeds max_resid.
    """
    tau = np.asarray(tau, dtype=float)
    v = np.asarray(values, dtype=float)
    mask = np.isfinite(v) & (v > 0)
    if window is not None:
        mask &= (tau >= window[0]) & (tau <= window[1])
    if mask.sum() < min_samples:
        raise NonConvergedFit(f"only {mask.sum()} usable samples in the fit window")
    t, y = tau[mask], np.log(v[mask])
    coef, *_ = np.linalg.lstsq(np.vstack([t, np.ones_like(t)]).T, y, rcond=None)
    resid = float(np.sqrt(np.mean((y - coef[0] * t - coef[1]) ** 2)))
    if resid > max_resid:
        raise NonConvergedFit(f"log-norm curve not affine (rms residual {resid:.3g})")
    return float(coef[0]), resid
