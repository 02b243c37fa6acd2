"""Where the instabilities of the blowup profile come from.

    python3 demos/spectrum_tour.py

The linearization around sqrt2/(1 - t) in similarity variables has exactly
two unstable or neutral eigenvalues: lambda = 1 (time translation, l = 0) and
lambda = 0 (Lorentz boosts, l = 1). Three views of that fact follow: the
Gamma-pole criterion, the discretized generator, and the linear flow.
"""
import numpy as np

from cubicwave.discretization import make_grid
from cubicwave.energy_norm import random_polynomial_pair
from cubicwave.operators import assemble_generator, discrete_spectrum, semigroup_decay_probe
from cubicwave.spectral import eigenfunctions, mode_stability_scan

scan = mode_stability_scan(l_max=8)
print("zeros of 1/(Gamma(a) Gamma(b)) with Re lambda > -1:")
for lam, l in scan["flagged"]:
    print(f"  lambda = {lam.real:+.2f}{lam.imag:+.2f}i  in sector l = {l}")

print("\nconverged eigenvalues of the discretized generator with Re lambda > -1:")
for a in (0.0, 0.1):
    recs = [r for r in discrete_spectrum(n_r=48, alpha=a) if r["converged"] and r["re"] > -1]
    recs.sort(key=lambda r: -r["re"])
    print(f"  alpha = {a}: " + ", ".join(f"{r['re']:+.6f} (l={r['l']})" for r in recs))

M = assemble_generator(make_grid(d=5, n_r=48, n_theta=8), 0.0)
print("\nlinear flow, fitted growth rates of the energy norm:")
for name, u, deflate in (("g_0", eigenfunctions(M.grid, 0.0, "g"), False),
                         ("h_0", eigenfunctions(M.grid, 0.0, "h"), False),
                         ("random, deflated", random_polynomial_pair(M.grid, 6, np.random.default_rng(4)), True)):
    rep = semigroup_decay_probe(M, u, tau_max=8.0, deflate=deflate)
    print(f"  {name:18s} {rep['rate']:+.4f}")
