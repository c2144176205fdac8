"""
Covering the response curve by semialgebraic sets
=================================================

With ``u = cos(tau)``, ``v = sin(tau)`` and ``lam = exp(-tau)`` the step
response becomes a polynomial ``y(u, v, lam)`` evaluated along a curve in
three dimensions.  Replacing "for all t" by "for all points of a
semialgebraic set that contains the curve" gives a problem that
Putinar-type certificates can handle.

The cover cuts the curve into arcs.  On each arc, ``lam`` is approximated
by a trigonometric polynomial ``psi(u, v)`` to within ``eps / 2``.  The
region of that arc is the band ``|lam - psi(u, v)| <= eps / 2`` on the
unit circle, cut by a half-plane to the right angular sector.  A final
region covers the tail where ``lam <= eps``.
"""

# %%
import math

import numpy as np

from tdsynth.semialg import build_overapprox, coverage, precomputed

eps = math.exp(-1.5 * math.pi)
print(f"eps = {eps:.6f}")

# %%
# Build the cover.  Each arc gets the Fourier degree that reaches the
# required fit, computed from a C1-smooth periodic extension of exp(-tau).
o = build_overapprox(eps, 0.75 * math.pi, theta=1)
print(o.to_text())

# %%
# Monte Carlo check: curve points must be covered, and region points must be
# eps-close to the curve in lam.
print(coverage(o, samples=100_000).to_text())

# %%
# The tabulated cover with rounded coefficients, used by the overshoot
# example.  Its bands have the full half-width eps around psi, so region
# points can lie up to eps plus the fit error away from the curve.
p = precomputed()
t = np.linspace(0, 0.75 * math.pi, 4001)
fit = np.abs(p.psis[0](np.cos(t), np.sin(t), 0 * t) - np.exp(-t)).max()
print(f"tabulated first-arc fit error {fit:.5f}, band half-width {p.band:.5f}")
print(coverage(p, samples=100_000).to_text())
