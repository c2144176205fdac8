"""
All controllers that place the closed-loop poles
=================================================

For the plant ``1/(s+1)`` we want closed-loop poles ``-1 +/- 2j`` and
``-2 +/- 4j``.  Solving the polynomial Diophantine equation
``a c + b d = z`` once gives a particular controller; every other controller
with the same poles follows by adding a multiple of the plant, weighted by a
free polynomial ``q(s)``.  This script builds that family with exact rational
arithmetic and checks the pole invariance numerically.
"""

# %%
# The plant and the target characteristic polynomial
from tdsynth.diophantine import controller, solve_d_minimal
from tdsynth.poly import RatPoly, poly_roots
from tdsynth.transfer import PoleSpec, closed_loop, target_poly

a = RatPoly([1, 1])          # plant denominator s + 1 (coefficients from s^0 up)
b = RatPoly([1])             # plant numerator 1
poles = PoleSpec(complex_pairs=((1, 2), (2, 4)))
z = target_poly(poles)
print("z(s)  =", z)

# %%
# The solution with the smallest degree of ``d`` (d-minimal).  Every
# coefficient is an exact fraction.
family = solve_d_minimal(a, b, z)
print("c0(s) =", family.c0)
print("d0(s) =", family.d0)
print("free parameter q has degree", family.dq)

# %%
# Any choice of ``q`` gives a controller ``C = (d0 - a q) / (c0 + b q)``
# and the loop keeps the poles of ``z``.
for q in ([0, 0, 0], [-32, -23, -3], [5, -1, 0.5]):
    C = controller(family, q)
    T = closed_loop(family.plant(), C)
    roots = sorted(poly_roots(T.den), key=lambda r: (r.real, r.imag))
    print(f"q = {q}:  C = ({C.num}) / ({C.den})")
    print("    closed-loop poles", ", ".join(f"{r:.6g}" for r in roots))

# %%
# ``q = (-32, -23, -3)`` is the result of the bound-constrained design in
# ``02_exponential_bounds.py``.  It cancels the plant pole with a controller
# zero and puts an integrator in the controller, so the step response has
# no steady-state error.
