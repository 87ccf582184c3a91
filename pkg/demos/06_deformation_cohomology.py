"""Courant structures end to end: verification, Dorfman bracket, cohomology
blocks, and order-by-order deformations.

The tail of this demo runs the open experiment: the dimensions of the
deformation cohomology of the standard structure over Q[x] in the computed
window.  Nothing here is asserted; the numbers are whatever the exact ranks
say.
"""

from fractions import Fraction

from courantalg import (
    DeformationSeries,
    Poly,
    RothElement,
    cohomology_dims,
    derived_bracket,
    dorfman_bracket,
    make_quadratic_lie,
    make_standard_courant,
    mc_extend,
    mc_obstruction,
    mc_series_valid,
    roth_bracket,
    verify_courant,
)
from courantalg.deform import lie_algebra_center_dim

eps3 = {(0, 1, 2): 1, (1, 2, 0): 1, (2, 0, 1): 1,
        (0, 2, 1): -1, (2, 1, 0): -1, (1, 0, 2): -1}
c = [[[eps3.get((i, j, k), 0) for k in range(3)] for j in range(3)] for i in range(3)]
so3 = make_quadratic_lie(c, [[1 if i == j else 0 for j in range(3)] for i in range(3)])
print("so(3) verifies:", verify_courant(so3.cochain)[0])
print("H^0, H^1:", [cohomology_dims(so3, range(0, 2), [0])[(r, 0)]["dim"] for r in (0, 1)],
      " (center dim:", lie_algebra_center_dim(c), ")")

cs = make_standard_courant(1)
M = cs.module
e, f = M.basis(0), M.basis(1)
print("\nstandard structure on Q[x]^2, generator:", cs.theta)
xpoly = Poly.var(M.backend, 0)
print("derived bracket [e, x f] =", derived_bracket(cs, e, f.scale(xpoly)),
      " Dorfman:", dorfman_bracket(M, 1, e, f.scale(xpoly)))

print("\ndeformation cohomology of the standard structure (r <= 4, |d| <= 2):")
table = cohomology_dims(cs, range(0, 5), range(-2, 3))
print("  r\\d " + "".join("%6d" % d for d in range(-2, 3)))
for r in range(0, 5):
    row = "".join("%6d" % table[(r, d)]["dim"] for d in range(-2, 3))
    print("  %3d %s" % (r, row))

# a gauge-generated deformation extends to every order
xi = RothElement(M, {((), (0, 1)): xpoly})
m1 = roth_bracket(xi, cs.theta, cs.connection)
series = DeformationSeries(cs, [m1])
print("\ngauge series valid:", mc_series_valid(series)[0])
obs, cocycle = mc_obstruction(series)
print("obstruction is a cocycle:", cocycle)
m2 = roth_bracket(xi, m1, cs.connection).scale(Fraction(1, 2))
print("second-order extension accepted:", mc_extend(series, m2))
