"""Exact coefficient algebras: free polynomials and dual numbers.

Everything downstream runs over these two backends with Fraction
coefficients; no floating point appears anywhere in the library.
"""

from courantalg import Backend, Derivation, MultiDerivation, Poly, sym_product_of_derivations

free = Backend.free(2, ("x", "y"))
x, y = Poly.var(free, 0), Poly.var(free, 1)
one = Poly.one(free)

print("== free polynomial algebra over Q ==")
print("(1+x)(1-x)            =", (one + x) * (one - x))
print("d/dx (x^2 y)          =", Derivation.basis(free, 0)(x * x * y))
print("[x d/dx, d/dx]        =", Derivation.basis(free, 0).scale(x).commutator(Derivation.basis(free, 0)))

dual = Backend.dual()
eps = Poly.var(dual, 0)
s = Derivation.basis(dual, 0)

print("\n== dual numbers Q[eps]/(eps^2) ==")
print("eps * eps             =", eps * eps)
print("epsd(eps)             =", s(eps))

# The square of the only derivation direction dies as a multiderivation,
# yet a symmetric biderivation with P(eps, eps) = eps exists: the gap that
# drives the image counterexample in demo 05.
print("epsd v epsd (as 2-multiderivation) is zero:", sym_product_of_derivations([s, s]).is_zero())
P = MultiDerivation(dual, 2, {(0, 0): eps})
print("P(eps, eps)           =", P(eps, eps))
print("P(1, eps)             =", P(Poly.one(dual), eps))
