"""The degree -2 Poisson bracket on Sym(Der) (x) Lambda(E) and its connection
(in)dependence."""

import random

from courantalg import (
    Backend,
    Connection,
    ConnectionChange,
    Derivation,
    MetricModule,
    Poly,
    RothElement,
    metrize,
    roth_bracket,
)

backend = Backend.free(1, ("x",))
x = Poly.var(backend, 0)
one, zero = Poly.one(backend), Poly.zero(backend)
module = MetricModule(backend, [[zero, one], [one, zero]])
conn = Connection.flat(module)

e1 = RothElement.from_module_element(module.basis(0))
e2 = RothElement.from_module_element(module.basis(1))
D = RothElement.from_derivation(module, Derivation.basis(backend, 0))

print("{e1, e2}    =", roth_bracket(e1, e2, conn))
print("{D, x^2}    =", roth_bracket(D, RothElement.from_scalar(module, x * x), conn))
print("{D, D}      =", roth_bracket(D, D, conn))

phi = D.wedge(e1)
psi = e1.wedge(e2)
print("\n(D ^ e1) and (e1 ^ e2):")
print("  wedge        =", phi.wedge(psi))
print("  bracket      =", roth_bracket(phi, psi, conn))

# graded Jacobi, spot-checked exactly
lhs = roth_bracket(phi, roth_bracket(psi, e1, conn), conn)
rhs = roth_bracket(roth_bracket(phi, psi, conn), e1, conn) + \
    roth_bracket(psi, roth_bracket(phi, e1, conn), conn)
print("\nJacobi spot check: exact match:", lhs == rhs)

# two independently metrized connections differ, but exp(t) identifies them
connA = metrize(Connection(module, [[module.basis(0).scale(x), module.zero()]]))
connB = metrize(Connection(module, [[module.basis(1).scale(x * x), module.basis(0)]]))
change = ConnectionChange(connA, connB)
print("\nchange-of-connection tensor t:", [{k: str(v) for k, v in t.items()} for t in change.t_table])
sample = D.wedge(e2)
lhs = change.exp_t(roth_bracket(sample, e1, connA))
rhs = roth_bracket(change.exp_t(sample), change.exp_t(e1), connB)
print("exp(t) intertwines the two brackets:", lhs == rhs)
