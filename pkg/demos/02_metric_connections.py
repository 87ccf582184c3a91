"""Metric modules, the averaging trick for metric connections, and curvature."""

from courantalg import (
    Backend,
    Connection,
    MetricModule,
    Poly,
    bianchi_check,
    curvature,
    inner,
    metrize,
)

backend = Backend.free(2, ("x", "y"))
x, y = Poly.var(backend, 0), Poly.var(backend, 1)
one, zero = Poly.one(backend), Poly.zero(backend)

# a sloped gram with unit determinant: strong non-degeneracy is decidable
module = MetricModule(backend, [[one + x * x, x], [x, one]])
print("gram:", [[str(v) for v in row] for row in module.gram])
print("inverse gram:", [[str(v) for v in row] for row in module.gram_inv])
print("fullness witness:", module.fullness_witness())

# start from the flat table and average it into a metric connection
conn = metrize(Connection.flat(module))
print("\nmetrized connection is metric:", conn.is_metric())
print("<nabla_dx e1, e1> =", inner(conn.gamma[0][0], module.basis(0)))

# push some dependence into the second variable to generate curvature
raw = Connection(module, [[module.zero(), module.zero()],
                          [module.basis(0).scale(y), module.basis(0).scale(x * y)]])
curved = metrize(raw)
r = curvature(curved)
print("\ncurvature bivector r(d/dx, d/dy):",
      {k: str(v) for k, v in r.pair(0, 1).items()})
print("Bianchi identity holds:", bianchi_check(curved))
