"""Free modules with strongly non-degenerate inner products, connections, curvature."""

from __future__ import annotations

import itertools
from fractions import Fraction

from .linalg import poly_det, poly_matrix_inverse
from .poly import Backend, Derivation, Poly, num_der_generators


class ModuleError(ValueError):
    pass


class MetricModule:
    """Free module A^m with a symmetric gram matrix whose determinant is a unit.

    Unit determinant gives strong non-degeneracy (explicit inverse gram) and
    fullness (a one-pair witness read off the first row of the inverse).
    Optional per-basis internal degrees feed the graded cohomology blocks.
    """

    __slots__ = ("backend", "rank", "names", "gram", "gram_inv", "internal_degrees", "_hash")

    def __init__(self, backend: Backend, gram: list[list[Poly]], names=None, internal_degrees=None):
        rank = len(gram)
        if rank < 1:
            raise ModuleError("rank must be positive")
        for row in gram:
            if len(row) != rank:
                raise ModuleError("gram must be square")
        for a in range(rank):
            for b in range(rank):
                if gram[a][b] != gram[b][a]:
                    raise ModuleError("gram must be symmetric")
        det = poly_det(gram)
        if backend.is_dual:
            if det.constant_part() == 0:
                raise ModuleError("gram determinant must be a unit (invertible constant part)")
        else:
            if det.is_zero() or not det.is_constant():
                raise ModuleError("gram determinant must be a nonzero rational")
        self.backend = backend
        self.rank = rank
        self.gram = tuple(tuple(row) for row in gram)
        self.gram_inv = tuple(tuple(row) for row in poly_matrix_inverse([list(r) for r in gram]))
        if names is None:
            names = tuple("e%d" % (a + 1) for a in range(rank))
        self.names = tuple(names)
        if internal_degrees is None:
            internal_degrees = (0,) * rank
        self.internal_degrees = tuple(internal_degrees)
        self._hash = hash((backend, self.gram, self.names))

    def zero(self) -> "ModuleElement":
        return ModuleElement(self, [Poly.zero(self.backend)] * self.rank)

    def basis(self, a: int) -> "ModuleElement":
        coeffs = [Poly.zero(self.backend)] * self.rank
        coeffs[a] = Poly.one(self.backend)
        return ModuleElement(self, coeffs)

    def basis_elements(self) -> list["ModuleElement"]:
        return [self.basis(a) for a in range(self.rank)]

    def inner(self, x: "ModuleElement", y: "ModuleElement") -> Poly:
        if x.module is not self and x.module != self:
            raise ModuleError("module mismatch")
        if y.module is not self and y.module != self:
            raise ModuleError("module mismatch")
        out = Poly.zero(self.backend)
        for a in range(self.rank):
            if x.coeffs[a].is_zero():
                continue
            for b in range(self.rank):
                if y.coeffs[b].is_zero():
                    continue
                out = out + x.coeffs[a] * self.gram[a][b] * y.coeffs[b]
        return out

    def fullness_witness(self) -> list[tuple["ModuleElement", "ModuleElement"]]:
        """Pairs (x_i, y_i) with sum <x_i, y_i> = 1; here a single pair."""
        y = ModuleElement(self, [self.gram_inv[0][b] for b in range(self.rank)])
        return [(self.basis(0), y)]

    def raise_form(self, values: list[Poly]) -> "ModuleElement":
        """The element v with <v, e_b> = values[b] for every basis index b."""
        coeffs = []
        for a in range(self.rank):
            s = Poly.zero(self.backend)
            for b in range(self.rank):
                s = s + values[b] * self.gram_inv[b][a]
            coeffs.append(s)
        return ModuleElement(self, coeffs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MetricModule):
            return NotImplemented
        return (
            self.backend == other.backend
            and self.gram == other.gram
            and self.names == other.names
        )

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return "MetricModule(rank=%d over %r)" % (self.rank, self.backend)


class ModuleElement:
    """Element of E as a coefficient vector over the module basis."""

    __slots__ = ("module", "coeffs", "_hash")

    def __init__(self, module: MetricModule, coeffs):
        coeffs = tuple(coeffs)
        if len(coeffs) != module.rank:
            raise ModuleError("coefficient arity mismatch")
        self.module = module
        self.coeffs = coeffs
        self._hash = None

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    def __add__(self, other: "ModuleElement") -> "ModuleElement":
        if self.module != other.module:
            raise ModuleError("module mismatch")
        return ModuleElement(self.module, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __sub__(self, other: "ModuleElement") -> "ModuleElement":
        if self.module != other.module:
            raise ModuleError("module mismatch")
        return ModuleElement(self.module, [a - b for a, b in zip(self.coeffs, other.coeffs)])

    def __neg__(self) -> "ModuleElement":
        return ModuleElement(self.module, [-c for c in self.coeffs])

    def scale(self, a) -> "ModuleElement":
        if not isinstance(a, Poly):
            a = Poly.const(self.module.backend, a)
        return ModuleElement(self.module, [a * c for c in self.coeffs])

    __rmul__ = scale
    __mul__ = scale

    def __eq__(self, other) -> bool:
        if not isinstance(other, ModuleElement):
            return NotImplemented
        return self.module == other.module and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.module, self.coeffs))
        return self._hash

    def __repr__(self) -> str:
        parts = []
        for c, name in zip(self.coeffs, self.module.names):
            if c.is_zero():
                continue
            if c.is_one():
                parts.append(name)
            else:
                parts.append("(%s)*%s" % (c, name))
        return " + ".join(parts) if parts else "0"


def inner(x: ModuleElement, y: ModuleElement) -> Poly:
    return x.module.inner(x, y)


class Connection:
    """Covariant derivative given by its Christoffel table.

    gamma[i][a] = nabla of the a-th basis element along the i-th derivation
    generator.  Over DualNum there is a single generator epsd, and module
    relations force every gamma entry to lie in eps*E.
    """

    __slots__ = ("module", "gamma", "_hash", "_curvature")

    def __init__(self, module: MetricModule, gamma):
        backend = module.backend
        ngen = num_der_generators(backend)
        gamma = tuple(tuple(row) for row in gamma)
        if len(gamma) != ngen or any(len(row) != module.rank for row in gamma):
            raise ModuleError("christoffel table shape mismatch")
        for row in gamma:
            for v in row:
                if v.module != module:
                    raise ModuleError("christoffel entries must live in the module")
        if backend.is_dual:
            for row in gamma:
                for v in row:
                    for c in v.coeffs:
                        if c.constant_part():
                            raise ModuleError(
                                "dual-number connections need eps-multiple christoffels "
                                "(forced by A-linearity in the derivation slot)"
                            )
        self.module = module
        self.gamma = gamma
        self._hash = None
        self._curvature = None

    @staticmethod
    def flat(module: MetricModule) -> "Connection":
        ngen = num_der_generators(module.backend)
        return Connection(module, [[module.zero() for _ in range(module.rank)] for _ in range(ngen)])

    def nabla_gen(self, i: int, x: ModuleElement) -> ModuleElement:
        """Covariant derivative of x along the i-th derivation generator."""
        module = self.module
        d = Derivation.basis(module.backend, i)
        out = module.zero()
        for a, c in enumerate(x.coeffs):
            if c.is_zero():
                continue
            out = out + self.gamma[i][a].scale(c)
            out = out + d(c) * module.basis(a)
        return out

    def nabla(self, d: Derivation, x: ModuleElement) -> ModuleElement:
        module = self.module
        if module.backend.is_dual:
            return self.nabla_gen(0, x).scale(Poly.const(module.backend, d.coeffs[0]))
        out = module.zero()
        for i, c in enumerate(d.coeffs):
            if not c.is_zero():
                out = out + self.nabla_gen(i, x).scale(c)
        return out

    def is_metric(self) -> bool:
        module = self.module
        ngen = num_der_generators(module.backend)
        for i in range(ngen):
            d = Derivation.basis(module.backend, i)
            for a in range(module.rank):
                for b in range(a, module.rank):
                    lhs = d(module.gram[a][b])
                    rhs = inner(self.gamma[i][a], module.basis(b)) + inner(module.basis(a), self.gamma[i][b])
                    if lhs != rhs:
                        return False
        return True

    def __eq__(self, other) -> bool:
        if not isinstance(other, Connection):
            return NotImplemented
        return self.module == other.module and self.gamma == other.gamma

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.module, self.gamma))
        return self._hash


def metrize(conn: Connection) -> Connection:
    """Metric connection from an arbitrary one.

    <nabla_D x, y> = (1/2)(<nablat_D x, y> - <x, nablat_D y> + D<x, y>)
    on generator/basis probes, solved back through the inverse gram.
    """
    module = conn.module
    backend = module.backend
    half = Fraction(1, 2)
    ngen = num_der_generators(backend)
    gamma = []
    for i in range(ngen):
        d = Derivation.basis(backend, i)
        row = []
        for a in range(module.rank):
            vals = []
            ea = module.basis(a)
            for b in range(module.rank):
                eb = module.basis(b)
                v = inner(conn.gamma[i][a], eb) - inner(ea, conn.gamma[i][b]) + d(module.gram[a][b])
                vals.append(v.scale(half))
            row.append(module.raise_form(vals))
        gamma.append(row)
    return Connection(module, gamma)


class Curvature:
    """Curvature in its bivector form: r(D_i, D_j) as coefficients on e_a ^ e_b."""

    __slots__ = ("connection", "table")

    def __init__(self, connection: Connection, table):
        self.connection = connection
        self.table = table  # table[(i, j)] with i < j: dict {(a, b) a < b: Poly}

    def pair(self, i: int, j: int) -> dict[tuple[int, int], Poly]:
        if i == j:
            return {}
        if i < j:
            return self.table.get((i, j), {})
        return {k: -v for k, v in self.table.get((j, i), {}).items()}


def lambda2_pair(module: MetricModule, xi: dict[tuple[int, int], Poly], x: ModuleElement, y: ModuleElement) -> Poly:
    """<xi, x ^ y> with the determinant pairing on the exterior square."""
    out = Poly.zero(module.backend)
    for (a, b), c in xi.items():
        block = module.inner(module.basis(a), x) * module.inner(module.basis(b), y) \
            - module.inner(module.basis(a), y) * module.inner(module.basis(b), x)
        out = out + c * block
    return out


def raise_lambda2(module: MetricModule, form) -> dict[tuple[int, int], Poly]:
    """The xi in Lambda^2 E with <xi, e_a ^ e_b> = form(a, b) for a < b.

    form must be the table of an antisymmetric A-bilinear map on basis pairs.
    Raising happens slotwise through the inverse gram.
    """
    m = module.rank
    ginv = module.gram_inv
    out: dict[tuple[int, int], Poly] = {}
    for a in range(m):
        for b in range(a + 1, m):
            s = Poly.zero(module.backend)
            for c in range(m):
                for d in range(m):
                    val = form(c, d)
                    if val.is_zero():
                        continue
                    s = s + val * ginv[c][a] * ginv[d][b]
            if not s.is_zero():
                out[(a, b)] = s
    return out


def curvature(conn: Connection) -> Curvature:
    """r(D, E) from the operator curvature, validated against the pairing."""
    if not conn.is_metric():
        raise ModuleError("curvature in bivector form needs a metric connection")
    module = conn.module
    backend = module.backend
    ngen = num_der_generators(backend)
    if conn._curvature is not None:
        return conn._curvature
    table = {}
    for i in range(ngen):
        for j in range(i + 1, ngen):
            # coordinate generators commute, so no nabla_[D,E] term
            op = {}
            for a in range(module.rank):
                op[a] = conn.nabla_gen(i, conn.nabla_gen(j, module.basis(a))) \
                    - conn.nabla_gen(j, conn.nabla_gen(i, module.basis(a)))
            pairing = [[inner(op[a], module.basis(b)) for b in range(module.rank)] for a in range(module.rank)]
            for a in range(module.rank):
                for b in range(module.rank):
                    if pairing[a][b] != -pairing[b][a]:
                        raise ModuleError("operator curvature pairing not antisymmetric")
            xi = raise_lambda2(module, lambda c, d: pairing[c][d])
            # dual computation: the pairing route must reproduce <R(.,.)x, y>
            for a in range(module.rank):
                for b in range(module.rank):
                    if lambda2_pair(module, xi, module.basis(a), module.basis(b)) != pairing[a][b]:
                        raise ModuleError("curvature bivector fails the pairing cross-check")
            if xi:
                table[(i, j)] = xi
    cur = Curvature(conn, table)
    conn._curvature = cur
    return cur


def nabla_lambda2(conn: Connection, i: int, xi: dict[tuple[int, int], Poly]) -> dict[tuple[int, int], Poly]:
    """Leibniz extension of the covariant derivative to the exterior square."""
    module = conn.module
    backend = module.backend
    d = Derivation.basis(backend, i)
    acc: dict[tuple[int, int], Poly] = {}

    def add(a, b, c):
        if a == b or c.is_zero():
            return
        if a > b:
            a, b, c = b, a, -c
        acc[(a, b)] = acc.get((a, b), Poly.zero(backend)) + c

    for (a, b), c in xi.items():
        add(a, b, d(c))
        for t, coef in enumerate(conn.gamma[i][a].coeffs):
            add(t, b, c * coef)
        for t, coef in enumerate(conn.gamma[i][b].coeffs):
            add(a, t, c * coef)
    return {k: v for k, v in acc.items() if not v.is_zero()}


def bianchi_residuals(conn: Connection, cur: Curvature | None = None):
    """Cyclic sums nabla_D1 r(D2,D3) + r(D1,[D2,D3]) + cyclic, per generator triple.

    Commutators of the coordinate generators vanish, so only the covariant
    derivative terms remain.  Passing a foreign curvature table exposes how
    the identity fails off the true curvature.
    """
    if cur is None:
        cur = curvature(conn)
    backend = conn.module.backend
    ngen = num_der_generators(backend)
    out = {}
    for i in range(ngen):
        for j in range(ngen):
            for k in range(ngen):
                acc: dict[tuple[int, int], Poly] = {}
                for (a, b), c in itertools.chain(
                    nabla_lambda2(conn, i, cur.pair(j, k)).items(),
                    nabla_lambda2(conn, j, cur.pair(k, i)).items(),
                    nabla_lambda2(conn, k, cur.pair(i, j)).items(),
                ):
                    acc[(a, b)] = acc.get((a, b), Poly.zero(backend)) + c
                acc = {key: v for key, v in acc.items() if not v.is_zero()}
                if acc:
                    out[(i, j, k)] = acc
    return out


def bianchi_check(conn: Connection, cur: Curvature | None = None) -> bool:
    return not bianchi_residuals(conn, cur)
