"""Courant structures, their verification, deformation differential and cohomology.

A structure is a degree-3 element m with [m, m] = 0, kept in both pictures:
as a cochain and as its preimage Theta in the connection-based algebra.  The
deformation differential is {Theta, .} on the connection side, with [m, .]
as the cross-checking route, and the graded blocks are cut by an internal
polynomial degree (a variable counts +1, a derivation generator -1, module
basis elements carry the module's declared internal degrees).
"""

from __future__ import annotations

import itertools
import time
from fractions import Fraction

from . import linalg
from .cmaps import Cochain, cbracket, cmap_verify
from .modules import Connection, MetricModule, ModuleElement, ModuleError, inner
from .poly import Backend, Poly, num_der_generators
from .rothstein import AlgebraMap, ModuleMap, RothElement, roth_bracket
from .symbol_map import apply_J, invert_J_deg3


class CourantStructure:
    """Degree-3 element with vanishing self-bracket, in both pictures."""

    __slots__ = ("module", "connection", "cochain", "theta", "anchor")

    def __init__(self, module: MetricModule, connection: Connection,
                 cochain: Cochain, theta: RothElement, anchor):
        self.module = module
        self.connection = connection
        self.cochain = cochain
        self.theta = theta
        self.anchor = tuple(anchor)

    @staticmethod
    def from_cochain(m: Cochain, conn: Connection, check: bool = True) -> "CourantStructure":
        theta = invert_J_deg3(m, conn)
        anchor = [m.symbol((x,)) for x in m.module.basis_elements()]
        cs = CourantStructure(m.module, conn, m, theta, anchor)
        if check:
            ok, report = verify_courant(m)
            if not ok:
                raise ValueError("not a Courant structure: %s" % report)
        return cs

    @staticmethod
    def from_theta(theta: RothElement, conn: Connection, check: bool = True) -> "CourantStructure":
        m = apply_J(theta, conn)
        anchor = [m.symbol((x,)) for x in m.module.basis_elements()]
        cs = CourantStructure(theta.module, conn, m, theta, anchor)
        if check:
            ok, report = verify_courant(m)
            if not ok:
                raise ValueError("not a Courant structure: %s" % report)
        return cs

    def bracket(self, x: ModuleElement, y: ModuleElement) -> ModuleElement:
        return derived_bracket(self, x, y)


# -- constructors ---------------------------------------------------------------


def standard_module(n: int) -> MetricModule:
    """A^{2n} with the hyperbolic pairing of the e-block against the f-block."""
    backend = Backend.free(n)
    rank = 2 * n
    zero = Poly.zero(backend)
    one = Poly.one(backend)
    gram = [[zero] * rank for _ in range(rank)]
    for i in range(n):
        gram[i][n + i] = one
        gram[n + i][i] = one
    names = tuple("e%d" % (i + 1) for i in range(n)) + tuple("f%d" % (i + 1) for i in range(n))
    internal = (-1,) * n + (1,) * n
    return MetricModule(backend, gram, names=names, internal_degrees=internal)


def make_standard_courant(n: int) -> CourantStructure:
    """The structure whose derived bracket is the Dorfman bracket on A^{2n}.

    Basis e_i plays the coordinate vector field, f_i the coordinate one-form;
    the generator is -sum_i D_i ^ f_i, whose anchor on e_i is +D_i.
    """
    if n < 1:
        raise ValueError("need at least one variable")
    module = standard_module(n)
    conn = Connection.flat(module)
    theta = RothElement(
        module,
        {((i,), (n + i,)): Poly.const(module.backend, -1) for i in range(n)},
    )
    return CourantStructure.from_theta(theta, conn, check=True)


def make_quadratic_lie(structure_constants, gram) -> CourantStructure:
    """Lie algebra over Q with an invariant inner product, as a Courant structure.

    structure_constants[i][j] is the coefficient vector of the bracket of the
    i-th and j-th basis elements; the anchor vanishes.  Rejects non-invariant
    grams and non-Jacobi tables.
    """
    backend = Backend.free(0)
    rank = len(gram)
    gram_p = [[Poly.const(backend, v) if not isinstance(v, Poly) else v for v in row] for row in gram]
    module = MetricModule(backend, gram_p)
    csts = {}
    for i in range(rank):
        for j in range(rank):
            vec = structure_constants[i][j]
            csts[(i, j)] = ModuleElement(
                module, [Poly.const(backend, v) if not isinstance(v, Poly) else v for v in vec]
            )
    for i in range(rank):
        for j in range(rank):
            if csts[(i, j)] != -csts[(j, i)]:
                raise ValueError("structure constants must be antisymmetric")
    for i in range(rank):
        for j in range(rank):
            for k in range(rank):
                lhs = inner(csts[(i, j)], module.basis(k))
                rhs = -inner(module.basis(j), csts[(i, k)])
                if lhs != rhs:
                    raise ValueError("gram is not invariant under the bracket")
    m = Cochain.from_tables(module, 3, csts, symbol_table=None)
    ok, report = verify_courant(m)
    if not ok:
        raise ValueError("bracket table fails the structure equations: %s" % report)
    return CourantStructure.from_cochain(m, Connection.flat(module), check=False)


# -- verification ----------------------------------------------------------------


def jacobi_identity_holds(m: Cochain, probes) -> tuple[bool, str | None]:
    """m(x, m(y, z)) = m(m(x, y), z) + m(y, m(x, z)) on the probe set."""
    for x, y, z in itertools.product(probes, repeat=3):
        lhs = m(x, m(y, z))
        rhs = m(m(x, y), z) + m(y, m(x, z))
        if lhs != rhs:
            return False, "Jacobi fails on (%r, %r, %r)" % (x, y, z)
    return True, None


def verify_courant(m: Cochain, depth: int = 1) -> tuple[bool, dict]:
    """Two independent routes to the same verdict.

    The evaluation route checks the structure axioms (Jacobi plus the two
    inner-product compatibilities, which coincide with the complex's defining
    identities).  The bracket route checks membership plus [m, m] = 0.  The
    report carries both verdicts; they must agree.
    """
    from .cmaps import probe_elements

    report: dict = {}
    valid, vreport = cmap_verify(m, depth=depth)
    probes = probe_elements(m.module, depth)
    if valid:
        jac_ok, jac_msg = jacobi_identity_holds(m, probes)
    else:
        jac_ok, jac_msg = False, "not a complex element: %s" % vreport["violation"]
    axiom_route = valid and jac_ok
    report["axiom_route"] = axiom_route
    report["axiom_detail"] = jac_msg if not axiom_route else None
    if valid:
        self_bracket = cbracket(m, m)
        bracket_route = self_bracket.is_zero()
        report["bracket_detail"] = None if bracket_route else "[m, m] != 0"
    else:
        bracket_route = False
        report["bracket_detail"] = "not a complex element: %s" % vreport["violation"]
    report["bracket_route"] = bracket_route
    report["probe_bound"] = depth
    report["agree"] = axiom_route == bracket_route
    return axiom_route and bracket_route, report


def derived_bracket(cs: CourantStructure, x: ModuleElement, y: ModuleElement) -> ModuleElement:
    """[[x, m], y], computed through the complex's bracket operations."""
    m = cs.cochain
    step = cbracket(Cochain.from_module_element(x), m)
    out = cbracket(step, Cochain.from_module_element(y))
    return out.module_part()


def dorfman_bracket(module: MetricModule, n: int, u: ModuleElement, v: ModuleElement) -> ModuleElement:
    """Independent evaluator: [X + xi, Y + eta] = [X, Y] + L_X eta - i_Y d xi.

    Components: [X,Y]^i = X(Y^i) - Y(X^i); (L_X eta)_i = X(eta_i) +
    eta_j d_i X^j; (i_Y d xi)_i = Y^j (d_j xi_i - d_i xi_j).
    """
    backend = module.backend
    X, xi = u.coeffs[:n], u.coeffs[n:]
    Y, eta = v.coeffs[:n], v.coeffs[n:]

    def apply_field(F, a: Poly) -> Poly:
        out = Poly.zero(backend)
        for j in range(n):
            out = out + F[j] * a.partial(j)
        return out

    vec = [apply_field(X, Y[i]) - apply_field(Y, X[i]) for i in range(n)]
    form = []
    for i in range(n):
        lie = apply_field(X, eta[i])
        for j in range(n):
            lie = lie + eta[j] * X[j].partial(i)
        contraction = Poly.zero(backend)
        for j in range(n):
            contraction = contraction + Y[j] * (xi[i].partial(j) - xi[j].partial(i))
        form.append(lie - contraction)
    return ModuleElement(module, vec + form)


def verify_morphism(cs1: CourantStructure, cs2: CourantStructure,
                    phi: AlgebraMap, psi: ModuleMap, depth: int = 1) -> tuple[bool, dict]:
    """The five morphism conditions on bounded probes."""
    from .cmaps import probe_elements

    report = {"probe_bound": depth}
    failed = []
    backend1 = cs1.module.backend
    probes1 = probe_elements(cs1.module, depth)
    gen_polys = [Poly.var(backend1, i) for i in range(backend1.nvars)] or [Poly.one(backend1)]
    if any(phi(a * b) != phi(a) * phi(b) for a, b in itertools.product(gen_polys, repeat=2)):
        failed.append("(i) algebra morphism")
    if any(psi(x.scale(a)) != psi(x).scale(phi(a)) for a in gen_polys for x in probes1):
        failed.append("(ii) module semilinearity")
    if any(
        psi(derived_bracket(cs1, x, y)) != derived_bracket(cs2, psi(x), psi(y))
        for x, y in itertools.product(probes1, repeat=2)
    ):
        failed.append("(iii) bracket preservation")
    anchor_bad = False
    for x in probes1:
        sx = cs1.cochain.symbol((x,))
        sy = cs2.cochain.symbol((psi(x),))
        if any(phi(sx(a)) != sy(phi(a)) for a in gen_polys):
            anchor_bad = True
            break
    if anchor_bad:
        failed.append("(iv) anchor action")
    if any(
        phi(inner(x, y)) != inner(psi(x), psi(y))
        for x, y in itertools.product(probes1, repeat=2)
    ):
        failed.append("(v) inner product")
    report["failed"] = failed
    return not failed, report


# -- the deformation differential and cohomology -----------------------------------


def deformation_differential(cs: CourantStructure, c):
    """delta = {Theta, .} on the connection side, [m, .] on the complex side."""
    if isinstance(c, RothElement):
        return roth_bracket(cs.theta, c, cs.connection)
    if isinstance(c, Cochain):
        return cbracket(cs.cochain, c)
    raise TypeError("expected a graded element")


def internal_degree_of_term(module: MetricModule, exp, sym, ext) -> int:
    d = sum(exp) - len(sym)
    for a in ext:
        d += module.internal_degrees[a]
    return d


def roth_internal_degrees(phi: RothElement) -> set[int]:
    out = set()
    for (sym, ext), c in phi.terms.items():
        for exp in c.terms:
            out.add(internal_degree_of_term(phi.module, exp, sym, ext))
    return out


def enumerate_chain_basis(module: MetricModule, r: int, d: int):
    """Monomials of the degree-r bucket with internal degree d (a finite set)."""
    backend = module.backend
    ngen = num_der_generators(backend)
    basis = []
    for p in range(r // 2 + 1):
        k = r - 2 * p
        if k > module.rank or (p > 0 and ngen == 0):
            continue
        for sym in itertools.combinations_with_replacement(range(ngen), p):
            for ext in itertools.combinations(range(module.rank), k):
                need = d + p - sum(module.internal_degrees[a] for a in ext)
                if need < 0:
                    continue
                for exp in _exps_of_total(backend, need):
                    if backend.is_dual and p >= 1 and exp != (0,) * backend.nvars:
                        continue
                    basis.append((exp, sym, ext))
    return sorted(basis)


def _exps_of_total(backend: Backend, total: int):
    if backend.nvars == 0:
        return [()] if total == 0 else []
    out = []
    for exp in itertools.product(range(total + 1), repeat=backend.nvars):
        if sum(exp) != total:
            continue
        if backend.is_dual and exp[0] > 1:
            continue
        out.append(exp)
    return out


class GradedComplexBlock:
    """delta restricted to one (cohomological degree, internal degree) block."""

    __slots__ = ("r", "d", "source_basis", "target_basis", "matrix")

    def __init__(self, r, d, source_basis, target_basis, matrix):
        self.r = r
        self.d = d
        self.source_basis = source_basis
        self.target_basis = target_basis
        self.matrix = matrix  # rows over target, columns over source


def delta_block(cs: CourantStructure, r: int, d: int) -> GradedComplexBlock:
    """The exact matrix of the differential from block (r, d) into (r+1, d)."""
    degs = roth_internal_degrees(cs.theta)
    if degs - {0}:
        raise ModuleError(
            "block decomposition needs an internally homogeneous generator of degree 0; got %s"
            % sorted(degs)
        )
    module = cs.module
    src = enumerate_chain_basis(module, r, d)
    dst = enumerate_chain_basis(module, r + 1, d)
    index = {key: i for i, key in enumerate(dst)}
    matrix = [[Fraction(0)] * len(src) for _ in range(len(dst))]
    for col, (exp, sym, ext) in enumerate(src):
        mono = RothElement(module, {(sym, ext): Poly.monomial(module.backend, exp)})
        image = roth_bracket(cs.theta, mono, cs.connection)
        for (isym, iext), poly in image.terms.items():
            for iexp, frac in poly.terms.items():
                key = (iexp, isym, iext)
                if key not in index:
                    raise ModuleError(
                        "differential leaves the internal-degree block: %s" % (key,)
                    )
                matrix[index[key]][col] += frac
    return GradedComplexBlock(r, d, src, dst, matrix)


def cohomology_dims(cs: CourantStructure, r_range, d_range) -> dict:
    """dim H^{r,d} = null(delta^{r,d}) - rank(delta^{r-1,d}), all exact."""
    results = {}
    blocks: dict[tuple[int, int], GradedComplexBlock] = {}
    for d in d_range:
        for r in list(r_range):
            start = time.monotonic()
            if (r, d) not in blocks:
                blocks[(r, d)] = delta_block(cs, r, d)
            if (r - 1, d) not in blocks:
                blocks[(r - 1, d)] = delta_block(cs, r - 1, d) if r - 1 >= 0 else None
            blk = blocks[(r, d)]
            prev = blocks.get((r - 1, d))
            nsrc = len(blk.source_basis)
            rk = linalg.rank(blk.matrix) if blk.matrix and blk.source_basis else 0
            kernel = nsrc - rk
            prev_rank = 0
            if prev is not None and prev.matrix and prev.source_basis:
                prev_rank = linalg.rank(prev.matrix)
            results[(r, d)] = {
                "dim": kernel - prev_rank,
                "chain_dim": nsrc,
                "rank_out": rk,
                "rank_in": prev_rank,
                "seconds": time.monotonic() - start,
            }
    return results


def delta_squared_is_zero(cs: CourantStructure, r: int, d: int) -> bool:
    """Matrix product of consecutive blocks vanishes identically."""
    first = delta_block(cs, r, d)
    second = delta_block(cs, r + 1, d)
    if not first.source_basis or not second.target_basis:
        return True
    for i in range(len(second.target_basis)):
        for j in range(len(first.source_basis)):
            s = Fraction(0)
            for t in range(len(first.target_basis)):
                s += second.matrix[i][t] * first.matrix[t][j]
            if s:
                return False
    return True


def lie_algebra_center_dim(structure_constants) -> int:
    """Kernel of z -> [z, .] from the structure constants; the H^1 oracle."""
    rank_e = len(structure_constants)
    rows = []
    for j in range(rank_e):
        for k in range(rank_e):
            rows.append([Fraction(structure_constants[i][j][k]) for i in range(rank_e)])
    return len(linalg.nullspace(rows, ncols=rank_e))


# -- deformations -------------------------------------------------------------------


class DeformationSeries:
    """Coefficients m_1..m_k of a formal deformation of the structure."""

    __slots__ = ("structure", "coefficients")

    def __init__(self, structure: CourantStructure, coefficients):
        self.structure = structure
        self.coefficients = list(coefficients)
        for c in self.coefficients:
            if not isinstance(c, RothElement):
                raise TypeError("series coefficients live on the connection side")
            if not c.is_zero() and c.degrees() != {3}:
                raise ValueError("series coefficients must be homogeneous of degree 3")

    @property
    def order(self) -> int:
        return len(self.coefficients)


def mc_residuals(series: DeformationSeries) -> list[RothElement]:
    """For each order j <= k: 2 delta(m_j) + sum_{i<j} {m_i, m_{j-i}}."""
    cs = series.structure
    conn = cs.connection
    ms = series.coefficients
    out = []
    for j in range(1, len(ms) + 1):
        res = roth_bracket(cs.theta, ms[j - 1], conn).scale(2)
        for i in range(1, j):
            res = res + roth_bracket(ms[i - 1], ms[j - i - 1], conn)
        out.append(res)
    return out


def mc_series_valid(series: DeformationSeries):
    for j, res in enumerate(mc_residuals(series), start=1):
        if not res.is_zero():
            return False, j
    return True, None


def mc_obstruction(series: DeformationSeries) -> tuple[RothElement, bool]:
    """The degree-4 element sum_{i=1}^{k} {m_i, m_{k+1-i}} and its cocycle flag."""
    cs = series.structure
    conn = cs.connection
    ms = series.coefficients
    k = len(ms)
    obs = RothElement.zero(cs.module)
    for i in range(1, k + 1):
        obs = obs + roth_bracket(ms[i - 1], ms[k - i], conn)
    flag = roth_bracket(cs.theta, obs, conn).is_zero()
    return obs, flag


def mc_extend(series: DeformationSeries, candidate: RothElement) -> bool:
    """Order k+1 acceptance: 2 delta(m_{k+1}) = -obstruction."""
    ok, bad_order = mc_series_valid(series)
    if not ok:
        raise ValueError("input series fails its relations at order %d" % bad_order)
    cs = series.structure
    obs, _ = mc_obstruction(series)
    lhs = roth_bracket(cs.theta, candidate, cs.connection).scale(2)
    return (lhs + obs).is_zero()


def mc_bruteforce_orders(series: DeformationSeries, candidate: RothElement) -> list[bool]:
    """Vanishing of each t-coefficient of {m_t, m_t} through order k+1.

    m_t = Theta + m_1 t + ... + m_{k+1} t^{k+1}; the j-th coefficient is
    sum_{i=0}^{j} {m_i, m_{j-i}} with m_0 = Theta.
    """
    cs = series.structure
    conn = cs.connection
    ms = [cs.theta] + series.coefficients + [candidate]
    k1 = len(ms) - 1
    out = []
    for j in range(1, k1 + 1):
        coeff = RothElement.zero(cs.module)
        for i in range(0, j + 1):
            if i <= k1 and j - i <= k1:
                coeff = coeff + roth_bracket(ms[i], ms[j - i], conn)
        out.append(coeff.is_zero())
    return out
