"""The Poisson monomorphism from the connection-based algebra into the complex.

J sends a scalar to itself, a module element to itself, and a derivation D to
the degree-2 element -nabla_D, extended multiplicatively over the wedge.  Its
tower tables come from nested brackets: level p of the image on generators
g_1..g_p and basis arguments b_1..b_q is the scalar

    {...{{...{phi, g_1}, ...}, g_p}, e_{b_1}}, ...}, e_{b_q}}.

The image is generated in degrees 0, 1, 2; degrees 2 and 3 are inverted in
closed form, and membership in higher degrees is decided by an exact linear
solve over Q against a coefficient-degree truncation.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from . import linalg
from .cmaps import Cochain, LevelTable, _gen_var_index, generator_slice
from .modules import Connection, MetricModule, ModuleElement, ModuleError, inner, raise_lambda2
from .poly import Backend, Poly, num_der_generators
from .rothstein import (
    RothElement,
    nested_bracket_with_modules,
    nested_bracket_with_scalars,
)


def apply_J(phi: RothElement, conn: Connection) -> Cochain:
    """Image of a homogeneous element, with its full tower, via nested brackets."""
    module = phi.module
    if conn.module != module:
        raise ModuleError("connection lives on a different module")
    backend = module.backend
    degree = phi.degree()
    ngen = num_der_generators(backend)
    basis = module.basis_elements()
    levels: dict[int, LevelTable] = {}
    for p in range(0, degree // 2 + 1):
        if p > 0 and ngen == 0:
            break
        nargs = degree - 2 * p
        table: LevelTable = {}
        for gens in itertools.combinations_with_replacement(range(ngen), p):
            gvars = [Poly.var(backend, _gen_var_index(backend, j)) for j in gens]
            chi = nested_bracket_with_scalars(phi, gvars, conn)
            if chi.is_zero():
                continue
            for bargs in itertools.product(range(module.rank), repeat=nargs):
                rho = nested_bracket_with_modules(chi, [basis[b] for b in bargs], conn)
                val = rho.scalar_part()
                if not val.is_zero():
                    table[(tuple(gens), bargs)] = val
        if table:
            levels[p] = table
    return Cochain(module, degree, levels, provenance="structural", source=phi)


class JImage:
    """A source element together with its verified image."""

    __slots__ = ("source", "target", "connection")

    def __init__(self, source: RothElement, target: Cochain, connection: Connection):
        self.source = source
        self.target = target
        self.connection = connection


def invert_J_deg2(c: Cochain, conn: Connection) -> RothElement:
    """Preimage of a degree-2 element: a bivector part plus minus the symbol.

    The bivector pairs against x ^ y as <nabla_{sigma} x - C(x), y>; the
    derivation part is minus the symbol of C (the image of a derivation D has
    symbol -D).  Verified by an exact round trip.
    """
    module = c.module
    if c.is_zero():
        return RothElement.zero(module)
    if c.degree != 2:
        raise ValueError("degree-2 inversion only")
    sigma = c.symbol(())
    basis = module.basis_elements()
    values = [c(x) for x in basis]
    pairing = [
        [inner(conn.nabla(sigma, basis[a]) - values[a], basis[b]) for b in range(module.rank)]
        for a in range(module.rank)
    ]
    for a in range(module.rank):
        for b in range(module.rank):
            if pairing[a][b] != -pairing[b][a]:
                raise ValueError("degree-2 element fails the metric antisymmetry check")
    xi = raise_lambda2(module, lambda a, b: pairing[a][b])
    phi = RothElement.from_lambda2(module, xi) - RothElement.from_derivation(module, sigma)
    if apply_J(phi, conn) != c:
        raise ValueError("degree-2 inversion round trip failed")
    return phi


def _raise_form(module: MetricModule, k: int, form) -> dict[tuple[int, ...], Poly]:
    """xi in the k-th exterior power with <xi, e_I> = form(I) for increasing I."""
    ginv = module.gram_inv
    m = module.rank
    out: dict[tuple[int, ...], Poly] = {}
    for target in itertools.combinations(range(m), k):
        s = Poly.zero(module.backend)
        for src in itertools.product(range(m), repeat=k):
            val = form(src)
            if val.is_zero():
                continue
            factor = Poly.one(module.backend)
            for b, a in zip(src, target):
                factor = factor * ginv[b][a]
            s = s + val * factor
        if not s.is_zero():
            out[target] = s
    return out


def derivation_tail(c: Cochain) -> list[ModuleElement]:
    """For degree 3: the module elements v_j with [C, a] = sum_j da/dg_j v_j."""
    if c.degree != 3:
        raise ValueError("derivation tail extraction expects degree 3")
    module = c.module
    backend = module.backend
    out = []
    for j in range(num_der_generators(backend)):
        sliced = generator_slice(c, j)
        x = sliced.module_part() if not sliced.is_zero() else module.zero()
        if backend.is_dual:
            # the slice equals eps * u; lift off the eps factor
            coeffs = []
            for poly in x.coeffs:
                if poly.terms.get((0,), 0) != 0:
                    raise ValueError("dual-number derivation tail must be a multiple of eps")
                coeffs.append(Poly.const(backend, poly.terms.get((1,), Fraction(0))))
            x = ModuleElement(module, coeffs)
        out.append(x)
    return out


def invert_J_deg3(c: Cochain, conn: Connection) -> RothElement:
    """Preimage of a degree-3 element: trivector part minus the Der-wedge part."""
    module = c.module
    if c.is_zero():
        return RothElement.zero(module)
    if c.degree != 3:
        raise ValueError("degree-3 inversion only")
    backend = module.backend
    tails = derivation_tail(c)
    der_part = RothElement.zero(module)
    for j, v in enumerate(tails):
        if v.is_zero():
            continue
        der_part = der_part + RothElement.monomial(module, (j,), ()).wedge(
            RothElement.from_module_element(v)
        )
    t_elem = c + apply_J(der_part, conn) if not der_part.is_zero() else c
    # the remainder must be a pure trivector: symbol-free and alternating
    for j in range(num_der_generators(backend)):
        if not generator_slice(t_elem, j).is_zero():
            raise ValueError("degree-3 remainder has a residual symbol; invalid input")
    basis = module.basis_elements()
    theta_vals = {}
    for idx in itertools.product(range(module.rank), repeat=3):
        theta_vals[idx] = t_elem.omega(tuple(basis[b] for b in idx))
    for idx, v in theta_vals.items():
        for i in range(2):
            swapped = idx[:i] + (idx[i + 1], idx[i]) + idx[i + 2:]
            if theta_vals[swapped] != -v:
                raise ValueError("degree-3 remainder pairing is not alternating")
    xi = _raise_form(module, 3, lambda src: -theta_vals[src])
    phi = RothElement(module, {((), key): val for key, val in xi.items()}) - der_part
    if apply_J(phi, conn) != c:
        raise ValueError("degree-3 inversion round trip failed")
    return phi


# -- membership in the image ----------------------------------------------------


def _roth_monomial_basis(module: MetricModule, degree: int, cap: int):
    """Monomial basis of the degree bucket with coefficient degree <= cap."""
    backend = module.backend
    ngen = num_der_generators(backend)
    out = []
    for p in range(degree // 2 + 1):
        k = degree - 2 * p
        if k > module.rank:
            continue
        if p > 0 and ngen == 0:
            continue
        for sym in itertools.combinations_with_replacement(range(ngen), p):
            for ext in itertools.combinations(range(module.rank), k):
                for mono in _monomials_up_to(backend, cap):
                    if backend.is_dual and p >= 1 and mono != (0,) * backend.nvars:
                        continue  # eps times a Der factor dies
                    out.append(
                        RothElement(
                            module,
                            {(sym, ext): Poly.monomial(backend, mono)},
                        )
                    )
    return out


def _monomials_up_to(backend: Backend, cap: int):
    unit = (0,) * backend.nvars
    yield unit
    if backend.nvars == 0:
        return
    for total in range(1, cap + 1):
        for exp in itertools.product(range(total + 1), repeat=backend.nvars):
            if sum(exp) != total:
                continue
            if backend.is_dual and exp[0] > 1:
                continue
            yield exp


def _flatten(c: Cochain, coords: dict, grow: bool) -> dict[tuple, Fraction]:
    vec = {}
    for p, table in c.levels.items():
        for (gens, args), poly in table.items():
            for exp, frac in poly.terms.items():
                key = (p, gens, args, exp)
                if key not in coords:
                    if not grow:
                        raise KeyError(key)
                    coords[key] = len(coords)
                vec[key] = frac
    return vec


def chat_membership(c: Cochain, conn: Connection, cap: int | None = None) -> dict:
    """Decide whether c lies in the image of J; exact linear algebra over Q.

    Degrees <= 3 use the closed-form inversions (always members).  Higher
    degrees solve J(phi) = c over the monomial basis with coefficient degree
    <= cap.  Over the dual numbers the spaces are finite so the answer is
    conclusive; over free polynomials the report carries the cap.
    """
    module = c.module
    degree = c.degree
    if cap is None:
        cap = 2
        for table in c.levels.values():
            for v in table.values():
                cap = max(cap, v.total_degree() + 1)
    conclusive = module.backend.is_dual
    if degree <= 3:
        if degree == 0:
            phi = RothElement.from_scalar(module, c.scalar_part())
        elif degree == 1:
            phi = RothElement.from_module_element(c.module_part())
        elif degree == 2:
            phi = invert_J_deg2(c, conn)
        else:
            phi = invert_J_deg3(c, conn)
        return {"member": True, "preimage": phi, "cap": cap, "conclusive": True}
    basis = _roth_monomial_basis(module, degree, cap)
    images = [apply_J(b, conn) for b in basis]
    coords: dict[tuple, int] = {}
    target_vec = _flatten(c, coords, grow=True)
    image_vecs = [_flatten(im, coords, grow=True) for im in images]
    ncoords = len(coords)
    rows = [[Fraction(0)] * len(basis) for _ in range(ncoords)]
    rhs = [Fraction(0)] * ncoords
    for j, vec in enumerate(image_vecs):
        for key, frac in vec.items():
            rows[coords[key]][j] = frac
    for key, frac in target_vec.items():
        rhs[coords[key]] = frac
    if not basis:
        nz = next((k for k, v in target_vec.items() if v), None)
        if nz is None:
            return {"member": True, "preimage": RothElement.zero(module), "cap": cap,
                    "conclusive": True}
        return {"member": False, "cap": cap, "conclusive": conclusive,
                "certificate": {"coordinate": _coord_name(module, nz), "residual": str(target_vec[nz]),
                                "reason": "no candidate monomials in the image"}}
    sol, witness = linalg.solve(rows, rhs)
    if sol is None:
        # locate an explicit unsatisfiable coordinate combination
        aug = [row + [b] for row, b in zip(rows, rhs)]
        red, pivots = linalg.rref(aug)
        cert_row = red[pivots.index(len(basis))]
        return {
            "member": False,
            "cap": cap,
            "conclusive": conclusive,
            "certificate": {
                "residual_row": [str(v) for v in cert_row],
                "coordinate": _coord_name(module, _first_target_coord(target_vec, coords)),
                "reason": "eliminated system contains 0 = 1",
            },
        }
    phi = RothElement.zero(module)
    for cval, b in zip(sol, basis):
        if cval:
            phi = phi + b.scale(cval)
    if apply_J(phi, conn) != c:
        raise AssertionError("membership solve produced a non-preimage")
    return {"member": True, "preimage": phi, "cap": cap, "conclusive": True}


def _first_target_coord(target_vec, coords):
    for key, v in sorted(target_vec.items(), key=lambda kv: coords[kv[0]]):
        if v:
            return key
    return next(iter(target_vec), ((), (), (), ()))


def _coord_name(module: MetricModule, key) -> str:
    p, gens, args, exp = key
    return "level %d, generators %s, basis args %s, monomial %s" % (
        p,
        list(gens),
        [module.names[a] for a in args],
        str(Poly.monomial(module.backend, exp)),
    )


def lambda_check(phi: RothElement, conn: Connection, cap: int = 2) -> bool:
    """Probe injectivity of the nested-scalar-bracket map on phi.

    For each symmetric degree p >= 1 present in phi, the p-fold bracket with
    algebra monomials of degree <= cap is evaluated and projected onto the
    symmetric-degree-zero part.  Returns False when phi has a nonzero
    Der-part that every probe annihilates (an injectivity failure, which the
    dual numbers exhibit).
    """
    module = phi.module
    backend = module.backend
    monos = [Poly.monomial(backend, e) for e in _monomials_up_to(backend, cap)
             if e != (0,) * backend.nvars]
    present = sorted({len(sym) for (sym, ext) in phi.terms if len(sym) >= 1})
    for p in present:
        part = RothElement(module, {k: v for k, v in phi.terms.items() if len(k[0]) == p})
        if part.is_zero():
            continue
        detected = False
        for probe in itertools.combinations_with_replacement(monos, p):
            val = nested_bracket_with_scalars(phi, list(probe), conn)
            flat = RothElement(
                module, {k: v for k, v in val.terms.items() if len(k[0]) == 0}
            )
            if not flat.is_zero():
                detected = True
                break
        if not detected:
            return False
    return True
