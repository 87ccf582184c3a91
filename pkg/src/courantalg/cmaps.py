"""The complex of quasi-Courant brackets with its bracket and wedge product.

A degree-r cochain is stored through its full symbol tower: for each level p
with 2p <= r, a table of scalar values

    levels[p][(g_1 <= ... <= g_p), (b_1, ..., b_{r-2p})]

holding pi^(p) applied to the algebra generators g_i, evaluated on module
basis elements and paired into the coefficient algebra (the degree-(r-2p)
multilinear form).  Level 0 is the form of the raw multilinear map, level 1
its symbol, level p+1 the symbol of level p.  Evaluation on arguments with
polynomial coefficients reduces slot by slot from the right: the last slot
is linear over the algebra, and an adjacent swap at slot i costs the
correction

    omega(..., y_i, y_{i+1}, ...) + omega(..., y_{i+1}, y_i, ...)
        = sigma(remaining args)(<y_i, y_{i+1}>),

which consumes one level of the tower.  This makes elements with genuinely
second-order symbols (nonzero level 2 over vanishing levels 0 and 1)
representable; the quartic built from a symmetric biderivation over the dual
numbers is the motivating case.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from .modules import MetricModule, ModuleElement, ModuleError, inner
from .poly import Backend, Derivation, Poly, num_der_generators
from .rothstein import ModuleMap

LevelTable = dict[tuple[tuple[int, ...], tuple[int, ...]], Poly]


def _gen_var_index(backend: Backend, j: int) -> int:
    return 0 if backend.is_dual else j


def _clean_levels(levels: dict[int, LevelTable]) -> dict[int, LevelTable]:
    out: dict[int, LevelTable] = {}
    for p, table in levels.items():
        clean = {k: v for k, v in table.items() if not v.is_zero()}
        if clean:
            out[p] = clean
    return out


class Cochain:
    """Degree-r element of the quasi-Courant complex (immutable)."""

    __slots__ = ("module", "degree", "levels", "provenance", "source", "_hash", "_memo", "_marg_cache")

    def __init__(self, module: MetricModule, degree: int, levels: dict[int, LevelTable],
                 provenance: str = "raw", source=None):
        if degree < 0:
            levels = {}
        for p, table in levels.items():
            if 2 * p > degree:
                raise ValueError("tower level %d too high for degree %d" % (p, degree))
            for (gens, args), v in table.items():
                if len(gens) != p or len(args) != degree - 2 * p:
                    raise ValueError("malformed tower key")
        self.module = module
        self.degree = degree
        self.levels = _clean_levels(levels)
        self.provenance = provenance
        self.source = source
        self._hash = None
        self._memo = {}
        self._marg_cache = {}

    # -- constructors --------------------------------------------------

    @staticmethod
    def zero(module: MetricModule, degree: int) -> "Cochain":
        return Cochain(module, degree, {})

    @staticmethod
    def scalar(module: MetricModule, a: Poly) -> "Cochain":
        return Cochain(module, 0, {0: {((), ()): a}})

    @staticmethod
    def from_module_element(x: ModuleElement) -> "Cochain":
        module = x.module
        table = {}
        for b in range(module.rank):
            table[((), (b,))] = inner(x, module.basis(b))
        return Cochain(module, 1, {0: table})

    @staticmethod
    def from_tables(module: MetricModule, degree: int, value_table, symbol_table=None,
                    provenance: str = "raw") -> "Cochain":
        """Degree 2 or 3 element from a value table on basis tuples plus its symbol.

        value_table maps (r-1)-tuples of basis indices to ModuleElements;
        symbol_table maps (r-2)-tuples to Derivations.  Degrees up to 3 carry
        no higher tower levels, so these tables are the complete data.
        """
        if degree not in (2, 3):
            raise ValueError("table constructor supports degrees 2 and 3")
        backend = module.backend
        lvl0: LevelTable = {}
        for key in itertools.product(range(module.rank), repeat=degree - 1):
            val = value_table.get(tuple(key))
            if val is None:
                continue
            for b in range(module.rank):
                lvl0[((), tuple(key) + (b,))] = inner(val, module.basis(b))
        levels = {0: lvl0}
        ngen = num_der_generators(backend)
        if symbol_table and ngen:
            lvl1: LevelTable = {}
            for key in itertools.product(range(module.rank), repeat=degree - 2):
                d = symbol_table.get(tuple(key))
                if d is None:
                    continue
                for j in range(ngen):
                    gv = Poly.var(backend, _gen_var_index(backend, j))
                    lvl1[((j,), tuple(key))] = d(gv)
            levels[1] = lvl1
        return Cochain(module, degree, levels, provenance)

    @staticmethod
    def from_callable(module: MetricModule, degree: int, fn, provenance: str = "raw") -> "Cochain":
        """Degree 2 or 3 element from an evaluation callable, symbol inferred.

        fn takes degree-1 ModuleElements and returns a ModuleElement.  The
        symbol is reconstructed through the fullness witness (every algebra
        element a equals <a x, y> for the witness pair) and must be verified
        afterwards by the caller.
        """
        if degree not in (2, 3):
            raise ValueError("callable constructor supports degrees 2 and 3")
        backend = module.backend
        (wx, wy), = module.fullness_witness()
        value_table = {
            key: fn(*[module.basis(b) for b in key])
            for key in itertools.product(range(module.rank), repeat=degree - 1)
        }
        ngen = num_der_generators(backend)
        symbol_table = {}
        for key in itertools.product(range(module.rank), repeat=degree - 2):
            coeffs = []
            for j in range(ngen):
                g = Poly.var(backend, _gen_var_index(backend, j))
                gx = wx.scale(g)
                if degree == 2:
                    val = inner(fn(gx), wy) + inner(gx, fn(wy))
                else:
                    u = module.basis(key[0])
                    val = inner(fn(gx, wy) + fn(wy, gx), u)
                coeffs.append(val)
            symbol_table[key] = _derivation_from_values(backend, coeffs)
        return Cochain.from_tables(module, degree, value_table, symbol_table, provenance)

    # -- structural ------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.levels

    def max_level(self) -> int:
        if self.module.backend.nvars == 0:
            return 0
        return self.degree // 2

    def with_provenance(self, provenance: str, source=None) -> "Cochain":
        return Cochain(self.module, self.degree, self.levels, provenance, source)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Cochain):
            return NotImplemented
        if self.module != other.module:
            return False
        if not self.levels and not other.levels:
            return True  # the zero element regardless of nominal degree
        return self.degree == other.degree and self.levels == other.levels

    def __hash__(self) -> int:
        if self._hash is None:
            frozen = tuple(
                (p, tuple(sorted(self.levels[p].items())))
                for p in sorted(self.levels)
            )
            degree = self.degree if self.levels else -1
            self._hash = hash((self.module, degree, frozen))
        return self._hash

    def __repr__(self) -> str:
        return "Cochain(degree=%d, %d tower entries)" % (
            self.degree,
            sum(len(t) for t in self.levels.values()),
        )

    # -- arithmetic --------------------------------------------------------

    def _check(self, other: "Cochain"):
        if self.module != other.module:
            raise ModuleError("module mismatch")
        if self.degree != other.degree:
            raise ValueError("degree mismatch: %d vs %d" % (self.degree, other.degree))

    def __add__(self, other: "Cochain") -> "Cochain":
        self._check(other)
        levels: dict[int, LevelTable] = {p: dict(t) for p, t in self.levels.items()}
        zero = Poly.zero(self.module.backend)
        for p, table in other.levels.items():
            dst = levels.setdefault(p, {})
            for k, v in table.items():
                dst[k] = dst.get(k, zero) + v
        return Cochain(self.module, self.degree, levels)

    def __sub__(self, other: "Cochain") -> "Cochain":
        return self + (-other)

    def __neg__(self) -> "Cochain":
        return Cochain(
            self.module,
            self.degree,
            {p: {k: -v for k, v in t.items()} for p, t in self.levels.items()},
        )

    def scale(self, a) -> "Cochain":
        """Module action of the coefficient algebra (multiplies every level)."""
        if not isinstance(a, Poly):
            a = Poly.const(self.module.backend, a)
        return Cochain(
            self.module,
            self.degree,
            {p: {k: a * v for k, v in t.items()} for p, t in self.levels.items()},
        )

    # -- evaluation --------------------------------------------------------

    def _eval_mono(self, p: int, gens: tuple[int, ...], margs) -> Poly:
        """Evaluate level p on (monomial exponent, basis index) arguments."""
        key = (p, gens, margs)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        module = self.module
        backend = module.backend
        unit = (0,) * backend.nvars
        idx = None
        for i in range(len(margs) - 1, -1, -1):
            if margs[i][0] != unit:
                idx = i
                break
        if idx is None:
            out = self.levels.get(p, {}).get((gens, tuple(b for _, b in margs)), Poly.zero(backend))
        elif idx == len(margs) - 1:
            mono = Poly.monomial(backend, margs[idx][0])
            out = mono * self._eval_mono(p, gens, margs[:-1] + ((unit, margs[idx][1]),))
        else:
            exp, b = margs[idx]
            b2 = margs[idx + 1][1]
            swapped = margs[:idx] + (margs[idx + 1], margs[idx]) + (margs[idx + 2:])
            out = -self._eval_mono(p, gens, swapped)
            a = Poly.monomial(backend, exp) * module.gram[b][b2]
            rest = margs[:idx] + margs[idx + 2:]
            out = out + self._apply_symbol(p, gens, a, rest)
        self._memo[key] = out
        return out

    def _apply_symbol(self, p: int, gens: tuple[int, ...], a: Poly, margs) -> Poly:
        """sigma of the level-p form applied to a, i.e. one level up the tower."""
        backend = self.module.backend
        out = Poly.zero(backend)
        ngen = num_der_generators(backend)
        for j in range(ngen):
            part = a.partial(_gen_var_index(backend, j))
            if part.is_zero():
                continue
            new_gens = tuple(sorted(gens + (j,)))
            out = out + part * self._eval_mono(p + 1, new_gens, margs)
        return out

    def _expand_module_arg(self, x: ModuleElement):
        cached = self._marg_cache.get(x)
        if cached is None:
            cached = [
                (c, exp, b)
                for b, poly in enumerate(x.coeffs)
                for exp, c in poly.terms.items()
            ]
            self._marg_cache[x] = cached
        return cached

    def eval_level(self, p: int, gen_args, mod_args) -> Poly:
        """Level-p value on general algebra and module arguments."""
        backend = self.module.backend
        if len(mod_args) != self.degree - 2 * p:
            raise ValueError("expected %d module arguments" % (self.degree - 2 * p))
        if len(gen_args) != p:
            raise ValueError("expected %d algebra arguments" % p)
        return self._eval_sder(p, tuple(gen_args), (), mod_args)

    def _eval_sder(self, p, pending, gens, mod_args) -> Poly:
        backend = self.module.backend
        if pending:
            a, rest = pending[0], pending[1:]
            out = Poly.zero(backend)
            for j in range(num_der_generators(backend)):
                part = a.partial(_gen_var_index(backend, j))
                if part.is_zero():
                    continue
                out = out + part * self._eval_sder(p, rest, tuple(sorted(gens + (j,))), mod_args)
            return out
        expansions = [self._expand_module_arg(x) for x in mod_args]
        out = Poly.zero(backend)
        for combo in itertools.product(*expansions):
            c = Fraction(1)
            for frac, _, _ in combo:
                c *= frac
            margs = tuple((exp, b) for _, exp, b in combo)
            val = self._eval_mono(p, gens, margs)
            if not val.is_zero():
                out = out + val.scale(c)
        return out

    def omega(self, args) -> Poly:
        """The degree-r multilinear form <C(x_1..x_{r-1}), x_r>."""
        return self.eval_level(0, (), tuple(args))

    def __call__(self, *args: ModuleElement) -> ModuleElement:
        """The raw multilinear map on r-1 module arguments."""
        if self.degree < 1:
            raise ValueError("degree-0 elements take no arguments")
        if len(args) != self.degree - 1:
            raise ValueError("expected %d arguments" % (self.degree - 1))
        module = self.module
        vals = [self.omega(tuple(args) + (module.basis(b),)) for b in range(module.rank)]
        return module.raise_form(vals)

    def scalar_part(self) -> Poly:
        if self.degree != 0:
            raise ValueError("not a degree-0 element")
        return self.levels.get(0, {}).get(((), ()), Poly.zero(self.module.backend))

    def module_part(self) -> ModuleElement:
        if self.degree != 1:
            raise ValueError("not a degree-1 element")
        vals = [self.levels.get(0, {}).get(((), (b,)), Poly.zero(self.module.backend))
                for b in range(self.module.rank)]
        return self.module.raise_form(vals)

    def symbol(self, args) -> Derivation:
        """The symbol as a Derivation, on r-2 module arguments."""
        if self.degree < 2:
            raise ValueError("degree >= 2 required")
        backend = self.module.backend
        ngen = num_der_generators(backend)
        coeffs = []
        for j in range(ngen):
            g = Poly.var(backend, _gen_var_index(backend, j))
            coeffs.append(self.eval_level(1, (g,), tuple(args)))
        return _derivation_from_values(backend, coeffs)


def _derivation_from_values(backend: Backend, values) -> Derivation:
    """Derivation with prescribed values on the algebra generators."""
    if backend.is_dual:
        # value on eps must be c*eps; the coefficient recovers the generator multiple
        v = values[0]
        if v.terms.get((0,), 0) != 0:
            raise ValueError("derivation value on eps must be a multiple of eps")
        return Derivation(backend, v.terms.get((1,), Fraction(0)))
    return Derivation(backend, tuple(values))


# -- slices and insertion ---------------------------------------------------


def generator_slice(c: Cochain, j: int) -> Cochain:
    """[C, g_j] for the j-th algebra generator: one tower level consumed."""
    if c.degree < 2:
        return Cochain.zero(c.module, c.degree - 2)
    levels: dict[int, LevelTable] = {}
    for p, table in c.levels.items():
        if p == 0:
            continue
        shifted: LevelTable = {}
        for (gens, args), v in table.items():
            if j in gens:
                rest = list(gens)
                rest.remove(j)
                shifted[(tuple(rest), args)] = v
        if shifted:
            levels[p - 1] = shifted
    return Cochain(c.module, c.degree - 2, levels)


def bracket_scalar(c: Cochain, a: Poly) -> Cochain:
    """[C, a]: the derivation-in-a slice of the tower."""
    backend = c.module.backend
    out = Cochain.zero(c.module, c.degree - 2)
    if c.degree < 2 or c.is_zero():
        return out
    for j in range(num_der_generators(backend)):
        part = a.partial(_gen_var_index(backend, j))
        if part.is_zero():
            continue
        out = out + generator_slice(c, j).scale(part)
    return out


def insert(c: Cochain, x: ModuleElement) -> Cochain:
    """i_x C: insertion into the first argument (degree >= 2 only)."""
    if c.degree < 2:
        raise ValueError("insertion needs degree >= 2")
    module = c.module
    if x.module != module:
        raise ModuleError("module mismatch")
    new_degree = c.degree - 1
    if c.is_zero() or x.is_zero():
        return Cochain.zero(module, new_degree)
    cache = c._marg_cache.setdefault("_insert", {})
    hit = cache.get(x)
    if hit is not None:
        return hit
    backend = module.backend
    ngen = num_der_generators(backend)
    levels: dict[int, LevelTable] = {}
    basis_idx = _basis_index(x)
    if basis_idx is not None:
        # basis insertion just re-keys the stored tables
        for p, table in c.levels.items():
            if 2 * p > new_degree:
                continue
            sliced = {
                (gens, args[1:]): v
                for (gens, args), v in table.items()
                if args and args[0] == basis_idx
            }
            if sliced:
                levels[p] = sliced
    else:
        for p in range(0, new_degree // 2 + 1):
            if p > 0 and ngen == 0:
                break
            nargs = new_degree - 2 * p
            table: LevelTable = {}
            for gens in itertools.combinations_with_replacement(range(ngen), p):
                gvars = tuple(Poly.var(backend, _gen_var_index(backend, j)) for j in gens)
                for bargs in itertools.product(range(module.rank), repeat=nargs):
                    margs = (x,) + tuple(module.basis(b) for b in bargs)
                    val = c._eval_sder(p, gvars, (), margs)
                    if not val.is_zero():
                        table[(tuple(gens), bargs)] = val
            if table:
                levels[p] = table
    out = Cochain(module, new_degree, levels)
    cache[x] = out
    return out


def _basis_index(x: ModuleElement) -> int | None:
    idx = None
    for a, coeff in enumerate(x.coeffs):
        if coeff.is_zero():
            continue
        if idx is not None or not coeff.is_one():
            return None
        idx = a
    return idx


# -- bracket and wedge ------------------------------------------------------

DEGREE_CAP = 8  # table sizes grow as rank^(r-1); results above this degree refused

_BRACKET_CACHE: dict = {}
_WEDGE_CACHE: dict = {}


def _check_degree_cap(result_degree: int, what: str):
    if result_degree > DEGREE_CAP:
        raise ValueError(
            "%s of result degree %d exceeds the %d cap" % (what, result_degree, DEGREE_CAP)
        )


def clear_caches():
    _BRACKET_CACHE.clear()
    _WEDGE_CACHE.clear()


def cbracket(a: Cochain, b: Cochain) -> Cochain:
    """The graded bracket [a, b] of degree -2, built by the insertion recursion."""
    if a.module != b.module:
        raise ModuleError("module mismatch")
    r, s = a.degree, b.degree
    n = r + s - 2
    if a.is_zero() or b.is_zero():
        return Cochain.zero(a.module, n)
    _check_degree_cap(n, "bracket")
    if r > s:
        out = cbracket(b, a)
        if (r * s) % 2 == 0:
            out = -out
        return out
    key = (a, b)
    hit = _BRACKET_CACHE.get(key)
    if hit is not None:
        return hit
    module = a.module
    if r == 0:
        out = -bracket_scalar(b, a.scalar_part())
    elif r == 1:
        x = a.module_part()
        if s == 1:
            out = Cochain.scalar(module, inner(x, b.module_part()))
        else:
            out = insert(b, x)
            if s % 2 == 0:
                out = -out
    else:
        out = _compose_from_slices(
            module,
            n,
            lambda eb: _bracket_insert_step(a, b, eb, s),
            lambda j: cbracket(generator_slice(a, j), b) + cbracket(a, generator_slice(b, j)),
        )
    _BRACKET_CACHE[key] = out
    return out


def _bracket_insert_step(a: Cochain, b: Cochain, eb: ModuleElement, s: int) -> Cochain:
    first = cbracket(cbracket(a, Cochain.from_module_element(eb)), b)
    if s % 2:
        first = -first
    return first + cbracket(a, cbracket(b, Cochain.from_module_element(eb)))


def _compose_from_slices(module: MetricModule, degree: int, insert_fn, gen_fn) -> Cochain:
    """Assemble a cochain of the given degree from its insertions and slices.

    insert_fn(e_b) must return i_{e_b} of the target element; gen_fn(j) its
    bracket with the j-th algebra generator.  Level 0 stacks the insertion
    forms; level p >= 1 stacks level p-1 of the generator slices.
    """
    backend = module.backend
    levels: dict[int, LevelTable] = {}
    lvl0: LevelTable = {}
    for b in range(module.rank):
        part = insert_fn(module.basis(b))
        for (gens, args), v in part.levels.get(0, {}).items():
            lvl0[((), (b,) + args)] = v
    if lvl0:
        levels[0] = lvl0
    ngen = num_der_generators(backend)
    if ngen and degree >= 2:
        slices = [gen_fn(j) for j in range(ngen)]
        for p in range(1, degree // 2 + 1):
            table: LevelTable = {}
            for j in range(ngen):
                for (gens, args), v in slices[j].levels.get(p - 1, {}).items():
                    if gens and gens[0] < j:
                        continue  # counted by the smaller leading generator
                    table[(tuple(sorted((j,) + gens)), args)] = v
            if table:
                levels[p] = table
    return Cochain(module, degree, levels)


def cwedge(a: Cochain, b: Cochain) -> Cochain:
    """Associative graded-commutative product, by the same recursion scheme."""
    if a.module != b.module:
        raise ModuleError("module mismatch")
    r, s = a.degree, b.degree
    n = r + s
    if a.is_zero() or b.is_zero():
        return Cochain.zero(a.module, n)
    if r == 0:
        return b.scale(a.scalar_part())
    if s == 0:
        return a.scale(b.scalar_part())
    _check_degree_cap(n, "wedge")
    key = (a, b)
    hit = _WEDGE_CACHE.get(key)
    if hit is not None:
        return hit
    module = a.module

    def insert_fn(eb):
        first = cwedge(cbracket(a, Cochain.from_module_element(eb)), b)
        if s % 2:
            first = -first
        return first + cwedge(a, cbracket(b, Cochain.from_module_element(eb)))

    def gen_fn(j):
        return cwedge(generator_slice(a, j), b) + cwedge(a, generator_slice(b, j))

    out = _compose_from_slices(module, n, insert_fn, gen_fn)
    _WEDGE_CACHE[key] = out
    return out


def _shuffles(p: int, q: int):
    """(p,q)-shuffles of range(p+q) as (sign, block1, block2)."""
    universe = list(range(p + q))
    for block1 in itertools.combinations(universe, p):
        block2 = tuple(i for i in universe if i not in block1)
        inversions = sum(1 for i in block1 for j in block2 if i > j)
        yield (-1 if inversions % 2 else 1), block1, block2


def cwedge_shuffle(a: Cochain, b: Cochain) -> Cochain:
    """Wedge through the closed shuffle formula for the level-0 table.

    Higher tower levels are assembled through the generator slices exactly
    as in the recursive mode, so the two modes differing on any level-0
    entry is the cross-check.
    """
    if a.module != b.module:
        raise ModuleError("module mismatch")
    r, s = a.degree, b.degree
    if r == 0 or s == 0 or a.is_zero() or b.is_zero():
        return cwedge(a, b)
    module = a.module
    n = r + s
    lvl0: LevelTable = {}
    sign_rs = -1 if (r * s) % 2 else 1
    for args in itertools.product(range(module.rank), repeat=n):
        basis_args = [module.basis(i) for i in args[:-1]]
        last = module.basis(args[-1])
        total = Poly.zero(module.backend)
        for sgn, blk1, blk2 in _shuffles(r, s - 1):
            w1 = a.omega(tuple(basis_args[i] for i in blk1))
            if w1.is_zero():
                continue
            w2 = b.omega(tuple(basis_args[i] for i in blk2) + (last,))
            total = total + Fraction(sign_rs * sgn) * (w1 * w2)
        for sgn, blk1, blk2 in _shuffles(s, r - 1):
            w2 = b.omega(tuple(basis_args[i] for i in blk1))
            if w2.is_zero():
                continue
            w1 = a.omega(tuple(basis_args[i] for i in blk2) + (last,))
            total = total + Fraction(sgn) * (w2 * w1)
        if not total.is_zero():
            lvl0[((), args)] = total
    levels: dict[int, LevelTable] = {0: lvl0} if lvl0 else {}
    backend = module.backend
    ngen = num_der_generators(backend)
    if ngen and n >= 2:
        slices = [
            cwedge(generator_slice(a, j), b) + cwedge(a, generator_slice(b, j))
            for j in range(ngen)
        ]
        for p in range(1, n // 2 + 1):
            table: LevelTable = {}
            for j in range(ngen):
                for (gens, args2), v in slices[j].levels.get(p - 1, {}).items():
                    if gens and gens[0] < j:
                        continue
                    table[(tuple(sorted((j,) + gens)), args2)] = v
            if table:
                levels[p] = table
    return Cochain(module, n, levels)


def cmap_wedge(a: Cochain, b: Cochain, mode: str = "recursive") -> Cochain:
    if mode == "recursive":
        return cwedge(a, b)
    if mode == "shuffle":
        return cwedge_shuffle(a, b)
    raise ValueError("mode must be recursive or shuffle")


# -- verification -----------------------------------------------------------


def _probe_monomials(backend: Backend, depth: int):
    """All monomials of total degree <= depth (the unit first)."""
    out = [Poly.one(backend)]
    if backend.nvars == 0:
        return out
    max_eps = 1 if backend.is_dual else depth
    for total in range(1, depth + 1):
        for exp in itertools.product(range(total + 1), repeat=backend.nvars):
            if sum(exp) != total:
                continue
            if backend.is_dual and exp[0] > max_eps:
                continue
            out.append(Poly.monomial(backend, exp))
    return out


def probe_elements(module: MetricModule, depth: int):
    return [
        module.basis(b).scale(mono)
        for mono in _probe_monomials(module.backend, depth)
        for b in range(module.rank)
    ]


def default_verify_depth(c: Cochain) -> int:
    maxdeg = 0
    for table in c.levels.values():
        for v in table.values():
            maxdeg = max(maxdeg, v.total_degree())
    return 2 * (maxdeg + 1)


def cmap_verify(c: Cochain, depth: int | None = None) -> tuple[bool, dict]:
    """Check the two defining identities on all bounded-degree probe tuples.

    For every probe tuple (y_1..y_r) and adjacent position i, the swap
    identity must hold; the i = r-1 instance is the derivation identity of
    the symbol against the inner product.  Returns (ok, report).
    """
    if depth is None:
        depth = default_verify_depth(c)
    report = {"bound": depth, "violation": None}
    r = c.degree
    if r < 2:
        return True, report
    module = c.module
    probes = probe_elements(module, depth)
    for args in itertools.product(probes, repeat=r):
        for i in range(r - 1):
            lhs = c.omega(args) + c.omega(args[:i] + (args[i + 1], args[i]) + args[i + 2:])
            rest = args[:i] + args[i + 2:]
            ip = inner(args[i], args[i + 1])
            rhs = c.eval_level(1, (ip,), rest) if 2 <= r else Poly.zero(module.backend)
            if lhs != rhs:
                report["violation"] = (
                    "swap identity fails at position %d on %s" % (i + 1, [repr(x) for x in args])
                )
                return False, report
    return True, report


# -- forms and the symbol tower ----------------------------------------------


class CochainForm:
    """The multilinear-form picture of a cochain (same tower, scalar values)."""

    __slots__ = ("cochain",)

    def __init__(self, cochain: Cochain):
        self.cochain = cochain

    @property
    def degree(self) -> int:
        return self.cochain.degree

    def __call__(self, *args: ModuleElement) -> Poly:
        return self.cochain.omega(args)

    def __eq__(self, other):
        if not isinstance(other, CochainForm):
            return NotImplemented
        return self.cochain == other.cochain


def to_form(c: Cochain) -> CochainForm:
    return CochainForm(c)


def from_form(form: CochainForm, depth: int | None = None) -> Cochain:
    """Back to the map picture; re-checks linearity of the last slot."""
    c = form.cochain
    module = c.module
    if c.degree >= 1:
        probes = probe_elements(module, 1)
        for args in itertools.product(probes, repeat=max(c.degree - 1, 0)):
            for x in probes:
                a = Poly.var(module.backend, 0) if module.backend.nvars else Poly.const(module.backend, 2)
                lhs = c.omega(tuple(args) + (x.scale(a),))
                rhs = a * c.omega(tuple(args) + (x,))
                if lhs != rhs:
                    raise ValueError("form is not linear over the algebra in its last slot")
    return c


class SymbolTower:
    """The sequence pi^(0), pi^(1), ... of iterated symbols of a form."""

    __slots__ = ("cochain", "max_level")

    def __init__(self, cochain: Cochain):
        self.cochain = cochain
        self.max_level = cochain.degree // 2 if cochain.module.backend.nvars else 0

    def level(self, p: int) -> LevelTable:
        return self.cochain.levels.get(p, {})

    def delta(self, p: int, gen_args) -> Cochain:
        """The level-p slice as a cochain of degree r - 2p."""
        out = self.cochain
        for a in gen_args:
            out = bracket_scalar(out, a)
        return out


def symbol_tower(form: CochainForm, depth: int = 1) -> SymbolTower:
    """Build and verify the tower of iterated symbols.

    Checks, for each consecutive pair of levels and all probes bounded by
    depth, that level p+1 applied to <u, v> reproduces the symmetrized
    double insertion into level p, and that each level is symmetric with
    derivation slots.  Raises on inconsistency.
    """
    c = form.cochain
    module = c.module
    backend = module.backend
    ngen = num_der_generators(backend)
    tower = SymbolTower(c)
    if ngen == 0:
        return tower
    probes = probe_elements(module, depth)
    gen_vars = [Poly.var(backend, _gen_var_index(backend, j)) for j in range(ngen)]
    for p in range(0, c.degree // 2):
        nargs = c.degree - 2 * p
        if nargs < 2:
            break
        for gens in itertools.combinations_with_replacement(range(ngen), p):
            gargs = tuple(gen_vars[j] for j in gens)
            for u, v in itertools.product(probes, repeat=2):
                ip = inner(u, v)
                for zargs in itertools.product(
                    [module.basis(b) for b in range(module.rank)], repeat=nargs - 2
                ):
                    lhs = c.eval_level(p + 1, gargs + (ip,), zargs)
                    rhs = c.eval_level(p, gargs, (u, v) + zargs) + c.eval_level(p, gargs, (v, u) + zargs)
                    if lhs != rhs:
                        raise ValueError(
                            "symbol extraction inconsistent at level %d" % (p + 1)
                        )
    # per-slot derivation property of each level on generator products
    for p in range(1, c.degree // 2 + 1):
        nargs = c.degree - 2 * p
        basis_args = list(itertools.product([module.basis(b) for b in range(module.rank)], repeat=nargs))
        for gens in itertools.combinations_with_replacement(range(ngen), p):
            for slot in range(p):
                for j in range(ngen):
                    gargs = [gen_vars[g] for g in gens]
                    prod_arg = gargs[slot] * gen_vars[j]
                    for zargs in basis_args:
                        lhs = c.eval_level(p, tuple(gargs[:slot] + [prod_arg] + gargs[slot + 1:]), zargs)
                        rhs = gargs[slot] * c.eval_level(p, tuple(gargs[:slot] + [gen_vars[j]] + gargs[slot + 1:]), zargs) \
                            + gen_vars[j] * c.eval_level(p, tuple(gargs), zargs)
                        if lhs != rhs:
                            raise ValueError("level %d is not a derivation in slot %d" % (p, slot))
    return tower


# -- push forward -------------------------------------------------------------


def cmap_pushforward(c: Cochain, gmap: ModuleMap) -> Cochain:
    """Transport along an isometric bijection over an algebra isomorphism."""
    if not gmap.is_isometric():
        raise ModuleError("push forward requires an isometric module map")
    src, dst = gmap.source, gmap.target
    if c.module != src:
        raise ModuleError("module mismatch")
    g = gmap.algebra_map
    ginv = g.inverse()
    backend_dst = dst.backend
    ngen = num_der_generators(backend_dst)
    pre_basis = [gmap.left_inverse(dst.basis(b)) for b in range(dst.rank)]
    levels: dict[int, LevelTable] = {}
    for p in range(0, c.degree // 2 + 1):
        if p > 0 and ngen == 0:
            break
        nargs = c.degree - 2 * p
        table: LevelTable = {}
        for gens in itertools.combinations_with_replacement(range(ngen), p):
            src_gvars = tuple(
                ginv(Poly.var(backend_dst, _gen_var_index(backend_dst, j))) for j in gens
            )
            for bargs in itertools.product(range(dst.rank), repeat=nargs):
                margs = tuple(pre_basis[b] for b in bargs)
                val = c._eval_sder(p, src_gvars, (), margs)
                if not val.is_zero():
                    table[(tuple(gens), bargs)] = g(val)
        if table:
            levels[p] = table
    return Cochain(dst, c.degree, levels, provenance=c.provenance)


class DerivationTail:
    """The Der(A) (x) E valued map dual to the symbol of a degree >= 3 element.

    table[(b_1..b_{r-3})][j] is the module element paired with the j-th
    derivation generator, so that applying the tail to an algebra element a
    gives sum_j (da/dg_j) table[...][j], and the defining pairing
    <tail(args) a, y> = sigma(args, y) a holds.
    """

    __slots__ = ("cochain", "table")

    def __init__(self, cochain: Cochain):
        if cochain.degree < 3:
            raise ValueError("the tail exists from degree 3 on")
        module = cochain.module
        backend = module.backend
        ngen = num_der_generators(backend)
        table = {}
        for args in itertools.product(range(module.rank), repeat=cochain.degree - 3):
            entry = []
            for j in range(ngen):
                vals = [
                    cochain.levels.get(1, {}).get(
                        ((j,), args + (b,)), Poly.zero(backend)
                    )
                    for b in range(module.rank)
                ]
                entry.append(module.raise_form(vals))
            table[args] = entry
        self.cochain = cochain
        self.table = table

    def apply(self, args, a: Poly) -> ModuleElement:
        module = self.cochain.module
        backend = module.backend
        out = module.zero()
        for j, v in enumerate(self.table[tuple(args)]):
            part = a.partial(_gen_var_index(backend, j))
            if not part.is_zero():
                out = out + v.scale(part)
        return out

    def pairing_invariant_holds(self, depth: int = 1) -> bool:
        """<tail(args) a, y> = sigma(args, y) a on bounded probes."""
        c = self.cochain
        module = c.module
        backend = module.backend
        gen_polys = [Poly.var(backend, _gen_var_index(backend, j))
                     for j in range(num_der_generators(backend))]
        probes = probe_elements(module, depth)
        for args in itertools.product(range(module.rank), repeat=c.degree - 3):
            basis_args = tuple(module.basis(b) for b in args)
            for a in gen_polys:
                image = self.apply(args, a)
                for y in probes:
                    if inner(image, y) != c.eval_level(1, (a,), basis_args + (y,)):
                        return False
        return True


def symbol_via_fullness(c: Cochain, args, g: Poly) -> Poly:
    """The symbol recovered from values through the fullness witness.

    sigma(args)(g) = <C(args, g x), y> + <g x, C(args, y)> for the witness
    pair (x, y); an independent route to the stored symbol level, used to
    re-verify inferred symbols.
    """
    if c.degree < 2:
        raise ValueError("degree >= 2 required")
    module = c.module
    (wx, wy), = module.fullness_witness()
    gx = wx.scale(g)
    lhs = c.omega(tuple(args) + (gx, wy)) + c.omega(tuple(args) + (wy, gx))
    return lhs


def quartic_from_biderivation(module: MetricModule, P) -> Cochain:
    """The degree-4 element C(x, y, z) = P(x, z) y on a rank-1 module.

    P is a symmetric biderivation of the coefficient algebra; the module must
    be A itself with the multiplication pairing.  Value and symbol tables
    vanish on basis tuples; the entire content sits in the second tower
    level, where pi^(2)(a, b) = P(a, b).  Over the dual numbers this is the
    standard element outside the image of the symbol calculus.
    """
    if module.rank != 1 or not module.gram[0][0].is_one():
        raise ModuleError("biderivation quartic lives on A itself with the product pairing")
    backend = module.backend
    ngen = num_der_generators(backend)
    lvl2: LevelTable = {}
    for gens in itertools.combinations_with_replacement(range(ngen), 2):
        gvars = [Poly.var(backend, _gen_var_index(backend, j)) for j in gens]
        val = P(gvars[0], gvars[1])
        if not val.is_zero():
            lvl2[(tuple(gens), ())] = val
    return Cochain(module, 4, {2: lvl2})


# -- spec-facing aliases -------------------------------------------------------


def cmap_eval(c: Cochain, args) -> ModuleElement:
    return c(*args)


def cmap_bracket(a: Cochain, b: Cochain) -> Cochain:
    return cbracket(a, b)
