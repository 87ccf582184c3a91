"""Shared builders for randomized property tests (all explicitly seeded)."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from courantalg import (
    Backend,
    Connection,
    MetricModule,
    ModuleElement,
    Poly,
    RothElement,
    metrize,
)


def random_poly(rng: random.Random, backend: Backend, deg: int, scale: int = 3,
                density: float = 0.5) -> Poly:
    terms = {}
    for exp in itertools.product(range(deg + 1), repeat=backend.nvars):
        if sum(exp) <= deg and rng.random() < density:
            c = rng.randint(-scale, scale)
            if c:
                terms[exp] = Fraction(c)
    if backend.nvars == 0 and rng.random() < density:
        terms[()] = Fraction(rng.randint(-scale, scale))
    return Poly(backend, terms)


def random_module_element(rng: random.Random, module: MetricModule, deg: int = 1) -> ModuleElement:
    return ModuleElement(
        module, [random_poly(rng, module.backend, deg) for _ in range(module.rank)]
    )


def random_roth(rng: random.Random, module: MetricModule, degree: int,
                coeff_deg: int = 1, density: float = 0.6) -> RothElement:
    backend = module.backend
    ngen = 1 if backend.is_dual else backend.nvars
    terms = {}
    for p in range(degree // 2 + 1):
        k = degree - 2 * p
        if k > module.rank or (p > 0 and ngen == 0):
            continue
        for sym in itertools.combinations_with_replacement(range(ngen), p):
            for ext in itertools.combinations(range(module.rank), k):
                if rng.random() < density:
                    terms[(sym, ext)] = random_poly(rng, backend, coeff_deg)
    return RothElement(module, terms)


def hyperbolic_module(nvars: int, npairs: int) -> MetricModule:
    backend = Backend.free(nvars)
    rank = 2 * npairs
    zero, one = Poly.zero(backend), Poly.one(backend)
    gram = [[zero] * rank for _ in range(rank)]
    for i in range(npairs):
        gram[i][npairs + i] = one
        gram[npairs + i][i] = one
    return MetricModule(backend, gram)


def curved_connection(module: MetricModule, seed: int = 0) -> Connection:
    """A metric connection with generically nonzero Christoffels."""
    rng = random.Random(seed)
    backend = module.backend
    ngen = 1 if backend.is_dual else backend.nvars
    gamma = []
    for i in range(ngen):
        row = []
        for a in range(module.rank):
            if backend.is_dual:
                eps = Poly.var(backend, 0)
                coeffs = [eps.scale(rng.randint(-2, 2)) for _ in range(module.rank)]
                row.append(ModuleElement(module, coeffs))
            else:
                row.append(random_module_element(rng, module, deg=1))
        gamma.append(row)
    return metrize(Connection(module, gamma))


def so3_constants():
    eps3 = {(0, 1, 2): 1, (1, 2, 0): 1, (2, 0, 1): 1,
            (0, 2, 1): -1, (2, 1, 0): -1, (1, 0, 2): -1}
    return [[[eps3.get((i, j, k), 0) for k in range(3)] for j in range(3)] for i in range(3)]
