import itertools

import numpy as np
import pytest


def naive_solutions(system, radius=None, radii=None):
    """All box assignments satisfying ``system``, by full grid enumeration.

    Independent of the search engine: the grid is materialized with numpy
    and every equation is evaluated directly from its kind and indices.
    """
    n = system.n
    if radii is None:
        radii = [radius] * n
    if n == 0:
        return [()]
    axes = [np.arange(-r, r + 1, dtype=np.int64) for r in radii]
    grid = np.meshgrid(*axes, indexing="ij")
    cols = [g.ravel() for g in grid]
    ok = np.ones(cols[0].shape, dtype=bool)
    for eq in system.equations:
        if eq.kind == "unit":
            ok &= cols[eq.i - 1] == 1
        elif eq.kind == "sum":
            ok &= cols[eq.i - 1] + cols[eq.j - 1] == cols[eq.k - 1]
        else:
            ok &= cols[eq.i - 1] * cols[eq.j - 1] == cols[eq.k - 1]
    idx = np.nonzero(ok)[0]
    return sorted(tuple(int(c[i]) for c in cols) for i in idx)


def naive_holds(eq, values):
    if eq.kind == "unit":
        return values[eq.i - 1] == 1
    a, b, c = values[eq.i - 1], values[eq.j - 1], values[eq.k - 1]
    return a + b == c if eq.kind == "sum" else a * b == c


def box_points(p, radius):
    return itertools.product(range(-radius, radius + 1), repeat=p)


@pytest.fixture
def oracle():
    return naive_solutions


def random_polynomial(rng, max_vars=3, max_degree=3, max_coef=5, max_terms=5):
    """A nonzero-variable-count polynomial with small random coefficients."""
    from enlab.polynomial import Polynomial

    p = rng.randint(1, max_vars)
    terms = {}
    for _ in range(rng.randint(1, max_terms)):
        mono = [0] * p
        for _ in range(rng.randint(0, max_degree)):
            mono[rng.randrange(p)] += 1
        terms[tuple(mono)] = rng.randint(-max_coef, max_coef)
    return Polynomial(p, terms)


def node_radii(compiled, radius):
    """Per-variable radii covering every unique extension of the ±radius input box."""
    from enlab.compiler import extend_unique

    radii = [radius] * compiled.system.n
    for base in box_points(compiled.p, radius):
        for idx, v in enumerate(extend_unique(compiled, base)):
            radii[idx] = max(radii[idx], abs(v))
    return radii
