"""Systems of equations drawn from E_n.

E_n holds every equation of the shapes ``x_i = 1``, ``x_i + x_j = x_k`` and
``x_i * x_j = x_k`` over variables x_1..x_n. An :class:`EnSystem` is a
canonical, duplicate-free, sorted set of such equations, so equal systems
serialize identically.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from itertools import product
from typing import Iterable, List, Optional, Sequence, Tuple

UNIT, SUM, PROD = "unit", "sum", "prod"
_KIND_RANK = {UNIT: 0, SUM: 1, PROD: 2}


class EnSystemError(ValueError):
    pass


class SystemParseError(EnSystemError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True, order=False)
class EnEquation:
    """One equation; ``i <= j`` is enforced for sums and products."""

    kind: str
    i: int
    j: int = 0
    k: int = 0

    def __post_init__(self):
        if self.kind not in _KIND_RANK:
            raise EnSystemError(f"unknown equation kind {self.kind!r}")
        if self.kind == UNIT:
            if self.i < 1:
                raise EnSystemError(f"variable index {self.i} must be positive")
            object.__setattr__(self, "j", 0)
            object.__setattr__(self, "k", 0)
            return
        if min(self.i, self.j, self.k) < 1:
            raise EnSystemError(f"variable indices ({self.i}, {self.j}, {self.k}) must be positive")
        if self.i > self.j:
            i, j = self.j, self.i
            object.__setattr__(self, "i", i)
            object.__setattr__(self, "j", j)

    @property
    def indices(self) -> Tuple[int, ...]:
        return (self.i,) if self.kind == UNIT else (self.i, self.j, self.k)

    @property
    def max_index(self) -> int:
        return max(self.indices)

    def sort_key(self):
        return (_KIND_RANK[self.kind], self.i, self.j, self.k)

    def holds(self, values: Sequence[int]) -> bool:
        if self.kind == UNIT:
            return values[self.i - 1] == 1
        a, b, c = values[self.i - 1], values[self.j - 1], values[self.k - 1]
        if self.kind == SUM:
            return a + b == c
        return a * b == c

    def to_json(self) -> list:
        return [self.kind, *self.indices]

    def __str__(self) -> str:
        if self.kind == UNIT:
            return f"x{self.i} = 1"
        op = "+" if self.kind == SUM else "*"
        return f"x{self.i} {op} x{self.j} = x{self.k}"


def Unit(i: int) -> EnEquation:
    return EnEquation(UNIT, i)


def Sum(i: int, j: int, k: int) -> EnEquation:
    return EnEquation(SUM, i, j, k)


def Prod(i: int, j: int, k: int) -> EnEquation:
    return EnEquation(PROD, i, j, k)


@dataclass(frozen=True)
class EnSystem:
    n: int
    equations: Tuple[EnEquation, ...] = ()

    def __post_init__(self):
        if self.n < 0:
            raise EnSystemError("variable count must be non-negative")
        eqs = sorted(set(self.equations), key=EnEquation.sort_key)
        for eq in eqs:
            if eq.max_index > self.n:
                raise EnSystemError(f"equation '{eq}' mentions a variable beyond x{self.n}")
        object.__setattr__(self, "equations", tuple(eqs))

    def __len__(self):
        return len(self.equations)

    def __iter__(self):
        return iter(self.equations)

    def __contains__(self, eq):
        return eq in set(self.equations)

    def union(self, eqs: Iterable[EnEquation]) -> "EnSystem":
        return EnSystem(self.n, self.equations + tuple(eqs))

    def incidence(self) -> List[int]:
        """Number of equations each variable (0-based) occurs in."""
        deg = [0] * self.n
        for eq in self.equations:
            for v in set(eq.indices):
                deg[v - 1] += 1
        return deg

    def free_variables(self) -> List[int]:
        return [i + 1 for i, d in enumerate(self.incidence()) if d == 0]

    def to_json(self) -> dict:
        return {"n": self.n, "equations": [eq.to_json() for eq in self.equations]}

    @classmethod
    def from_json(cls, data: dict) -> "EnSystem":
        try:
            n = int(data["n"])
            eqs = [EnEquation(e[0], *map(int, e[1:])) for e in data["equations"]]
        except (KeyError, TypeError, IndexError) as exc:
            raise EnSystemError(f"malformed system JSON: {exc}") from exc
        return cls(n, tuple(eqs))

    def __str__(self) -> str:
        return format_system(self)


def check(system: EnSystem, values: Sequence[int]) -> bool:
    if len(values) != system.n:
        raise EnSystemError(f"assignment has {len(values)} values, system has {system.n} variables")
    return all(eq.holds(values) for eq in system.equations)


# -- text format ---------------------------------------------------------------

_UNIT_RE = re.compile(r"^x(\d+)\s*=\s*1$")
_BIN_RE = re.compile(r"^x(\d+)\s*([+*])\s*x(\d+)\s*=\s*x(\d+)$")


def parse_system(text: str, n: Optional[int] = None) -> EnSystem:
    eqs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _UNIT_RE.match(line)
        try:
            if m:
                eqs.append(Unit(int(m.group(1))))
                continue
            m = _BIN_RE.match(line)
            if not m:
                raise SystemParseError(f"cannot parse {line!r}; expected 'xI = 1', 'xI + xJ = xK' or 'xI * xJ = xK'", lineno)
            i, op, j, k = int(m.group(1)), m.group(2), int(m.group(3)), int(m.group(4))
            eqs.append(Sum(i, j, k) if op == "+" else Prod(i, j, k))
        except SystemParseError:
            raise
        except EnSystemError as exc:
            raise SystemParseError(str(exc), lineno) from exc
    top = max((eq.max_index for eq in eqs), default=0)
    if n is None:
        n = top
    elif n < top:
        raise EnSystemError(f"n={n} but x{top} is mentioned")
    return EnSystem(n, tuple(eqs))


def format_system(system: EnSystem) -> str:
    lines = [f"# n = {system.n}"] + [str(eq) for eq in system.equations]
    return "\n".join(lines) + "\n"


def load_system(text: str) -> EnSystem:
    """Read either the JSON or the line-oriented text format."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return EnSystem.from_json(json.loads(stripped))
    header = re.search(r"^\s*#\s*n\s*=\s*(\d+)", text, re.MULTILINE)
    return parse_system(text, int(header.group(1)) if header else None)


# -- generators ----------------------------------------------------------------

def gen_idempotent(n: int) -> EnSystem:
    if n < 1:
        raise EnSystemError("gen_idempotent needs n >= 1")
    return EnSystem(n, tuple(Prod(i, i, i) for i in range(1, n + 1)))


def gen_obs2(n: int) -> EnSystem:
    """x1+x1=x2, x1*x1=x2, x2*x2=x3, ..., x_{n-1}*x_{n-1}=x_n."""
    if n < 2:
        raise EnSystemError("gen_obs2 needs n >= 2")
    eqs = [Sum(1, 1, 2), Prod(1, 1, 2)]
    eqs += [Prod(i, i, i + 1) for i in range(2, n)]
    return EnSystem(n, tuple(eqs))


@dataclass(frozen=True)
class LadderLayout:
    """1-based variable positions used by :func:`gen_ladder`."""

    n: int
    s: int
    z: Tuple[int, ...]
    t: Tuple[int, ...]
    w: int
    y: int
    u: int
    v: int


def ladder_layout(s: int, n: int) -> LadderLayout:
    if s < 2:
        raise EnSystemError("ladder base needs at least two variables (x1, x2)")
    if n < 8 + 2 * s:
        raise EnSystemError(f"ladder needs n >= 8 + 2*s = {8 + 2 * s}, got n={n}")
    half = n // 2
    nz = n - half - 4 - s
    z = tuple(range(s + 1, s + nz + 1))
    t = tuple(range(s + nz + 1, s + nz + half + 1))
    w = s + nz + half + 1
    return LadderLayout(n, s, z, t, w, w + 1, w + 2, w + 3)


def gen_ladder(base: EnSystem, n: int) -> EnSystem:
    """Pad ``base`` to exactly n variables with a chain forcing x2 = n.

    Layout: base variables first (its x1, x2 carry the product u*v and the
    chain total), then the z block of units, then t_1..t_{n//2}, then
    w, y, u, v.
    """
    lay = ladder_layout(base.n, n)
    t = lay.t
    eqs = list(base.equations)
    eqs += [Unit(z) for z in lay.z]
    eqs.append(Unit(t[0]))
    if len(t) > 1:
        eqs.append(Sum(t[0], t[0], t[1]))
    for a in range(1, len(t) - 1):
        eqs.append(Sum(t[a], t[0], t[a + 1]))
    eqs.append(Sum(t[-1], t[-1], lay.w))
    eqs.append(Sum(lay.w, lay.y, 2))
    eqs.append(Sum(lay.y, lay.y, lay.y) if n % 2 == 0 else Unit(lay.y))
    eqs.append(Prod(lay.u, lay.v, 1))
    return EnSystem(n, tuple(eqs))


def tilde_transform(system: EnSystem) -> EnSystem:
    """Replace each x_i = 1 by the n equations x_i * x_j = x_j."""
    out = []
    for eq in system.equations:
        if eq.kind == UNIT:
            out.extend(Prod(eq.i, j, j) for j in range(1, system.n + 1))
        else:
            out.append(eq)
    return EnSystem(system.n, tuple(out))


def sat_system(values: Sequence[int]) -> EnSystem:
    """The maximal system in E_n satisfied by ``values``."""
    n = len(values)
    eqs = [Unit(i + 1) for i, a in enumerate(values) if a == 1]
    position = {}
    for idx, a in enumerate(values):
        position.setdefault(a, []).append(idx + 1)
    for i in range(n):
        for j in range(i, n):
            for k in position.get(values[i] + values[j], ()):
                eqs.append(Sum(i + 1, j + 1, k))
            for k in position.get(values[i] * values[j], ()):
                eqs.append(Prod(i + 1, j + 1, k))
    return EnSystem(n, tuple(eqs))


def all_equations(n: int) -> List[EnEquation]:
    """Every equation of E_n in canonical order."""
    eqs = [Unit(i) for i in range(1, n + 1)]
    rng = range(1, n + 1)
    for kind in (SUM, PROD):
        for i, j, k in product(rng, rng, rng):
            if i <= j:
                eqs.append(EnEquation(kind, i, j, k))
    return eqs


def permute_system(system: EnSystem, perm: Sequence[int]) -> EnSystem:
    """Rename x_i to x_{perm[i-1]}."""
    def ren(eq):
        if eq.kind == UNIT:
            return Unit(perm[eq.i - 1])
        return EnEquation(eq.kind, perm[eq.i - 1], perm[eq.j - 1], perm[eq.k - 1])
    return EnSystem(system.n, tuple(ren(eq) for eq in system.equations))


def random_system(rng, n: int, max_equations: int) -> EnSystem:
    """Random subset of E_n, for property tests and the corpus generator."""
    eqs = []
    for _ in range(rng.randint(0, max_equations)):
        kind = rng.choice((UNIT, SUM, SUM, PROD, PROD))
        if kind == UNIT:
            eqs.append(Unit(rng.randint(1, n)))
        else:
            eqs.append(EnEquation(kind, rng.randint(1, n), rng.randint(1, n), rng.randint(1, n)))
    return EnSystem(n, tuple(eqs))
