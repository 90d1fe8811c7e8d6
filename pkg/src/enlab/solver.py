"""Boxed exhaustive search over E_n systems.

The search keeps an integer interval per variable and narrows intervals to
bounds consistency before every branching step:

* ``x_i = 1`` fixes the variable;
* ``x_i + x_j = x_k`` narrows each operand from the other two, so any two
  fixed operands force the third;
* ``x_i * x_j = x_k`` narrows the product from the factor intervals and a
  factor from the quotient interval whenever the other factor cannot be 0,
  which is exactly the divisibility test once both are fixed.

Branching picks the unfixed variable with the smallest interval, then the
highest equation count, then the lowest index. The first branching variable
is split into a fixed number of contiguous partitions; partitions may run in
worker processes and are merged in partition order, so results never depend
on the worker count.
"""

from __future__ import annotations

import math
import os
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterator, List, Optional, Sequence, Tuple

from .checkpoint import CheckpointLog, digest
from .ensystem import PROD, SUM, UNIT, EnSystem, check

DEFAULT_BUDGET = 20_000_000
PARTITIONS = 16
WORKERS_ENV = "ENLAB_WORKERS"

Assignment = Tuple[int, ...]


class BudgetExceeded(RuntimeError):
    def __init__(self, nodes: int, budget: int):
        super().__init__(f"search budget exceeded: {nodes} nodes > budget {budget}")
        self.nodes = nodes
        self.budget = budget

    def __reduce__(self):
        return BudgetExceeded, (self.nodes, self.budget)


def conjecture_bound(n: int) -> int:
    """2^(2^(n-1)), the height bound for systems in E_n."""
    return 2 ** (2 ** (n - 1))


def resolve_workers(workers: Optional[int]) -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return max(1, workers or 1)


@dataclass(frozen=True)
class SearchBox:
    radius: int
    radii: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        if self.radius < 1:
            raise ValueError("box radius must be at least 1")
        if self.radii is not None:
            object.__setattr__(self, "radii", tuple(int(r) for r in self.radii))
            if any(r < 0 for r in self.radii):
                raise ValueError("per-variable radii must be non-negative")

    def bounds(self, n: int) -> Tuple[List[int], List[int]]:
        if self.radii is not None:
            if len(self.radii) != n:
                raise ValueError(f"box has {len(self.radii)} radii for {n} variables")
            return [-r for r in self.radii], list(self.radii)
        return [-self.radius] * n, [self.radius] * n

    def to_json(self) -> dict:
        out = {"radius": self.radius}
        if self.radii is not None:
            out["radii"] = list(self.radii)
        return out


@dataclass(frozen=True)
class SolutionSet:
    solutions: Tuple[Assignment, ...]
    exhausted: bool
    box: SearchBox
    nodes: int = field(default=0, compare=False)

    def __len__(self):
        return len(self.solutions)

    def to_json(self) -> dict:
        return {"solutions": [list(s) for s in self.solutions], "count": len(self.solutions),
                "exhausted": self.exhausted, "box": self.box.to_json()}


INFINITE = "InfiniteCertified"
FINITE = "FiniteUnderConjecture"
UNKNOWN = "Unknown"


@dataclass(frozen=True)
class FinitenessVerdict:
    verdict: str
    escape_radius: int
    bound: int
    witness: Optional[Assignment] = None
    solutions: Tuple[Assignment, ...] = ()
    # verdicts for n > 3 rest on the unproven height conjecture
    conditional: bool = False
    reason: str = ""

    def to_json(self) -> dict:
        out = {"verdict": self.verdict, "escape_radius": self.escape_radius,
               "bound": self.bound, "conditional": self.conditional, "reason": self.reason}
        if self.witness is not None:
            out["witness"] = list(self.witness)
        if self.verdict == FINITE:
            out["solutions"] = [list(s) for s in self.solutions]
        return out


# -- propagation engine ---------------------------------------------------------

# constraint codes
_SUM, _DOUBLE, _PROD, _SQUARE, _ZERO_OR_ONE = range(5)


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


class _Engine:
    """Interval propagation and depth-first search for one system."""

    def __init__(self, system: EnSystem):
        self.system = system
        n = self.n = system.n
        self.unary: List[Tuple[int, int, int]] = []
        cons = []
        for eq in system.equations:
            if eq.kind == UNIT:
                self.unary.append((eq.i - 1, 1, 1))
                continue
            i, j, k = eq.i - 1, eq.j - 1, eq.k - 1
            if eq.kind == SUM:
                if i == j == k:
                    self.unary.append((i, 0, 0))
                elif k == i:
                    self.unary.append((j, 0, 0))
                elif k == j:
                    self.unary.append((i, 0, 0))
                elif i == j:
                    cons.append((_DOUBLE, i, i, k))
                else:
                    cons.append((_SUM, i, j, k))
            else:
                if i == j == k:
                    self.unary.append((i, 0, 1))
                elif i == j:
                    cons.append((_SQUARE, i, i, k))
                elif k == i:
                    cons.append((_ZERO_OR_ONE, i, j, k))
                elif k == j:
                    cons.append((_ZERO_OR_ONE, j, i, k))
                else:
                    cons.append((_PROD, i, j, k))
        self.cons = cons
        self.watch: List[List[int]] = [[] for _ in range(n)]
        for cid, (_, a, b, c) in enumerate(cons):
            for v in {a, b, c}:
                self.watch[v].append(cid)
        self.degree = system.incidence()
        self.step_limit = 64 * len(cons) + 256

    # narrowing

    def initial(self, lo: List[int], hi: List[int]) -> bool:
        """Apply unary constraints and propagate everything; False on wipeout."""
        for v, a, b in self.unary:
            lo[v] = max(lo[v], a)
            hi[v] = min(hi[v], b)
            if lo[v] > hi[v]:
                return False
        return self.propagate(lo, hi, range(self.n))

    def propagate(self, lo: List[int], hi: List[int], changed) -> bool:
        watch, cons = self.watch, self.cons
        queue = deque()
        queued = set()
        for v in changed:
            for cid in watch[v]:
                if cid not in queued:
                    queued.add(cid)
                    queue.append(cid)

        def tighten(v, nlo, nhi):
            olo, ohi = lo[v], hi[v]
            if nlo < olo:
                nlo = olo
            if nhi > ohi:
                nhi = ohi
            if nlo > nhi:
                return False
            if nlo != olo or nhi != ohi:
                lo[v] = nlo
                hi[v] = nhi
                for cid in watch[v]:
                    if cid not in queued:
                        queued.add(cid)
                        queue.append(cid)
            return True

        steps = 0
        limit = self.step_limit
        while queue:
            steps += 1
            if steps > limit:
                # incomplete narrowing is still sound; leaves are re-checked
                break
            cid = queue.popleft()
            queued.discard(cid)
            t, a, b, c = cons[cid]
            if t == _SUM:
                if not tighten(c, lo[a] + lo[b], hi[a] + hi[b]):
                    return False
                if not tighten(a, lo[c] - hi[b], hi[c] - lo[b]):
                    return False
                if not tighten(b, lo[c] - hi[a], hi[c] - lo[a]):
                    return False
            elif t == _DOUBLE:
                if not tighten(c, 2 * lo[a], 2 * hi[a]):
                    return False
                if not tighten(a, _ceil_div(lo[c], 2), hi[c] // 2):
                    return False
            elif t == _PROD:
                la, ha, lb, hb = lo[a], hi[a], lo[b], hi[b]
                p = (la * lb, la * hb, ha * lb, ha * hb)
                if not tighten(c, min(p), max(p)):
                    return False
                lc, hc = lo[c], hi[c]
                if lc > 0 or hc < 0:
                    # product is nonzero, so neither factor is zero
                    for f in (a, b):
                        if lo[f] == 0 and not tighten(f, 1, hi[f]):
                            return False
                        if hi[f] == 0 and not tighten(f, lo[f], -1):
                            return False
                    m = max(-lc, hc)
                    if not tighten(a, -m, m) or not tighten(b, -m, m):
                        return False
                for f, g in ((a, b), (b, a)):
                    lg, hg = lo[g], hi[g]
                    if lg > 0 or hg < 0:
                        lc, hc = lo[c], hi[c]
                        qlo = min(_ceil_div(lc, lg), _ceil_div(lc, hg), _ceil_div(hc, lg), _ceil_div(hc, hg))
                        qhi = max(lc // lg, lc // hg, hc // lg, hc // hg)
                        if not tighten(f, qlo, qhi):
                            return False
            elif t == _SQUARE:
                la, ha = lo[a], hi[a]
                if la >= 0:
                    slo, shi = la * la, ha * ha
                elif ha <= 0:
                    slo, shi = ha * ha, la * la
                else:
                    slo, shi = 0, max(la * la, ha * ha)
                if not tighten(c, slo, shi):
                    return False
                r = math.isqrt(hi[c])
                if not tighten(a, -r, r):
                    return False
                if lo[c] > 0:
                    s = math.isqrt(lo[c] - 1) + 1
                    if lo[a] > -s and not tighten(a, s, hi[a]):
                        return False
                    if hi[a] < s and not tighten(a, lo[a], -s):
                        return False
            else:
                # x_a * x_b = x_a: x_a = 0 or x_b = 1
                if (lo[a] > 0 or hi[a] < 0) and not tighten(b, 1, 1):
                    return False
                if (lo[b] > 1 or hi[b] < 1) and not tighten(a, 0, 0):
                    return False
        return True

    # search

    def choose(self, lo: List[int], hi: List[int]) -> Optional[int]:
        best = None
        best_key = None
        deg = self.degree
        for v in range(self.n):
            width = hi[v] - lo[v]
            if width:
                key = (width, -deg[v], v)
                if best_key is None or key < best_key:
                    best, best_key = v, key
        return best

    def is_solution(self, values: Sequence[int]) -> bool:
        return check(self.system, values)


def _by_magnitude(lo: int, hi: int) -> Iterator[int]:
    if lo >= 0:
        yield from range(lo, hi + 1)
    elif hi <= 0:
        yield from range(hi, lo - 1, -1)
    else:
        yield 0
        for m in range(1, max(-lo, hi) + 1):
            if -m >= lo:
                yield -m
            if m <= hi:
                yield m


class _Search:
    """One depth-first search over a (sub)box.

    ``mode`` is "all" (collect), "count", "first" (stop at the first
    solution) or "beyond" (branch and bound for the smallest solution whose
    max-norm exceeds ``inner``, ordered by max-norm then lexicographically).
    """

    def __init__(self, engine: _Engine, mode: str, budget: int, inner: int = 0,
                 trace: Optional[Callable] = None):
        self.engine = engine
        self.mode = mode
        self.budget = budget
        self.inner = inner
        self.trace = trace
        self.nodes = 0
        self.count = 0
        self.found: List[Assignment] = []
        self.best: Optional[Tuple[int, Assignment]] = None
        self.stop = False

    def run(self, lo: List[int], hi: List[int]) -> None:
        self._node(lo, hi)

    def _leaf(self, values: Assignment) -> None:
        if not self.engine.is_solution(values):
            return
        if self.mode == "count":
            self.count += 1
        elif self.mode == "all":
            self.found.append(values)
        elif self.mode == "first":
            self.found.append(values)
            self.stop = True
        else:
            h = max(map(abs, values), default=0)
            if h > self.inner and (self.best is None or (h, values) < self.best):
                self.best = (h, values)

    def _node(self, lo: List[int], hi: List[int]) -> None:
        self.nodes += 1
        if self.nodes > self.budget:
            raise BudgetExceeded(self.nodes, self.budget)
        eng = self.engine
        if self.mode == "beyond":
            inner = self.inner
            if all(-inner <= lo[v] and hi[v] <= inner for v in range(eng.n)):
                return
            if self.best is not None:
                cap = self.best[0]
                clipped = [v for v in range(eng.n) if lo[v] < -cap or hi[v] > cap]
                if clipped:
                    lo, hi = lo[:], hi[:]
                    for v in clipped:
                        lo[v] = max(lo[v], -cap)
                        hi[v] = min(hi[v], cap)
                        if lo[v] > hi[v]:
                            return
                    if not eng.propagate(lo, hi, clipped):
                        return
                    return self._node(lo, hi)
        v = eng.choose(lo, hi)
        if v is None:
            self._leaf(tuple(lo))
            return
        values = _by_magnitude(lo[v], hi[v]) if self.mode == "beyond" else range(lo[v], hi[v] + 1)
        for val in values:
            if self.stop:
                return
            if self.best is not None and abs(val) > self.best[0]:
                if self.mode == "beyond":
                    break
            nlo, nhi = lo[:], hi[:]
            nlo[v] = nhi[v] = val
            if eng.propagate(nlo, nhi, (v,)):
                self._node(nlo, nhi)
            elif self.trace is not None:
                box_lo, box_hi = lo[:], hi[:]
                box_lo[v] = box_hi[v] = val
                self.trace(box_lo, box_hi)


# -- partitioned drivers ----------------------------------------------------------

def _root(engine: _Engine, lo: List[int], hi: List[int]):
    lo, hi = list(lo), list(hi)
    if not engine.initial(lo, hi):
        return None
    return lo, hi


def _split(engine: _Engine, lo, hi, parts: int = PARTITIONS):
    """Contiguous partitions of the first branching variable's interval."""
    v = engine.choose(lo, hi)
    if v is None:
        return [(None, lo[0] if lo else 0, hi[0] if hi else 0)]
    size = hi[v] - lo[v] + 1
    parts = min(parts, size)
    step, extra = divmod(size, parts)
    out = []
    start = lo[v]
    for p in range(parts):
        width = step + (1 if p < extra else 0)
        out.append((v, start, start + width - 1))
        start += width
    return out


def _run_partition(args):
    system, lo, hi, cut, mode, budget, inner = args
    engine = _Engine(system)
    lo, hi = list(lo), list(hi)
    v, a, b = cut
    search = _Search(engine, mode, budget, inner)
    if v is not None:
        lo[v], hi[v] = max(lo[v], a), min(hi[v], b)
        if lo[v] > hi[v] or not engine.propagate(lo, hi, (v,)):
            return mode, [], 0, None, 1
    search.run(lo, hi)
    return mode, search.found, search.count, search.best, search.nodes


def _partitioned(system: EnSystem, lo, hi, mode: str, budget: int, inner: int = 0,
                 workers: Optional[int] = None, log: Optional[CheckpointLog] = None):
    """Run ``mode`` over every partition; returns per-partition results in order."""
    engine = _Engine(system)
    root = _root(engine, lo, hi)
    if root is None:
        return [], 1
    rlo, rhi = root
    cuts = _split(engine, rlo, rhi)
    tasks = []
    results = {}
    for pid, cut in enumerate(cuts):
        rec = log.completed(pid) if log else None
        if rec is not None:
            results[pid] = _from_record(rec)
        else:
            tasks.append((pid, (system, rlo, rhi, cut, mode, budget, inner)))
    nworkers = resolve_workers(workers)
    total = sum(r[4] for r in results.values())

    def finish(pid, res):
        nonlocal total
        results[pid] = res
        total += res[4]
        if log is not None:
            _, found, count, best, nodes = res
            log.record(pid, cursor=list(cuts[pid]), mode=mode,
                       solutions_found=count if mode == "count" else len(found),
                       solutions=[list(s) for s in found],
                       best=None if best is None else list(best[1]), nodes=nodes)
        if total > budget:
            raise BudgetExceeded(total, budget)

    if nworkers == 1 or len(tasks) <= 1:
        for pid, args in tasks:
            finish(pid, _run_partition(args))
    else:
        with ProcessPoolExecutor(max_workers=nworkers) as pool:
            futures = [(pid, pool.submit(_run_partition, args)) for pid, args in tasks]
            for pid, fut in futures:
                finish(pid, fut.result())
    return [results[pid] for pid in range(len(cuts))], total


def _from_record(rec: dict):
    found = [tuple(s) for s in rec.get("solutions", [])]
    best = rec.get("best")
    best = None if best is None else (max(map(abs, best), default=0), tuple(best))
    return rec["mode"], found, rec["solutions_found"], best, rec.get("nodes", 0)


def _problem_key(system: EnSystem, lo, hi, mode: str, inner: int = 0) -> str:
    return digest({"system": system.to_json(), "lo": list(lo), "hi": list(hi),
                   "mode": mode, "inner": inner, "partitions": PARTITIONS})


# -- public operations --------------------------------------------------------------

def solve_in_box(system: EnSystem, box: SearchBox, budget: int = DEFAULT_BUDGET,
                 workers: Optional[int] = None, checkpoint: Optional[str] = None,
                 resume: bool = False) -> SolutionSet:
    """Every assignment in ``box`` satisfying ``system``, sorted lexicographically."""
    lo, hi = box.bounds(system.n)
    log = CheckpointLog(checkpoint, _problem_key(system, lo, hi, "all"), resume) if checkpoint else None
    parts, nodes = _partitioned(system, lo, hi, "all", budget, workers=workers, log=log)
    sols = sorted(set(s for p in parts for s in p[1]))
    return SolutionSet(tuple(sols), True, box, nodes)


def count_in_box(system: EnSystem, box: SearchBox, budget: int = DEFAULT_BUDGET,
                 workers: Optional[int] = None, checkpoint: Optional[str] = None,
                 resume: bool = False) -> int:
    lo, hi = box.bounds(system.n)
    log = CheckpointLog(checkpoint, _problem_key(system, lo, hi, "count"), resume) if checkpoint else None
    parts, _ = _partitioned(system, lo, hi, "count", budget, workers=workers, log=log)
    return sum(p[2] for p in parts)


def first_solution(system: EnSystem, lo: Sequence[int], hi: Sequence[int],
                   budget: int = DEFAULT_BUDGET) -> Optional[Assignment]:
    """The first solution in search order within per-variable bounds, if any."""
    engine = _Engine(system)
    root = _root(engine, lo, hi)
    if root is None:
        return None
    search = _Search(engine, "first", budget)
    search.run(*root)
    return search.found[0] if search.found else None


def smallest_beyond(system: EnSystem, inner: int, outer: int, budget: int = DEFAULT_BUDGET,
                    workers: Optional[int] = None,
                    radii: Optional[Sequence[int]] = None) -> Optional[Assignment]:
    """Smallest solution with inner < max|x_i| <= outer.

    "Smallest" means least max-norm, ties broken lexicographically, so the
    answer equals the first hit of a shell-by-shell scan outward from
    ``inner``.
    """
    n = system.n
    if radii is None:
        lo, hi = [-outer] * n, [outer] * n
    else:
        lo, hi = [-min(r, outer) for r in radii], [min(r, outer) for r in radii]
    parts, _ = _partitioned(system, lo, hi, "beyond", budget, inner=inner, workers=workers)
    bests = [p[3] for p in parts if p[3] is not None]
    return min(bests)[1] if bests else None


def decide_finiteness(system: EnSystem, escape_radius: Optional[int] = None,
                      budget: int = DEFAULT_BUDGET, workers: Optional[int] = None) -> FinitenessVerdict:
    """Classify a system as having infinitely many or (conjecturally) finitely many solutions.

    An infinite verdict always carries a checked solution beyond the height
    bound 2^(2^(n-1)); by the height conjecture (proven for n <= 3) such a
    solution rules out finiteness. A finite verdict means no solution was
    found between the bound and ``escape_radius``; this is conditional for
    n > 3, and for every n it assumes nothing hides beyond the escape radius.
    """
    n = system.n
    if n < 1:
        raise ValueError("system needs at least one variable")
    bound = conjecture_bound(n)
    if escape_radius is None:
        escape_radius = 2 ** (2 ** n)
    if escape_radius <= bound:
        raise ValueError(f"escape radius {escape_radius} must exceed the bound {bound}")
    conditional = n > 3
    try:
        free = system.free_variables()
        if free:
            f = free[0] - 1
            lo, hi = [-bound] * n, [bound] * n
            lo[f] = hi[f] = bound + 1
            w = first_solution(system, lo, hi, budget)
            if w is not None:
                return FinitenessVerdict(INFINITE, escape_radius, bound, w, conditional=conditional,
                                         reason=f"x{f + 1} occurs in no equation")
        w = smallest_beyond(system, bound, escape_radius, budget, workers)
        if w is not None:
            assert check(system, w) and max(map(abs, w)) > bound
            return FinitenessVerdict(INFINITE, escape_radius, bound, w, conditional=conditional,
                                     reason="solution beyond the height bound")
        inner = solve_in_box(system, SearchBox(bound), budget, workers)
    except BudgetExceeded as exc:
        return FinitenessVerdict(UNKNOWN, escape_radius, bound, conditional=conditional, reason=str(exc))
    return FinitenessVerdict(FINITE, escape_radius, bound, solutions=inner.solutions,
                             conditional=conditional,
                             reason=f"no solution with {bound} < height <= {escape_radius}")


@dataclass(frozen=True)
class BoundReport:
    max_abs: int
    bound: int
    holds: bool
    saturated: bool

    def to_json(self) -> dict:
        return {"max_abs": self.max_abs, "bound": self.bound,
                "holds": self.holds, "saturated": self.saturated}


def check_conjecture_bound(system: EnSystem, sols) -> BoundReport:
    solutions = sols.solutions if hasattr(sols, "solutions") else sols
    bound = conjecture_bound(system.n)
    m = max((abs(x) for s in solutions for x in s), default=0)
    return BoundReport(m, bound, m <= bound, m == bound)
