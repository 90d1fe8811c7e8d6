"""Finite checks around the height conjecture for E_n.

Three experiments live here:

* Ψ_n: every tuple x whose leading entry is the largest in absolute value
  and lies in the annulus 2^(2^(n-1)) < |x_1| <= 2^(2^n) must admit a tuple
  y that keeps every additive and multiplicative relation of x and has
  some |y_i| > |x_1|. Witnesses are memoized per relation signature.
* T_n: the tuples that solve some system in E_n with finitely many integer
  solutions. A tuple qualifies iff its maximal satisfied system is finite.
* The count bound (1 + 2*beta)^n on the number of solutions of a finite
  system whose heights are at most beta.
"""

from __future__ import annotations

import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from .checkpoint import CheckpointLog, digest
from .ensystem import EnSystem, Prod, Sum, sat_system
from .solver import (DEFAULT_BUDGET, FINITE, INFINITE, UNKNOWN, PARTITIONS,
                     conjecture_bound, decide_finiteness, resolve_workers, smallest_beyond)

log = logging.getLogger(__name__)

Triple = Tuple[int, int, int]


class ConjectureError(ValueError):
    pass


class IncompleteEnumeration(RuntimeError):
    pass


@dataclass(frozen=True)
class RelationSignature:
    additive: FrozenSet[Triple]
    multiplicative: FrozenSet[Triple]
    equal_pairs: Tuple[Tuple[int, ...], ...]

    def holds_at(self, y: Sequence[int]) -> bool:
        """Every additive and multiplicative relation is satisfied by ``y``."""
        return (all(y[i - 1] + y[j - 1] == y[k - 1] for i, j, k in self.additive)
                and all(y[i - 1] * y[j - 1] == y[k - 1] for i, j, k in self.multiplicative))

    def system(self, n: int) -> EnSystem:
        eqs = [Sum(*t) for t in self.additive] + [Prod(*t) for t in self.multiplicative]
        return EnSystem(n, tuple(eqs))

    def to_json(self) -> dict:
        return {"additive": sorted(map(list, self.additive)),
                "multiplicative": sorted(map(list, self.multiplicative)),
                "equal_pairs": [list(b) for b in self.equal_pairs]}


def relation_signature(x: Sequence[int]) -> RelationSignature:
    n = len(x)
    add, mul = set(), set()
    where: Dict[int, List[int]] = {}
    for idx, a in enumerate(x, start=1):
        where.setdefault(a, []).append(idx)
    for i in range(1, n + 1):
        for j in range(i, n + 1):
            for k in where.get(x[i - 1] + x[j - 1], ()):
                add.add((i, j, k))
            for k in where.get(x[i - 1] * x[j - 1], ()):
                mul.add((i, j, k))
    blocks = tuple(sorted(tuple(v) for v in where.values()))
    return RelationSignature(frozenset(add), frozenset(mul), blocks)


def is_growth_witness(sig: RelationSignature, lead: int, y: Sequence[int]) -> bool:
    return sig.holds_at(y) and any(abs(v) > lead for v in y)


def find_growth_witness(x: Sequence[int], y_budget: Optional[int] = None,
                        budget: int = DEFAULT_BUDGET,
                        sig: Optional[RelationSignature] = None) -> Optional[Tuple[int, ...]]:
    """A tuple keeping x's relations with some entry above |x_1| in absolute value.

    Only tuples with every |y_i| <= ``y_budget`` (default 4*|x_1|) are
    considered. Doubling x is tried first; it is valid whenever no product
    relation has a nonzero right-hand side. Otherwise the relation system
    is searched for its smallest solution above |x_1|.
    """
    lead = abs(x[0])
    limit = 4 * lead if y_budget is None else y_budget
    sig = sig or relation_signature(x)
    if all(x[k - 1] == 0 for _, _, k in sig.multiplicative):
        y = tuple(2 * v for v in x)
        if max(map(abs, y)) <= limit and is_growth_witness(sig, lead, y):
            return y
    if limit <= lead:
        return None
    y = smallest_beyond(sig.system(len(x)), lead, limit, budget)
    if y is not None and not is_growth_witness(sig, lead, y):
        raise AssertionError(f"search returned an invalid witness {y} for {tuple(x)}")
    return y


def annulus(n: int) -> Tuple[int, int]:
    """(2^(2^(n-1)), 2^(2^n)): exclusive lower and inclusive upper bound of |x_1|."""
    return conjecture_bound(n), 2 ** (2 ** n)


def annulus_size(n: int) -> int:
    """Closed-form count of tuples with |x_1| maximal and inside the annulus."""
    lo, hi = annulus(n)
    return sum(2 * (2 * m + 1) ** (n - 1) for m in range(lo + 1, hi + 1))


@dataclass
class PsiReport:
    n: int
    lower: int
    upper: int
    outcome: str
    tuples_checked: int
    distinct_signatures: int
    cache_hits: int
    cache_misses: int
    stuck: List[Tuple[int, ...]] = field(default_factory=list)

    @property
    def confirmed(self) -> bool:
        return self.outcome == "Confirmed"

    def to_json(self) -> dict:
        return {"n": self.n, "annulus": [self.lower, self.upper], "outcome": self.outcome,
                "tuples_checked": self.tuples_checked,
                "distinct_signatures": self.distinct_signatures,
                "cache": {"hits": self.cache_hits, "misses": self.cache_misses},
                "stuck": [list(t) for t in self.stuck]}


def _psi_shell(n: int, m: int, y_budget: Optional[int], budget: int):
    """All annulus tuples with |x_1| = m; returns (checked, stuck, signatures, hits, misses)."""
    cache: Dict[Tuple[RelationSignature, int], Optional[Tuple[int, ...]]] = {}
    checked = hits = 0
    stuck = []
    rng = range(-m, m + 1)
    for lead in (-m, m):
        for rest in itertools.product(rng, repeat=n - 1):
            x = (lead,) + rest
            checked += 1
            sig = relation_signature(x)
            key = (sig, m)
            if key in cache:
                hits += 1
                y = cache[key]
            else:
                y = find_growth_witness(x, y_budget, budget, sig)
                cache[key] = y
            if y is None:
                stuck.append(x)
            elif not is_growth_witness(sig, m, y):
                raise AssertionError(f"cached witness {y} does not fit {x}")
    sigs = {k[0] for k in cache}
    return checked, stuck, sigs, hits, len(cache)


def _psi_task(args):
    return _psi_shell(*args)


def verify_psi(n: int, y_budget: Optional[int] = None, allow_long: bool = False,
               max_n: int = 3, budget: int = DEFAULT_BUDGET, workers: Optional[int] = None,
               checkpoint: Optional[str] = None, resume: bool = False) -> PsiReport:
    """Exhaustively confirm Ψ_n, one |x_1| shell per partition."""
    if n < 1:
        raise ConjectureError("n must be positive")
    if n > max_n:
        raise ConjectureError(f"n={n} exceeds the cap {max_n}")
    if n >= 3 and not allow_long:
        raise ConjectureError(f"n={n} is a long-running experiment; pass allow_long")
    lower, upper = annulus(n)
    shells = list(range(lower + 1, upper + 1))
    ck = CheckpointLog(checkpoint, digest({"op": "verify_psi", "n": n, "y_budget": y_budget}),
                       resume) if checkpoint else None
    results: Dict[int, tuple] = {}
    tasks = []
    for pid, m in enumerate(shells):
        rec = ck.completed(pid) if ck else None
        if rec is not None:
            results[pid] = (rec["tuples_checked"], [tuple(t) for t in rec["stuck"]],
                            None, rec["hits"], rec["misses"], rec["signatures"])
        else:
            tasks.append((pid, (n, m, y_budget, budget)))

    def finish(pid, res):
        checked, stuck, sigs, hits, misses = res
        sig_ids = sorted(digest(s.to_json()) for s in sigs)
        results[pid] = (checked, stuck, sigs, hits, misses, sig_ids)
        if ck is not None:
            ck.record(pid, cursor=shells[pid], solutions_found=checked - len(stuck),
                      tuples_checked=checked, stuck=[list(t) for t in stuck],
                      hits=hits, misses=misses, signatures=sig_ids)
        log.info("psi n=%d shell |x1|=%d: %d tuples, %d stuck", n, shells[pid], checked, len(stuck))

    nworkers = resolve_workers(workers)
    if nworkers == 1 or len(tasks) <= 1:
        for pid, args in tasks:
            finish(pid, _psi_task(args))
    else:
        with ProcessPoolExecutor(max_workers=nworkers) as pool:
            futs = [(pid, pool.submit(_psi_task, args)) for pid, args in tasks]
            for pid, fut in futs:
                finish(pid, fut.result())

    checked = sum(results[p][0] for p in results)
    stuck = sorted(t for p in results for t in results[p][1])
    hits = sum(results[p][3] for p in results)
    misses = sum(results[p][4] for p in results)
    signatures = set()
    for p in results:
        signatures.update(results[p][5])
    outcome = "Confirmed" if not stuck else "Unresolved"
    return PsiReport(n, lower, upper, outcome, checked, len(signatures), hits, misses, stuck)


def pad_counterexample(x: Sequence[int], m: int, check_bound: bool = True) -> Tuple[int, ...]:
    """Repeat x_1 so the tuple has length m: (x_1, ..., x_1, x_2, ..., x_n).

    With ``check_bound`` the leading entry must satisfy
    2^(2^(m-1)) < |x_1| <= 2^(2^m).
    """
    n = len(x)
    if n < 1 or m < n:
        raise ConjectureError(f"need 1 <= n <= m, got n={n}, m={m}")
    if check_bound:
        lo, hi = annulus(m)
        if not lo < abs(x[0]) <= hi:
            raise ConjectureError(f"|x_1| = {abs(x[0])} is outside ({lo}, {hi}]")
    return (x[0],) * (m - n + 1) + tuple(x[1:])


def pad_index_map(n: int, m: int) -> List[int]:
    """Padded position (1-based) standing for each original index after padding."""
    return [1] + [m - n + 1 + i for i in range(1, n)]


# -- T_n ---------------------------------------------------------------------------

@dataclass
class TnResult:
    n: int
    members: FrozenSet[Tuple[int, ...]]
    representatives: FrozenSet[Tuple[int, ...]]
    # solutions of each member's maximal satisfied system, from its verdict
    member_solutions: Dict[Tuple[int, ...], Tuple[Tuple[int, ...], ...]] = field(default_factory=dict)
    candidates: int = 0
    distinct_systems: int = 0
    conditional: bool = False

    def to_json(self) -> dict:
        return {"n": self.n, "members": sorted(map(list, self.members)),
                "representatives": sorted(map(list, self.representatives)),
                "candidates": self.candidates, "distinct_systems": self.distinct_systems,
                "conditional": self.conditional}


def _tn_chunk(args):
    n, firsts, bound, escape_radius, budget = args
    memo: Dict[EnSystem, object] = {}
    members = {}
    unknown = []
    rng = range(-bound, bound + 1)
    for first in firsts:
        for rest in itertools.product(rng, repeat=n - 1):
            a = (first,) + rest
            S = sat_system(a)
            verdict = memo.get(S)
            if verdict is None:
                verdict = memo[S] = decide_finiteness(S, escape_radius, budget)
            if verdict.verdict == FINITE:
                members[a] = verdict.solutions
            elif verdict.verdict == UNKNOWN:
                unknown.append(a)
    return members, unknown, [digest(S.to_json()) for S in memo]


def enumerate_tn(n: int, escape_radius: Optional[int] = None, conditional: bool = False,
                 budget: int = DEFAULT_BUDGET, workers: Optional[int] = None,
                 checkpoint: Optional[str] = None, resume: bool = False) -> TnResult:
    """All tuples in the box +-2^(2^(n-1)) whose maximal satisfied system is finite."""
    if n < 1:
        raise ConjectureError("n must be positive")
    if n > 3 and not conditional:
        raise ConjectureError(f"n={n} > 3 is outside the proven range; pass conditional")
    bound = conjecture_bound(n)
    if escape_radius is None:
        escape_radius = 2 ** (2 ** n)
    firsts = list(range(-bound, bound + 1))
    parts = min(PARTITIONS, len(firsts))
    step, extra = divmod(len(firsts), parts)
    chunks, start = [], 0
    for p in range(parts):
        width = step + (1 if p < extra else 0)
        chunks.append(firsts[start:start + width])
        start += width
    ck = CheckpointLog(checkpoint, digest({"op": "enumerate_tn", "n": n, "escape": escape_radius}),
                       resume) if checkpoint else None
    results = {}
    tasks = []
    for pid, chunk in enumerate(chunks):
        rec = ck.completed(pid) if ck else None
        if rec is not None:
            results[pid] = ({tuple(a): tuple(map(tuple, s)) for a, s in rec["members"]},
                            [tuple(a) for a in rec["unknown"]], rec["systems"])
        else:
            tasks.append((pid, (n, chunk, bound, escape_radius, budget)))

    def finish(pid, res):
        results[pid] = res
        if ck is not None:
            members, unknown, systems = res
            ck.record(pid, cursor=[chunks[pid][0], chunks[pid][-1]],
                      solutions_found=len(members),
                      members=[[list(a), [list(s) for s in sols]] for a, sols in sorted(members.items())],
                      unknown=[list(a) for a in unknown], systems=systems)

    nworkers = resolve_workers(workers)
    if nworkers == 1 or len(tasks) <= 1:
        for pid, args in tasks:
            finish(pid, _tn_chunk(args))
    else:
        with ProcessPoolExecutor(max_workers=nworkers) as pool:
            futs = [(pid, pool.submit(_tn_chunk, args)) for pid, args in tasks]
            for pid, fut in futs:
                finish(pid, fut.result())

    members: Dict[Tuple[int, ...], tuple] = {}
    unknown: List[Tuple[int, ...]] = []
    systems = set()
    for pid in range(len(chunks)):
        m, u, s = results[pid]
        members.update(m)
        unknown.extend(u)
        systems.update(s)
    if unknown:
        raise IncompleteEnumeration(
            f"{len(unknown)} candidates got no verdict within budget, first {sorted(unknown)[0]}")
    reps = frozenset(tuple(sorted(a)) for a in members)
    return TnResult(n, frozenset(members), reps, dict(sorted(members.items())),
                    candidates=len(firsts) ** n, distinct_systems=len(systems),
                    conditional=n > 3)


def permutation_closure(tuples) -> FrozenSet[Tuple[int, ...]]:
    return frozenset(p for t in tuples for p in itertools.permutations(t))


def solution_count_bound(n: int, beta_value: int) -> int:
    """(1 + 2*beta)^n: lattice points in the box of radius beta."""
    if n < 1:
        raise ConjectureError("n must be positive")
    if beta_value < 0:
        raise ConjectureError("beta must be non-negative")
    return (1 + 2 * beta_value) ** n
