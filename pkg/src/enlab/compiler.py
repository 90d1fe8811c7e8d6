"""Compile a Diophantine equation ``D = 0`` into an equivalent system in E_n.

The polynomial is lowered to a straight-line program whose nodes are built
from the constant 1 and the inputs by addition, subtraction and
multiplication. Nodes are hash-consed on their polynomial value, so no value
is computed twice. Every node becomes one system variable and every
instruction one equation; ``x_q + x_q = x_q`` then forces the node holding D
to zero. Each integer input tuple has exactly one extension satisfying the
instruction equations, so the system and the equation have the same number
of integer solutions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .ensystem import EnSystem, Prod, Sum, Unit, check
from .polynomial import (DEFAULT_MAX_DEGREE, DEFAULT_MAX_VARS, CapExceeded,
                         Polynomial, PolynomialError, format_polynomial)

# instruction tuples: ("one",) | ("input", v) | ("add", l, r) | ("subvia", l, r) | ("mul", l, r)
SlpNode = Tuple


class _Builder:
    def __init__(self, p: int):
        self.p = p
        self.nodes: List[SlpNode] = [("one",)]
        self.terms: List[Polynomial] = [Polynomial.constant(p, 1)]
        self.index: Dict[Polynomial, int] = {self.terms[0]: 0}
        for v in range(1, p + 1):
            self._intern(("input", v), Polynomial.variable(p, v))

    def _intern(self, node: SlpNode, value: Polynomial) -> int:
        hit = self.index.get(value)
        if hit is not None:
            return hit
        self.nodes.append(node)
        self.terms.append(value)
        self.index[value] = len(self.nodes) - 1
        return len(self.nodes) - 1

    def add(self, l: int, r: int) -> int:
        return self._intern(("add", l, r), self.terms[l] + self.terms[r])

    def sub(self, l: int, r: int) -> int:
        return self._intern(("subvia", l, r), self.terms[l] - self.terms[r])

    def mul(self, l: int, r: int) -> int:
        return self._intern(("mul", l, r), self.terms[l] * self.terms[r])

    def constant(self, c: int) -> int:
        # binary doubling: 2k = k + k, 2k + 1 = 2k + 1
        acc = 0
        for bit in bin(c)[3:]:
            acc = self.add(acc, acc)
            if bit == "1":
                acc = self.add(acc, 0)
        return acc

    def power(self, v: int, e: int) -> int:
        acc = v
        for bit in bin(e)[3:]:
            acc = self.mul(acc, acc)
            if bit == "1":
                acc = self.mul(acc, v)
        return acc

    def monomial(self, mono: Sequence[int]) -> Optional[int]:
        acc = None
        for v, e in enumerate(mono, start=1):
            if e:
                pw = self.power(v, e)
                acc = pw if acc is None else self.mul(acc, pw)
        return acc

    def term(self, mono: Sequence[int], mag: int) -> int:
        m = self.monomial(mono)
        if m is None:
            return self.constant(mag)
        if mag == 1:
            return m
        return self.mul(self.constant(mag), m)


def _check_caps(D: Polynomial, max_degree: int, max_vars: int) -> None:
    if D.num_vars > max_vars:
        raise CapExceeded(f"{D.num_vars} variables exceed cap {max_vars}")
    if D.degree > max_degree:
        raise CapExceeded(f"degree {D.degree} exceeds cap {max_degree}")


def _build(D: Polynomial, max_degree: int, max_vars: int) -> Tuple[_Builder, int]:
    _check_caps(D, max_degree, max_vars)
    b = _Builder(D.num_vars)
    terms = D.sorted_terms()
    start = next((k for k, (_, c) in enumerate(terms) if c > 0), None)
    if start is None:
        acc = b.sub(0, 0)
    else:
        mono, c = terms[start]
        acc = b.term(mono, c)
    for k, (mono, c) in enumerate(terms):
        if k == start:
            continue
        t = b.term(mono, abs(c))
        acc = b.add(acc, t) if c > 0 else b.sub(acc, t)
    return b, acc


def build_slp(D: Polynomial, max_degree: int = DEFAULT_MAX_DEGREE,
              max_vars: int = DEFAULT_MAX_VARS) -> List[SlpNode]:
    """Straight-line program computing D from 1 and the inputs."""
    return list(_build(D, max_degree, max_vars)[0].nodes)


def node_variable(node: int, p: int) -> int:
    """System variable (1-based) holding an SLP node.

    Inputs keep their own indices x1..xp; the constant 1 is x_{p+1}; later
    nodes follow in program order.
    """
    if node == 0:
        return p + 1
    if node <= p:
        return node
    return node + 1


@dataclass(frozen=True)
class CompiledSystem:
    system: EnSystem
    source: Polynomial
    p: int
    slp: Tuple[SlpNode, ...]
    q: int
    node_terms: Tuple[Polynomial, ...]

    @property
    def q_node(self) -> int:
        return next(i for i in range(len(self.slp)) if node_variable(i, self.p) == self.q)

    def to_json(self) -> dict:
        out = self.system.to_json()
        out["slp"] = [list(node) for node in self.slp]
        out["q"] = self.q
        out["p"] = self.p
        out["source"] = format_polynomial(self.source)
        return out


def compile_polynomial(D: Polynomial, max_degree: int = DEFAULT_MAX_DEGREE,
                       max_vars: int = DEFAULT_MAX_VARS) -> CompiledSystem:
    b, q_node = _build(D, max_degree, max_vars)
    p = D.num_vars
    var = lambda i: node_variable(i, p)  # noqa: E731
    eqs = []
    for idx, node in enumerate(b.nodes):
        op = node[0]
        if op == "one":
            eqs.append(Unit(var(idx)))
        elif op == "add":
            eqs.append(Sum(var(node[1]), var(node[2]), var(idx)))
        elif op == "subvia":
            eqs.append(Sum(var(node[2]), var(idx), var(node[1])))
        elif op == "mul":
            eqs.append(Prod(var(node[1]), var(node[2]), var(idx)))
    q = var(q_node)
    eqs.append(Sum(q, q, q))
    system = EnSystem(len(b.nodes), tuple(eqs))
    return CompiledSystem(system, D, p, tuple(b.nodes), q, tuple(b.terms))


def run_slp(slp: Sequence[SlpNode], base: Sequence[int]) -> List[int]:
    """Node values in program order."""
    vals: List[int] = []
    for node in slp:
        op = node[0]
        if op == "one":
            vals.append(1)
        elif op == "input":
            vals.append(base[node[1] - 1])
        elif op == "add":
            vals.append(vals[node[1]] + vals[node[2]])
        elif op == "subvia":
            vals.append(vals[node[1]] - vals[node[2]])
        else:
            vals.append(vals[node[1]] * vals[node[2]])
    return vals


def extend_unique(C: CompiledSystem, base: Sequence[int]) -> Tuple[int, ...]:
    """The unique full assignment satisfying every equation except x_q + x_q = x_q."""
    if len(base) != C.p:
        raise PolynomialError(f"base has {len(base)} values, expected {C.p}")
    vals = run_slp(C.slp, base)
    out = [0] * len(vals)
    for i, v in enumerate(vals):
        out[node_variable(i, C.p) - 1] = v
    return tuple(out)


def satisfies(C: CompiledSystem, base: Sequence[int]) -> bool:
    return check(C.system, extend_unique(C, base))


# -- four-square lift --------------------------------------------------------------

@dataclass(frozen=True)
class LiftResult:
    polynomial: Polynomial
    var_map: Dict[int, Tuple[int, int, int, int]]


def lift_to_integers(W: Polynomial, nat_vars: Sequence[int],
                     max_degree: int = DEFAULT_MAX_DEGREE,
                     max_vars: int = DEFAULT_MAX_VARS) -> LiftResult:
    """W^2 + sum over v of (x_v - a_v^2 - b_v^2 - c_v^2 - d_v^2)^2.

    Integer zeros of the result are the integer zeros of W whose ``nat_vars``
    coordinates are non-negative, each paired with its four-square witnesses.
    """
    nat = sorted(set(nat_vars))
    if not nat:
        raise PolynomialError("nat_vars must be nonempty")
    for v in nat:
        if not 1 <= v <= W.num_vars:
            raise PolynomialError(f"x{v} is not a variable of W")
    total = W.num_vars + 4 * len(nat)
    if total > max_vars:
        raise CapExceeded(f"lift needs {total} variables, cap is {max_vars}")
    if max(2 * W.degree, 4) > max_degree:
        raise CapExceeded(f"lift has degree {max(2 * W.degree, 4)}, cap is {max_degree}")
    result = W.with_num_vars(total) ** 2
    var_map = {}
    nxt = W.num_vars + 1
    for v in nat:
        fresh = tuple(range(nxt, nxt + 4))
        nxt += 4
        var_map[v] = fresh
        gap = Polynomial.variable(total, v)
        for f in fresh:
            gap = gap - Polynomial.variable(total, f) ** 2
        result = result + gap ** 2
    return LiftResult(result, var_map)
