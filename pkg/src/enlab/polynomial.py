"""Sparse multivariate integer polynomials.

A :class:`Polynomial` maps exponent vectors to nonzero integer coefficients.
The term map is canonical: zero coefficients are never stored, so two
polynomials are equal exactly when their term maps are equal.

  x1^2 - x2  ->  Polynomial(2, {(2, 0): 1, (0, 1): -1})

Also here: the height bound and solution enumerator for the binary
quadratic ``a*x^2 + b*x*y + c*y^2 + d*x + e*y + f = 0``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

Exponent = Tuple[int, ...]

INT64_MAX = 2**63 - 1
INT64_MIN = -(2**63)

DEFAULT_MAX_DEGREE = 16
DEFAULT_MAX_VARS = 16


class PolynomialError(ValueError):
    """Base class for polynomial construction and evaluation errors."""


class ParseError(PolynomialError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class CapExceeded(PolynomialError):
    """Degree, variable count, or coefficient width beyond the configured cap."""


class EvaluationOverflow(PolynomialError, OverflowError):
    pass


def _check_coeff(c: int) -> int:
    if not INT64_MIN <= c <= INT64_MAX:
        raise CapExceeded(f"coefficient {c} does not fit in a signed 64-bit integer")
    return c


@dataclass(frozen=True)
class Polynomial:
    num_vars: int
    terms: Mapping[Exponent, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.num_vars < 0:
            raise PolynomialError("num_vars must be non-negative")
        clean = {}
        for mono, coeff in self.terms.items():
            mono = tuple(int(e) for e in mono)
            if len(mono) != self.num_vars:
                raise PolynomialError(
                    f"exponent vector {mono} has length {len(mono)}, expected {self.num_vars}")
            if any(e < 0 for e in mono):
                raise PolynomialError(f"negative exponent in {mono}")
            if coeff:
                clean[mono] = int(coeff)
        object.__setattr__(self, "terms", clean)

    # -- construction -------------------------------------------------------

    @classmethod
    def constant(cls, num_vars: int, value: int) -> "Polynomial":
        return cls(num_vars, {(0,) * num_vars: value} if value else {})

    @classmethod
    def variable(cls, num_vars: int, index: int) -> "Polynomial":
        """The polynomial ``x_index`` (1-based)."""
        if not 1 <= index <= num_vars:
            raise PolynomialError(f"variable x{index} outside 1..{num_vars}")
        exp = [0] * num_vars
        exp[index - 1] = 1
        return cls(num_vars, {tuple(exp): 1})

    def with_num_vars(self, num_vars: int) -> "Polynomial":
        """Embed into a ring with more variables (new exponents are zero)."""
        if num_vars < self.num_vars:
            raise PolynomialError("cannot drop variables")
        pad = (0,) * (num_vars - self.num_vars)
        return Polynomial(num_vars, {m + pad: c for m, c in self.terms.items()})

    # -- queries ------------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def degree(self) -> int:
        """Total degree; 0 for the zero polynomial."""
        return max((sum(m) for m in self.terms), default=0)

    def degree_in(self, index: int) -> int:
        return max((m[index - 1] for m in self.terms), default=0)

    def used_vars(self) -> List[int]:
        return [i + 1 for i in range(self.num_vars) if any(m[i] for m in self.terms)]

    def sorted_terms(self) -> List[Tuple[Exponent, int]]:
        """Terms in graded-lex order: higher total degree first, then x1 > x2 > ..."""
        return sorted(self.terms.items(), key=lambda t: (-sum(t[0]), tuple(-e for e in t[0])))

    # -- arithmetic ---------------------------------------------------------

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.num_vars != self.num_vars:
                raise PolynomialError("num_vars mismatch")
            return other
        if isinstance(other, int):
            return Polynomial.constant(self.num_vars, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return Polynomial(self.num_vars, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.num_vars, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: Dict[Exponent, int] = {}
        for ma, ca in self.terms.items():
            for mb, cb in other.terms.items():
                m = tuple(x + y for x, y in zip(ma, mb))
                out[m] = out.get(m, 0) + ca * cb
        return Polynomial(self.num_vars, out)

    __rmul__ = __mul__

    def __pow__(self, exponent: int):
        if exponent < 0:
            raise PolynomialError("negative exponent")
        result = Polynomial.constant(self.num_vars, 1)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            exponent >>= 1
            if exponent:
                base = base * base
        return result

    def __str__(self) -> str:
        return format_polynomial(self)

    def __hash__(self):
        return hash((self.num_vars, frozenset(self.terms.items())))

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.num_vars == other.num_vars and self.terms == other.terms


# -- parsing ---------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|x(\d+)|(\^)|([-+*()])|(=))")


def _tokenize(text: str) -> List[Tuple[str, object, int]]:
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            stripped = len(text[pos:]) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[pos + stripped]!r}", pos + stripped)
        start = m.end() - len(m.group(0).lstrip())
        if m.group(1) is not None:
            tokens.append(("int", int(m.group(1)), start))
        elif m.group(2) is not None:
            idx = int(m.group(2))
            if idx == 0:
                raise ParseError("variable index must be positive", start)
            tokens.append(("var", idx, start))
        elif m.group(3) is not None:
            tokens.append(("^", None, start))
        elif m.group(4) is not None:
            tokens.append((m.group(4), None, start))
        else:
            tokens.append(("=", None, start))
        pos = m.end()
    tokens.append(("end", None, len(text)))
    return tokens


class _Parser:
    def __init__(self, tokens, num_vars: int, max_degree: int):
        self.tokens = tokens
        self.i = 0
        self.n = num_vars
        self.max_degree = max_degree

    def peek(self):
        return self.tokens[self.i]

    def take(self, kind=None):
        tok = self.tokens[self.i]
        if kind is not None and tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {tok[0]!r}", tok[2])
        self.i += 1
        return tok

    def _capped(self, p: Polynomial, pos: int) -> Polynomial:
        if p.degree > self.max_degree:
            raise CapExceeded(f"degree {p.degree} exceeds cap {self.max_degree} (position {pos})")
        for c in p.terms.values():
            _check_coeff(c)
        return p

    def expr(self) -> Polynomial:
        pos = self.peek()[2]
        if self.peek()[0] in "+-":
            sign = self.take()[0]
            acc = self.term()
            if sign == "-":
                acc = -acc
        else:
            acc = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.take()[0]
            rhs = self.term()
            acc = acc + rhs if op == "+" else acc - rhs
            self._capped(acc, pos)
        return acc

    def term(self) -> Polynomial:
        pos = self.peek()[2]
        acc = self.factor()
        while self.peek()[0] == "*":
            self.take()
            acc = self._capped(acc * self.factor(), pos)
        return acc

    def factor(self) -> Polynomial:
        kind, val, pos = self.peek()
        if kind == "int":
            self.take()
            base = Polynomial.constant(self.n, _check_coeff(val))
        elif kind == "var":
            self.take()
            base = Polynomial.variable(self.n, val)
        elif kind == "(":
            self.take()
            base = self.expr()
            self.take(")")
        else:
            raise ParseError(f"expected integer, variable or '(' but found {kind!r}", pos)
        while self.peek()[0] == "^":
            self.take()
            kind, val, epos = self.peek()
            if kind != "int" or val < 1:
                raise ParseError("exponent must be a positive integer", epos)
            self.take()
            if val > self.max_degree and not base.is_zero() and base.degree > 0:
                raise CapExceeded(f"exponent {val} exceeds degree cap {self.max_degree} (position {epos})")
            base = self._capped(base ** val, pos)
        return base


def parse_polynomial(text: str, num_vars: Optional[int] = None,
                     max_degree: int = DEFAULT_MAX_DEGREE,
                     max_vars: int = DEFAULT_MAX_VARS) -> Polynomial:
    """Parse ``text`` into canonical expanded form.

    ``num_vars`` may raise the variable count above the highest index
    mentioned; it may not lower it. A trailing ``= 0`` is accepted.
    """
    tokens = _tokenize(text)
    if tokens[0][0] == "end":
        raise ParseError("empty expression", 0)
    mentioned = max((v for k, v, _ in tokens if k == "var"), default=0)
    if num_vars is None:
        num_vars = mentioned
    elif num_vars < mentioned:
        raise PolynomialError(f"num_vars={num_vars} but x{mentioned} is mentioned")
    if num_vars > max_vars:
        raise CapExceeded(f"{num_vars} variables exceed cap {max_vars}")
    parser = _Parser(tokens, num_vars, max_degree)
    poly = parser.expr()
    kind, _, pos = parser.peek()
    if kind == "=":
        parser.take()
        k2, v2, p2 = parser.peek()
        if k2 != "int" or v2 != 0:
            raise ParseError("only '= 0' is accepted after the expression", p2)
        parser.take()
        kind, _, pos = parser.peek()
    if kind != "end":
        raise ParseError(f"unexpected token {kind!r}", pos)
    return poly


def _format_monomial(mono: Exponent) -> str:
    parts = []
    for i, e in enumerate(mono, start=1):
        if e == 1:
            parts.append(f"x{i}")
        elif e > 1:
            parts.append(f"x{i}^{e}")
    return "*".join(parts)


def format_polynomial(p: Polynomial) -> str:
    """Canonical text: graded-lex term order, unit coefficients elided."""
    if p.is_zero():
        return "0"
    out = []
    for k, (mono, coeff) in enumerate(p.sorted_terms()):
        body = _format_monomial(mono)
        mag = abs(coeff)
        if not body:
            text = str(mag)
        elif mag == 1:
            text = body
        else:
            text = f"{mag}*{body}"
        if k == 0:
            out.append(text if coeff > 0 else f"-{text}")
        else:
            out.append(("+ " if coeff > 0 else "- ") + text)
    return " ".join(out)


# -- evaluation and measures -----------------------------------------------

def evaluate(p: Polynomial, point: Sequence[int], bit_limit: Optional[int] = None) -> int:
    """Exact value of ``p`` at ``point``.

    Python integers never wrap. ``bit_limit`` optionally emulates a fixed
    exact-integer width: exceeding it raises :class:`EvaluationOverflow`.
    """
    if len(point) != p.num_vars:
        raise PolynomialError(f"point has {len(point)} coordinates, polynomial has {p.num_vars} variables")
    total = 0
    for mono, coeff in p.terms.items():
        v = coeff
        for x, e in zip(point, mono):
            if e:
                v *= x ** e
        total += v
        if bit_limit is not None and (v.bit_length() > bit_limit or total.bit_length() > bit_limit):
            raise EvaluationOverflow(f"value exceeds {bit_limit}-bit range")
    return total


def norm(p: Polynomial) -> int:
    """max of variable count, total degree and the coefficient magnitudes."""
    return max([p.num_vars, p.degree] + [abs(c) for c in p.terms.values()])


def permute_vars(p: Polynomial, perm: Sequence[int]) -> Polynomial:
    """Rename x_i to x_{perm[i-1]} (``perm`` is a 1-based permutation)."""
    out = {}
    for mono, c in p.terms.items():
        new = [0] * p.num_vars
        for i, e in enumerate(mono):
            new[perm[i] - 1] = e
        out[tuple(new)] = c
    return Polynomial(p.num_vars, out)


# -- binary quadratics -------------------------------------------------------

@dataclass(frozen=True)
class QuadraticCoeffs:
    a: int
    b: int
    c: int
    d: int
    e: int
    f: int

    def as_tuple(self) -> Tuple[int, ...]:
        return (self.a, self.b, self.c, self.d, self.e, self.f)

    def value(self, x: int, y: int) -> int:
        return (self.a * x * x + self.b * x * y + self.c * y * y
                + self.d * x + self.e * y + self.f)

    def to_polynomial(self) -> Polynomial:
        a, b, c, d, e, f = self.as_tuple()
        return Polynomial(2, {(2, 0): a, (1, 1): b, (0, 2): c, (1, 0): d, (0, 1): e, (0, 0): f})


@dataclass(frozen=True)
class QuadraticSolutions:
    solutions: Tuple[Tuple[int, int], ...]
    bound: int
    finite: bool
    # a solution with bound < max(|x|,|y|) <= 2*bound, when one exists
    escape_witness: Optional[Tuple[int, int]] = None


def quadratic_height_bound(q: QuadraticCoeffs) -> int:
    m = max(abs(v) for v in q.as_tuple())
    if m == 0:
        raise PolynomialError("all coefficients are zero; every (x, y) is a solution")
    return 20 * m**4


def _roots_in_y(q: QuadraticCoeffs, x: int, radius: int) -> Iterable[int]:
    """Integer y with |y| <= radius solving the quadratic for fixed x."""
    A = q.c
    B = q.b * x + q.e
    C = q.a * x * x + q.d * x + q.f
    if A == 0:
        if B == 0:
            if C == 0:
                return range(-radius, radius + 1)
            return ()
        if C % B == 0 and abs(C // B) <= radius:
            return (-C // B,)
        return ()
    disc = B * B - 4 * A * C
    if disc < 0:
        return ()
    s = math.isqrt(disc)
    if s * s != disc:
        return ()
    roots = set()
    for num in (-B + s, -B - s):
        if num % (2 * A) == 0 and abs(num // (2 * A)) <= radius:
            roots.add(num // (2 * A))
    return sorted(roots)


def _x_window(q: QuadraticCoeffs, radius: int) -> Optional[range]:
    """The x values with a real y root when that set is bounded, clipped to the box.

    For c != 0 a real y exists iff the discriminant in y,
    (b^2 - 4ac) x^2 + (2be - 4cd) x + (e^2 - 4cf), is non-negative; with a
    negative leading coefficient that is a bounded interval.
    """
    if q.c == 0:
        return None
    alpha = q.b * q.b - 4 * q.a * q.c
    beta = 2 * q.b * q.e - 4 * q.c * q.d
    gamma = q.e * q.e - 4 * q.c * q.f
    if alpha >= 0:
        return None
    delta = beta * beta - 4 * alpha * gamma
    if delta < 0:
        return range(0)
    s = math.isqrt(delta)
    den = -2 * alpha
    lo = (beta - s - 1) // den
    hi = -((-(beta + s + 1)) // den)
    return range(max(lo, -radius), min(hi, radius) + 1)


def enumerate_quadratic_solutions(q: QuadraticCoeffs, max_bound: int = 10**6) -> QuadraticSolutions:
    """All integer solutions within the height bound, plus an escape check.

    Each x in the box is fixed in turn and the equation is solved for y
    exactly. A solution in the shell (bound, 2*bound] contradicts
    finiteness and flags the set as infinite.
    """
    bound = quadratic_height_bound(q)
    outer = 2 * bound
    xs = _x_window(q, outer)
    if xs is None:
        if bound > max_bound:
            raise CapExceeded(f"height bound {bound} exceeds enumeration budget {max_bound}")
        xs = range(-outer, outer + 1)
    inner: List[Tuple[int, int]] = []
    witness = None
    for x in xs:
        for y in _roots_in_y(q, x, outer):
            h = max(abs(x), abs(y))
            if h <= bound:
                inner.append((x, y))
            elif witness is None or (h, (x, y)) < (max(map(abs, witness)), witness):
                witness = (x, y)
    inner.sort()
    return QuadraticSolutions(tuple(inner), bound, witness is None, witness)
