"""``enlab`` command line.

JSON on stdout is the machine interface; ``--format text`` prints a lossy
human-readable rendering that is never parsed back. Exit status: 0 success,
1 domain error, 2 usage error, 3 budget exhausted or unresolved outcome.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from dataclasses import dataclass
from typing import List, Optional

from . import __version__
from .checkpoint import canonical_json, digest
from .compiler import compile_polynomial, lift_to_integers
from .conjecture import (ConjectureError, IncompleteEnumeration, enumerate_tn,
                         solution_count_bound, verify_psi)
from .ensystem import (EnSystem, EnSystemError, format_system, gen_idempotent, gen_ladder,
                       gen_obs2, load_system, random_system, sat_system, tilde_transform)
from .polynomial import (DEFAULT_MAX_DEGREE, DEFAULT_MAX_VARS, PolynomialError, QuadraticCoeffs,
                         enumerate_quadratic_solutions, format_polynomial, norm,
                         parse_polynomial, quadratic_height_bound)
from .solver import (DEFAULT_BUDGET, UNKNOWN, BudgetExceeded, SearchBox,
                     check_conjecture_bound, count_in_box, decide_finiteness, solve_in_box)

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3


class Unresolved(Exception):
    """Raised after output is written when the outcome is incomplete."""


@dataclass
class RunRecord:
    command: str
    params: dict
    version: str
    wall_time: float
    digest: str

    def to_json(self) -> dict:
        return {"command": self.command, "params": self.params, "version": self.version,
                "wall_time": self.wall_time, "digest": self.digest}


def _read_input(path: Optional[str]) -> str:
    if path is None or path == "-":
        return sys.stdin.read()
    with open(path) as fh:
        return fh.read()


def _int_list(text: str) -> List[int]:
    return [int(t) for t in text.replace(",", " ").split()]


def _poly(args):
    return parse_polynomial(args.expr, num_vars=args.num_vars,
                            max_degree=args.max_degree, max_vars=args.max_vars)


def _box(args, n: int) -> SearchBox:
    if args.radii:
        radii = _int_list(args.radii)
        return SearchBox(max(max(radii), 1), tuple(radii))
    return SearchBox(args.radius)


# -- commands: each returns (json payload, text rendering) -------------------------

def cmd_compile(args):
    C = compile_polynomial(_poly(args), args.max_degree, args.max_vars)
    return C.to_json(), format_system(C.system) + f"# q = x{C.q}\n"


def cmd_solve(args):
    S = load_system(_read_input(args.input))
    sols = solve_in_box(S, _box(args, S.n), args.budget, args.workers, args.checkpoint, args.resume)
    payload = sols.to_json()
    payload["bound_check"] = check_conjecture_bound(S, sols).to_json()
    text = "\n".join(" ".join(map(str, s)) for s in sols.solutions)
    return payload, text + f"\n# {len(sols)} solutions\n"


def cmd_count(args):
    S = load_system(_read_input(args.input))
    box = _box(args, S.n)
    c = count_in_box(S, box, args.budget, args.workers, args.checkpoint, args.resume)
    return {"count": c, "box": box.to_json()}, f"{c}\n"


def cmd_decide(args):
    S = load_system(_read_input(args.input))
    v = decide_finiteness(S, args.escape_radius, args.budget, args.workers)
    payload = v.to_json()
    text = f"{v.verdict} (bound {v.bound}, escape radius {v.escape_radius})\n"
    if v.witness is not None:
        text += "witness: " + " ".join(map(str, v.witness)) + "\n"
    if v.verdict == UNKNOWN:
        return payload, text, Unresolved(v.reason)
    return payload, text


def cmd_gen(args):
    kind = args.kind
    if kind == "idempotent":
        S = gen_idempotent(args.n)
    elif kind == "obs2":
        S = gen_obs2(args.n)
    elif kind == "ladder":
        base = load_system(_read_input(args.base)) if args.base else EnSystem(2)
        S = gen_ladder(base, args.n)
    else:
        rng = random.Random(args.seed)
        systems = [random_system(rng, args.n, args.equations) for _ in range(args.count)]
        if args.count == 1:
            S = systems[0]
        else:
            return ([s.to_json() for s in systems],
                    "\n".join(format_system(s) for s in systems))
    return S.to_json(), format_system(S)


def cmd_tilde(args):
    S = tilde_transform(load_system(_read_input(args.input)))
    return S.to_json(), format_system(S)


def cmd_sat(args):
    S = sat_system(args.values)
    return S.to_json(), format_system(S)


def cmd_norm(args):
    p = _poly(args)
    return {"norm": norm(p), "polynomial": format_polynomial(p)}, f"{norm(p)}\n"


def cmd_quad_bound(args):
    b = quadratic_height_bound(QuadraticCoeffs(*args.coeffs))
    return {"bound": b}, f"{b}\n"


def cmd_quad_solve(args):
    res = enumerate_quadratic_solutions(QuadraticCoeffs(*args.coeffs))
    payload = {"bound": res.bound, "finite": res.finite,
               "solutions": [list(s) for s in res.solutions],
               "escape_witness": None if res.escape_witness is None else list(res.escape_witness)}
    text = "\n".join(f"{x} {y}" for x, y in res.solutions)
    return payload, text + f"\n# bound {res.bound}, {'finite' if res.finite else 'infinite'}\n"


def cmd_lift(args):
    res = lift_to_integers(_poly(args), _int_list(args.nat), args.max_degree, args.max_vars)
    payload = {"polynomial": format_polynomial(res.polynomial),
               "num_vars": res.polynomial.num_vars,
               "var_map": {str(k): list(v) for k, v in res.var_map.items()}}
    return payload, format_polynomial(res.polynomial) + "\n"


def cmd_psi(args):
    r = verify_psi(args.n, args.y_budget, args.allow_long, budget=args.budget,
                   workers=args.workers, checkpoint=args.checkpoint, resume=args.resume)
    text = (f"Psi_{r.n}: {r.outcome}; {r.tuples_checked} tuples with "
            f"{r.lower} < |x1| <= {r.upper}; {r.distinct_signatures} signatures\n")
    if not r.confirmed:
        return r.to_json(), text, Unresolved(f"{len(r.stuck)} tuples without a witness")
    return r.to_json(), text


def cmd_tn(args):
    r = enumerate_tn(args.n, args.escape_radius, args.conditional, args.budget,
                     args.workers, args.checkpoint, args.resume)
    text = "\n".join(" ".join(map(str, t)) for t in sorted(r.representatives))
    return r.to_json(), text + f"\n# {len(r.members)} members, {len(r.representatives)} up to permutation\n"


def cmd_count_bound(args):
    b = solution_count_bound(args.n, args.beta)
    return {"bound": b}, f"{b}\n"


# -- parser ------------------------------------------------------------------------

def _add_poly_args(p):
    p.add_argument("expr", help="polynomial, e.g. 'x1^2 - x2'")
    p.add_argument("--num-vars", type=int)
    p.add_argument("--max-degree", type=int, default=DEFAULT_MAX_DEGREE)
    p.add_argument("--max-vars", type=int, default=DEFAULT_MAX_VARS)


def _add_search_args(p, box=True, long_running=True):
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="search node budget")
    p.add_argument("--workers", type=int, default=1, help="worker processes (env ENLAB_WORKERS overrides)")
    if box:
        p.add_argument("--radius", type=int, default=4)
        p.add_argument("--radii", help="per-variable radii, comma separated")
    if long_running:
        p.add_argument("--checkpoint", help="JSONL progress file")
        p.add_argument("--resume", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="enlab", description=__doc__.splitlines()[0])
    parser.add_argument("--format", choices=("json", "text"), default="json")
    parser.add_argument("--record", help="append a run record (JSONL) to this file")
    parser.add_argument("--version", action="version", version=__version__)
    # output options are accepted before or after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default=argparse.SUPPRESS)
    common.add_argument("--record", default=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, **kw):
        return sub.add_parser(name, parents=[common], **kw)

    p = add("compile", help="compile D = 0 into an E_n system")
    _add_poly_args(p)
    p.set_defaults(func=cmd_compile)

    for name, func in (("solve", cmd_solve), ("count", cmd_count)):
        p = add(name, help=f"{name} solutions of a system in a box")
        p.add_argument("input", nargs="?", help="system file (JSON or text); stdin by default")
        _add_search_args(p)
        p.set_defaults(func=func)

    p = add("decide-finite", help="finiteness verdict for a system")
    p.add_argument("input", nargs="?")
    p.add_argument("--escape-radius", type=int)
    _add_search_args(p, box=False, long_running=False)
    p.set_defaults(func=cmd_decide)

    p = add("gen", help="generate a system")
    p.add_argument("kind", choices=("idempotent", "obs2", "ladder", "random-system"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--base", help="ladder base system file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--equations", type=int, default=6, help="max equations for random-system")
    p.add_argument("--count", type=int, default=1)
    p.set_defaults(func=cmd_gen)

    p = add("tilde", help="replace each x_i = 1 by x_i * x_j = x_j")
    p.add_argument("input", nargs="?")
    p.set_defaults(func=cmd_tilde)

    p = add("sat", help="maximal system satisfied by a tuple")
    p.add_argument("values", type=int, nargs="+")
    p.set_defaults(func=cmd_sat)

    p = add("norm", help="max of arity, degree and |coefficients|")
    _add_poly_args(p)
    p.set_defaults(func=cmd_norm)

    for name, func in (("quad-bound", cmd_quad_bound), ("quad-solve", cmd_quad_solve)):
        p = add(name, help="a*x^2 + b*x*y + c*y^2 + d*x + e*y + f = 0")
        p.add_argument("coeffs", type=int, nargs=6, metavar="C")
        p.set_defaults(func=func)

    p = add("lift", help="four-square lift of selected variables")
    _add_poly_args(p)
    p.add_argument("--nat", required=True, help="variable indices, comma separated")
    p.set_defaults(func=cmd_lift)

    p = add("verify-psi", help="exhaustive check of Psi_n")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--y-budget", type=int)
    p.add_argument("--allow-long", action="store_true")
    _add_search_args(p, box=False)
    p.set_defaults(func=cmd_psi)

    p = add("enumerate-tn", help="tuples solving some finite system in E_n")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--escape-radius", type=int)
    p.add_argument("--conditional", action="store_true", help="allow n > 3")
    _add_search_args(p, box=False)
    p.set_defaults(func=cmd_tn)

    p = add("count-bound", help="(1 + 2*beta)^n")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--beta", type=int, required=True)
    p.set_defaults(func=cmd_count_bound)
    return parser


def _params(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "record", "format")}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    status = EXIT_OK
    try:
        out = args.func(args)
    except (BudgetExceeded, IncompleteEnumeration) as exc:
        print(f"enlab {args.command}: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (PolynomialError, EnSystemError, ConjectureError, ValueError, OSError) as exc:
        print(f"enlab {args.command}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    payload, text = out[0], out[1]
    if len(out) > 2:
        print(f"enlab {args.command}: {out[2]}", file=sys.stderr)
        status = EXIT_BUDGET
    body = canonical_json(payload)
    if args.format == "json":
        sys.stdout.write(body + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    if args.record:
        rec = RunRecord(args.command, _params(args), __version__,
                        round(time.perf_counter() - start, 6), digest(payload))
        with open(args.record, "a") as fh:
            fh.write(json.dumps(rec.to_json(), sort_keys=True) + "\n")
    return status


def run() -> None:
    sys.exit(main())
