"""Command-line front end.

    egalflow ea --input E1
    egalflow core-check E1 --vector A=8,B=0,C=0
    egalflow gen --seed 3 --players 8 --trades 10 > inst.json

Exit status: 0 success, 1 invalid input, 2 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from . import io
from .aemf import min_deviation
from .egalitarian import dutta_ray, egalitarian_from_solution, spread
from .errors import AmbiguousMaximizer, EgalflowError, InvariantViolation, ValidationError
from .exchange import TABLE_LIMIT, build_game, solve_exchange, validate_instance
from .generate import DEFAULTS, random_document
from .rational import fmt_rat, to_rat
from .sharing import PaymentVector, build_profit_sharing_graph, check_core

COMMANDS = ("solve", "ea", "core-check", "min-deviation", "oracle", "gen", "selftest")
ORACLE_LIMIT = 12
CORE_SAMPLES = 1000


@dataclass
class RunConfig:
    command: str
    input: Optional[str] = None
    output: Optional[str] = None
    format: str = "json"
    seed: int = 0
    vector: Optional[str] = None
    gen: dict = field(default_factory=lambda: dict(DEFAULTS))


class _Invariant(Exception):
    def __init__(self, message, doc):
        super().__init__(message)
        self.doc = doc


def parse_vector(text: str) -> dict:
    out = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise ValidationError(f"bad --vector entry {part!r}, expected PLAYER=VALUE")
        k, v = part.split("=", 1)
        try:
            out[k.strip()] = to_rat(v.strip())
        except (TypeError, ValueError, ZeroDivisionError):
            raise ValidationError(f"bad --vector value {v!r}")
    return out


def _load(cfg: RunConfig):
    if not cfg.input:
        raise ValidationError(f"{cfg.command} needs --input")
    try:
        doc = io.load_document(cfg.input)
    except FileNotFoundError:
        raise ValidationError(f"no such instance file: {cfg.input}")
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{cfg.input}: not valid JSON ({exc})")
    return doc, validate_instance(doc)


def _core_report(payments, game, seed):
    if game.n <= TABLE_LIMIT:
        return check_core(payments, game)
    return check_core(payments, game, sample=(seed, CORE_SAMPLES))


def _ea(cfg):
    _, inst = _load(cfg)
    sol = solve_exchange(inst)
    res = egalitarian_from_solution(sol)
    game = build_game(sol, materialize=len(sol.players) <= TABLE_LIMIT)
    core = _core_report(res.payments, game, cfg.seed)
    oracle = None
    if game.n <= ORACLE_LIMIT:
        try:
            oracle = dutta_ray(game) == res.payments
        except AmbiguousMaximizer:
            oracle = "ambiguous"
    sp = spread(res.payments)
    if sol.total_profit > 0:
        delta, _ = min_deviation(build_profit_sharing_graph(sol))
    else:
        delta = Fraction(0)
    doc = {
        "payments": io.payments_doc(res.payments),
        "trace": io.trace_doc(res),
        "checks": {
            "core": io.core_doc(core),
            "oracle_match": oracle,
            "spread": fmt_rat(sp),
            "min_deviation": fmt_rat(delta),
        },
        "warnings": list(sol.warnings),
    }
    if not core.in_core:
        raise _Invariant("egalitarian allocation is not in the core", doc)
    if oracle is False:
        raise _Invariant("egalitarian allocation differs from the Dutta-Ray oracle", doc)
    if sp != delta:
        raise _Invariant("spread of the allocation differs from the minimum deviation", doc)
    return doc


def _core_check(cfg):
    _, inst = _load(cfg)
    if not cfg.vector:
        raise ValidationError("core-check needs --vector")
    sol = solve_exchange(inst)
    vec = parse_vector(cfg.vector)
    missing = [p for p in sol.players if p not in vec]
    extra = [p for p in vec if p not in sol.players]
    if missing or extra:
        raise ValidationError(
            [f"--vector lacks player {p}" for p in missing] + [f"--vector names unknown player {p}" for p in extra]
        )
    payments = PaymentVector({p: vec[p] for p in sol.players})
    game = build_game(sol, materialize=len(sol.players) <= TABLE_LIMIT)
    rep = _core_report(payments, game, cfg.seed)
    return {"payments": io.payments_doc(payments), "core": io.core_doc(rep)}


def _min_deviation(cfg):
    _, inst = _load(cfg)
    sol = solve_exchange(inst)
    if sol.total_profit == 0:
        return {"delta": "0", "witness": {p: "0" for p in sol.players}}
    psg = build_profit_sharing_graph(sol)
    delta, witness = min_deviation(psg)
    return {
        "delta": fmt_rat(delta),
        "witness": {p: fmt_rat(witness.values[psg.payment_edges[p]]) for p in psg.players},
    }


def _oracle(cfg):
    _, inst = _load(cfg)
    sol = solve_exchange(inst)
    try:
        p = dutta_ray(build_game(sol))
    except AmbiguousMaximizer as exc:
        raise ValidationError(f"oracle undefined: {exc}")
    except ValueError as exc:
        raise ValidationError(str(exc))
    return {"payments": io.payments_doc(p)}


def _solve(cfg):
    _, inst = _load(cfg)
    return io.solution_doc(solve_exchange(inst))


def _gen(cfg):
    try:
        return random_document(cfg.seed, **cfg.gen)
    except ValueError as exc:
        raise ValidationError(str(exc))


SELFTEST = {
    "E2": {"total": "8", "ea": {"A": "4", "B": "4"}, "lambdas": ["4"], "delta": "0", "psg": (5, 5)},
    "E1": {"total": "8", "ea": {"A": "3", "B": "3", "C": "2"}, "lambdas": ["2", "3"], "delta": "1", "psg": (7, 9)},
    "E3": {
        "total": "12",
        "ea": {"A": "5", "B": "5", "C": "1", "D": "1"},
        "lambdas": ["1", "5"],
        "delta": "4",
        "psg": (8, 10),
    },
    "F1": {
        "total": "10",
        "ea": {"s1": "1/2", "d1": "1/2", "s2": "1", "d2": "1", "s3": "3/2", "d3": "3/2", "s4": "2", "d4": "2"},
        "lambdas": ["1/2", "1", "3/2", "2"],
        "delta": "3/2",
        "psg": (14, 20),
    },
}


def _selftest(cfg):
    results = {}
    failed = []
    for name, want in SELFTEST.items():
        inst = validate_instance(io.fixture_document(name))
        sol = solve_exchange(inst)
        psg = build_profit_sharing_graph(sol)
        res = egalitarian_from_solution(sol)
        got = {
            "total": fmt_rat(sol.total_profit),
            "ea": io.payments_doc(res.payments),
            "lambdas": [fmt_rat(r.lam) for r in res.trace],
            "delta": fmt_rat(min_deviation(psg)[0]),
            "psg": (psg.network.graph.n, psg.network.graph.m),
        }
        got["oracle"] = io.payments_doc(dutta_ray(build_game(sol))) == got["ea"]
        ok = all(got[k] == want[k] for k in want) and got["oracle"]
        results[name] = {"ok": ok, "ea": got["ea"], "lambdas": got["lambdas"], "delta": got["delta"]}
        if not ok:
            failed.append(name)
    doc = {"fixtures": results, "ok": not failed}
    if failed:
        raise _Invariant("selftest failed for " + ", ".join(failed), doc)
    return doc


HANDLERS = {
    "solve": _solve,
    "ea": _ea,
    "core-check": _core_check,
    "min-deviation": _min_deviation,
    "oracle": _oracle,
    "gen": _gen,
    "selftest": _selftest,
}


def _table(doc, indent=0) -> list:
    pad = "  " * indent
    lines = []
    if isinstance(doc, dict):
        width = max((len(str(k)) for k in doc), default=0)
        for k, v in doc.items():
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}{k}:")
                lines.extend(_table(v, indent + 1))
            else:
                lines.append(f"{pad}{str(k).ljust(width)}  {_scalar(v)}")
    elif isinstance(doc, list):
        for item in doc:
            if isinstance(item, dict):
                lines.append(f"{pad}-")
                lines.extend(_table(item, indent + 1))
            else:
                lines.append(f"{pad}- {_scalar(item)}")
    else:
        lines.append(pad + _scalar(doc))
    return lines


def _scalar(v) -> str:
    if isinstance(v, (dict, list)):
        return "-" if not v else json.dumps(v)
    if v is None:
        return "-"
    if isinstance(v, bool):
        return "yes" if v else "no"
    return str(v)


def render(doc, fmt: str) -> str:
    if fmt == "table":
        return "\n".join(_table(doc)) + "\n"
    return io.dumps(doc)


def run(cfg: RunConfig):
    """Execute one command; returns ``(exit_code, report_document_or_None)``."""
    try:
        return 0, HANDLERS[cfg.command](cfg)
    except ValidationError as exc:
        print("validation failed:", file=sys.stderr)
        for p in exc.problems:
            print(f"  - {p}", file=sys.stderr)
        return 1, None
    except _Invariant as exc:
        _dump_invariant(cfg, str(exc))
        return 2, exc.doc
    except InvariantViolation as exc:
        _dump_invariant(cfg, f"{type(exc).__name__}: {exc}")
        return 2, None
    except EgalflowError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1, None


def _dump_invariant(cfg, message):
    print(f"invariant violated: {message}", file=sys.stderr)
    print(f"command: {cfg.command} input: {cfg.input} seed: {cfg.seed}", file=sys.stderr)
    if cfg.input:
        try:
            print(io.dumps(io.load_document(cfg.input)), file=sys.stderr, end="")
        except (OSError, ValueError):
            pass


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="egalflow", description="Profit sharing for exchange flow games.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        if name not in ("gen", "selftest"):
            p.add_argument("path", nargs="?", help="instance file or fixture name (same as --input)")
            p.add_argument("--input")
        p.add_argument("--output")
        p.add_argument("--format", choices=("json", "table"), default="json")
        p.add_argument("--seed", type=int, default=0)
        if name == "core-check":
            p.add_argument("--vector", required=True, help="PLAYER=VALUE,... with integer or p/q values")
        if name == "gen":
            p.add_argument("--players", type=int, default=DEFAULTS["players"])
            p.add_argument("--trades", type=int, default=DEFAULTS["trades"])
            p.add_argument("--max-capacity", type=int, default=DEFAULTS["max_capacity"])
            p.add_argument("--max-profit", type=int, default=DEFAULTS["max_profit"])
    return parser


def config_from_args(args) -> RunConfig:
    cfg = RunConfig(args.command, output=args.output, format=args.format, seed=args.seed)
    cfg.input = getattr(args, "input", None) or getattr(args, "path", None)
    cfg.vector = getattr(args, "vector", None)
    if args.command == "gen":
        cfg.gen = {
            "players": args.players,
            "trades": args.trades,
            "max_capacity": args.max_capacity,
            "max_profit": args.max_profit,
        }
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = config_from_args(args)
    code, doc = run(cfg)
    if doc is not None:
        text = render(doc, cfg.format)
        if cfg.output:
            with open(cfg.output, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
