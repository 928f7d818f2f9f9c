"""Instance loading and report documents."""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from .egalitarian import EAResult
from .exchange import TradeSolution
from .rational import fmt_rat
from .sharing import CoreReport, PaymentVector

FIXTURES = ("E1", "E2", "E3", "F1")


def fixture_document(name: str) -> dict:
    text = resources.files("egalflow").joinpath("fixtures", f"{name}.json").read_text()
    return json.loads(text)


def load_document(where: str) -> dict:
    """Read an instance file; bare fixture names such as ``E1`` or ``fixtures/E1`` also work."""
    path = Path(where)
    if path.is_file():
        return json.loads(path.read_text())
    stem = path.name[:-5] if path.name.endswith(".json") else path.name
    if stem in FIXTURES:
        return fixture_document(stem)
    raise FileNotFoundError(where)


def dumps(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


def payments_doc(p: PaymentVector) -> dict:
    return {str(k): fmt_rat(v) for k, v in p.payments.items()}


def core_doc(rep: CoreReport) -> dict:
    return {
        "ir": rep.ir_ok,
        "bb": rep.bb_ok,
        "eff": rep.eff_ok,
        "cr": rep.cr_ok,
        "mode": rep.mode,
        "violations": [
            {"coalition": sorted(map(str, s)), "value": fmt_rat(v), "payment": fmt_rat(ps)}
            for s, v, ps in rep.violated_coalitions
        ],
    }


def solution_doc(sol: TradeSolution) -> dict:
    inst = sol.instance
    ids = inst.edge_ids
    return {
        "total_profit": fmt_rat(sol.total_profit),
        "flow": {ids[e]: fmt_rat(f) for e, f in enumerate(sol.flow.values)},
        "trades": [
            {
                "seller": t.seller,
                "buyer": t.buyer,
                "amount": fmt_rat(t.amount),
                "profit": fmt_rat(t.profit),
                "path": [ids[e] for e in t.path_edges],
            }
            for t in sol.trades
        ],
        "warnings": list(sol.warnings),
    }


def trace_doc(res: EAResult) -> list:
    return [{"lambda": fmt_rat(r.lam), "fixed": list(r.newly_fixed)} for r in res.trace]
