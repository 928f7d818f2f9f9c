"""Egalitarian allocation by iterative fixing, with a brute-force cross-check.

The flow algorithm raises a common floor under all non-fixed payment edges
as far as a full-value flow allows, then freezes the edges that cannot rise
above that floor, and repeats. :func:`dutta_ray` computes the same vector by
enumerating coalitions of the induced game and is only usable for small
player counts.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

from .aemf import PinnedState, _lambda_network, max_common_lower_bound
from .errors import AmbiguousMaximizer, DimensionMismatch, EmptySolution, InvariantViolation
from .exchange import CoalitionGame, ExchangeInstance, TradeSolution, solve_exchange
from .flowcore import max_edge_objective, residual_reach_set
from .sharing import TAU, PaymentVector, ProfitSharingGraph, build_profit_sharing_graph, extract_payments

DUTTA_RAY_LIMIT = 16


@dataclass(frozen=True)
class IterationRecord:
    index: int
    lam: Fraction
    newly_fixed: tuple
    snapshot: PaymentVector


@dataclass(frozen=True)
class EAResult:
    payments: PaymentVector
    trace: tuple
    solver_calls: int = 0


class LeximinOrder(enum.Enum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


def fixed_edges(psg: ProfitSharingGraph, state: PinnedState, lam, witness, test="reachability") -> list:
    """Free payment edges that no admissible flow can lift above ``lam``.

    ``"reachability"`` looks for a residual path from the sink back to the
    edge's contract node (one cycle through the edge would lift it);
    ``"objective"`` maximizes each edge's flow outright. Both must agree.
    """
    net = _lambda_network(psg, state, lam)
    candidates = sorted(e for e in state.free if witness.values[e] == lam)
    if test == "reachability":
        reach = residual_reach_set(witness, net, TAU)
        return [e for e in candidates if net.graph.tail(e) not in reach]
    if test == "objective":
        return [
            e
            for e in candidates
            if max_edge_objective(net, e, psg.total_profit, start=witness) == lam
        ]
    raise ValueError(f"unknown test {test!r}")


def egalitarian_from_solution(sol: TradeSolution, method="newton", rng=None, test="reachability") -> EAResult:
    try:
        psg = build_profit_sharing_graph(sol)
    except EmptySolution:
        return EAResult(PaymentVector({p: Fraction(0) for p in sol.players}), ())
    state = PinnedState.initial(psg)
    trace = []
    calls = 0
    prev = None
    while state.free:
        lam, witness = max_common_lower_bound(psg, state, method=method, rng=rng)
        calls += 1
        if prev is not None and lam <= prev:
            raise InvariantViolation(f"floor did not rise: {lam} after {prev}")
        fixed = fixed_edges(psg, state, lam, witness, test)
        if not fixed:
            raise InvariantViolation(f"iteration {len(trace) + 1} fixed no edge at {lam}")
        state = state.pin(fixed, lam)
        trace.append(
            IterationRecord(
                len(trace) + 1,
                lam,
                tuple(psg.player_of_edge(e) for e in fixed),
                extract_payments(psg, witness),
            )
        )
        prev = lam
    payments = PaymentVector({p: state.pinned[psg.payment_edges[p]] for p in psg.players})
    if payments.total() != sol.total_profit:
        raise InvariantViolation("egalitarian payments do not add up to the total profit")
    return EAResult(payments, tuple(trace), calls)


def egalitarian_allocation(inst: ExchangeInstance, method="newton", rng=None, test="reachability") -> EAResult:
    return egalitarian_from_solution(solve_exchange(inst), method, rng, test)


def dutta_ray(game: CoalitionGame) -> PaymentVector:
    """Egalitarian allocation by repeated maximal-average coalitions.

    Each round picks the largest coalition of unpaid players maximizing
    ``(v(T + paid) - v(paid)) / |T|``, pays each member that average, and
    moves them to the paid set.
    """
    n = game.n
    if n > DUTTA_RAY_LIMIT:
        raise ValueError(f"dutta_ray enumerates 2^n coalitions; n={n} exceeds {DUTTA_RAY_LIMIT}")
    table = game.int_table()
    full = (1 << n) - 1
    paid = 0
    pay = {}
    while paid != full:
        rest = full & ~paid
        base = table[paid]
        best_val, best_size = None, 1
        winners = []
        sub = rest
        while sub:
            val = table[sub | paid] - base
            size = bin(sub).count("1")
            if best_val is None or val * best_size > best_val * size:
                best_val, best_size = val, size
                winners = [sub]
            elif val * best_size == best_val * size:
                winners.append(sub)
            sub = (sub - 1) & rest
        top = max(bin(w).count("1") for w in winners)
        largest = [w for w in winners if bin(w).count("1") == top]
        if len(largest) > 1:
            raise AmbiguousMaximizer(
                "several maximal coalitions maximize the average",
                [game.members(w) for w in largest],
            )
        chosen = largest[0]
        avg = Fraction(best_val, best_size * game.denominator)
        for i in range(n):
            if chosen >> i & 1:
                pay[game.players[i]] = avg
        paid |= chosen
    return PaymentVector({p: pay[p] for p in game.players})


def _sorted_values(p: PaymentVector, q: PaymentVector):
    if set(p.players) != set(q.players) or len(p.players) != len(q.players):
        raise DimensionMismatch("payment vectors cover different players")
    return sorted(p.payments.values()), sorted(q.payments.values())


def leximin_compare(p: PaymentVector, q: PaymentVector) -> LeximinOrder:
    a, b = _sorted_values(p, q)
    if a == b:
        return LeximinOrder.EQUAL
    return LeximinOrder.GREATER if a > b else LeximinOrder.LESS


def spread(p: PaymentVector) -> Fraction:
    vals = list(p.payments.values())
    if not vals:
        raise ValueError("empty payment vector")
    return max(vals) - min(vals)


__all__ = [
    "IterationRecord",
    "EAResult",
    "LeximinOrder",
    "egalitarian_allocation",
    "egalitarian_from_solution",
    "fixed_edges",
    "dutta_ray",
    "leximin_compare",
    "spread",
]
