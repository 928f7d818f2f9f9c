"""Profit-sharing graph, payment extraction and core membership checks.

The graph built here has one profit node per trade. Its source edge carries
the profit the trade generated, and the node forwards it to the trade's two
contract nodes; each contract node drains into the sink through the owner's
payment edge. Every maximum flow therefore splits each trade's profit between
its seller and buyer, and the payment-edge flows form a payment vector.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import DimensionMismatch, EmptySolution
from .exchange import CoalitionGame, Trade, TradeSolution
from .flowcore import BoundedNetwork, DirectedGraph, Flow, max_flow

SIGMA = 0
TAU = 1


@dataclass(frozen=True, eq=False)
class ProfitSharingGraph:
    network: BoundedNetwork
    players: tuple
    trades: dict  # trade index in the solution -> Trade (positive profit only)
    profit_nodes: dict  # trade index -> node
    source_edges: dict  # trade index -> edge sigma -> profit node
    contract_nodes: dict  # player -> node
    payment_edges: dict  # player -> edge contract node -> tau
    total_profit: Fraction

    @property
    def payment_edge_list(self) -> list:
        return [self.payment_edges[p] for p in self.players]

    def player_of_edge(self, e: int):
        for p, pe in self.payment_edges.items():
            if pe == e:
                return p
        raise KeyError(e)


@dataclass(frozen=True)
class PaymentVector:
    payments: dict

    def __getitem__(self, player) -> Fraction:
        return self.payments[player]

    @property
    def players(self) -> tuple:
        return tuple(self.payments)

    def total(self) -> Fraction:
        return sum(self.payments.values(), Fraction(0))

    def values_in(self, players) -> tuple:
        return tuple(self.payments[p] for p in players)

    def scaled(self, k) -> "PaymentVector":
        return PaymentVector({p: v * k for p, v in self.payments.items()})


@dataclass(frozen=True)
class CoreReport:
    ir_ok: bool
    bb_ok: bool
    eff_ok: bool
    cr_ok: bool
    violated_coalitions: tuple  # (coalition, v(S), p(S))
    mode: str

    @property
    def in_core(self) -> bool:
        return self.ir_ok and self.eff_ok and self.cr_ok


def build_profit_sharing_graph(sol: TradeSolution) -> ProfitSharingGraph:
    positive = [(k, t) for k, t in enumerate(sol.trades) if t.profit > 0]
    if not positive:
        raise EmptySolution("no trade generates positive profit")
    labels = ["sigma", "tau"]
    profit_nodes = {}
    for k, _ in positive:
        profit_nodes[k] = len(labels)
        labels.append(f"p{k}")
    contract_nodes = {}
    for p in sol.players:
        contract_nodes[p] = len(labels)
        labels.append(str(p))

    edges, upper = [], []
    source_edges = {}
    for k, t in positive:
        pk = profit_nodes[k]
        source_edges[k] = len(edges)
        edges.append((SIGMA, pk))
        upper.append(t.profit)
        edges.append((pk, contract_nodes[t.seller]))
        upper.append(t.profit)
        edges.append((pk, contract_nodes[t.buyer]))
        upper.append(t.profit)
    payment_edges = {}
    for p in sol.players:
        payment_edges[p] = len(edges)
        edges.append((contract_nodes[p], TAU))
        upper.append(None)

    net = BoundedNetwork(DirectedGraph(labels, edges), [0] * len(edges), upper, SIGMA, TAU)
    return ProfitSharingGraph(
        net,
        tuple(sol.players),
        dict(positive),
        profit_nodes,
        source_edges,
        contract_nodes,
        payment_edges,
        sol.total_profit,
    )


def extract_payments(psg: ProfitSharingGraph, flow: Flow) -> PaymentVector:
    return PaymentVector({p: flow.values[psg.payment_edges[p]] for p in psg.players})


def max_flow_payments(psg: ProfitSharingGraph, rng: Optional[random.Random] = None) -> PaymentVector:
    return extract_payments(psg, max_flow(psg.network, rng=rng))


def extended_in_edges(psg: ProfitSharingGraph, coalition) -> set:
    """Edges whose head is a neighbour of some contract node in ``coalition``."""
    g = psg.network.graph
    near = set()
    for p in coalition:
        near |= g.neighbors(psg.contract_nodes[p])
    return {e for e, (_, b) in enumerate(g.edges) if b in near}


def check_core(p: PaymentVector, game: CoalitionGame, sample=None) -> CoreReport:
    """Evaluate (IR), (BB), (EFF) and (CR) exactly.

    By default every coalition is checked. ``sample=(seed, count)`` instead
    checks ``count`` random nonempty coalitions drawn from ``Random(seed)``;
    the report's ``mode`` says so.
    """
    if set(p.players) != set(game.players) or len(p.players) != game.n:
        raise DimensionMismatch("payment vector and game have different players")
    pay = [Fraction(p[q]) for q in game.players]
    total = sum(pay, Fraction(0))
    grand = game.grand_value()
    ir = all(x >= 0 for x in pay)
    eff = total == grand
    bb = total <= grand
    violations = []
    if sample is None:
        mode = "exhaustive"
        d = math.lcm(game.denominator, *(x.denominator for x in pay))
        factor = d // game.denominator
        ipay = [int(x * d) for x in pay]
        table = game.int_table()
        psum = [0] * len(table)
        for mask in range(1, len(table)):
            low = mask & -mask
            psum[mask] = psum[mask ^ low] + ipay[low.bit_length() - 1]
            if psum[mask] < table[mask] * factor:
                violations.append(
                    (game.members(mask), Fraction(table[mask], game.denominator), Fraction(psum[mask], d))
                )
    else:
        seed, count = sample
        mode = f"sampled(seed={seed}, count={count})"
        rng = random.Random(seed)
        full = (1 << game.n) - 1
        for _ in range(count):
            mask = 0
            while mask == 0:
                mask = rng.getrandbits(game.n) & full
            v = game.value_mask(mask)
            ps = sum((pay[i] for i in range(game.n) if mask >> i & 1), Fraction(0))
            if ps < v:
                violations.append((game.members(mask), v, ps))
    return CoreReport(ir, bb, eff, not violations, tuple(violations), mode)


def internal_profit(psg: ProfitSharingGraph, coalition) -> Fraction:
    """Profit of trades with both contracts inside ``coalition``."""
    members = set(coalition)
    return sum(
        (t.profit for t in psg.trades.values() if t.seller in members and t.buyer in members),
        Fraction(0),
    )


__all__ = [
    "ProfitSharingGraph",
    "PaymentVector",
    "CoreReport",
    "Trade",
    "build_profit_sharing_graph",
    "extract_payments",
    "max_flow_payments",
    "extended_in_edges",
    "check_core",
    "internal_profit",
]
