"""Exchange graphs, their optimal trade flow, and the induced coalition game."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import TooManyPlayers, TradeStructureError, UnknownPlayer, ValidationError
from .flowcore import BoundedNetwork, DirectedGraph, Flow, decompose_paths, max_profit_flow
from .rational import common_denominator, fmt_rat, to_rat

TABLE_LIMIT = 20
NODE_KINDS = ("source", "sink", "contract", "internal")


@dataclass(frozen=True, eq=False)
class ExchangeInstance:
    network: BoundedNetwork
    profit: tuple
    contract_nodes: dict  # node index -> player id
    players: tuple
    edge_ids: tuple = ()

    def node_of(self, player) -> int:
        for node, p in self.contract_nodes.items():
            if p == player:
                return node
        raise UnknownPlayer(player)

    @property
    def node_ids(self) -> tuple:
        return self.network.graph.labels

    def to_document(self) -> dict:
        """Inverse of :func:`validate_instance` (the on-disk instance format)."""
        net = self.network
        g = net.graph
        nodes = []
        for v, label in enumerate(g.labels):
            if v == net.source:
                nodes.append({"id": label, "kind": "source"})
            elif v == net.sink:
                nodes.append({"id": label, "kind": "sink"})
            elif v in self.contract_nodes:
                nodes.append({"id": label, "kind": "contract", "player": self.contract_nodes[v]})
            else:
                nodes.append({"id": label, "kind": "internal"})
        edge_ids = self.edge_ids or tuple(f"e{e}" for e in range(g.m))
        edges = []
        for e, (a, b) in enumerate(g.edges):
            u = net.upper[e]
            edges.append(
                {
                    "id": edge_ids[e],
                    "tail": g.labels[a],
                    "head": g.labels[b],
                    "upper": None if u is None else fmt_rat(u),
                    "profit": fmt_rat(self.profit[e]),
                }
            )
        return {"players": list(self.players), "nodes": nodes, "edges": edges}


@dataclass(frozen=True)
class Trade:
    seller: str
    buyer: str
    path_edges: tuple
    amount: Fraction
    profit: Fraction


@dataclass(frozen=True, eq=False)
class TradeSolution:
    instance: ExchangeInstance
    flow: Flow
    total_profit: Fraction
    trades: tuple
    warnings: tuple = field(default=())

    @property
    def players(self) -> tuple:
        return self.instance.players


def _num(x, what, problems):
    try:
        return to_rat(x)
    except (TypeError, ValueError, ZeroDivisionError):
        problems.append(f"{what}: not an integer or p/q string: {x!r}")
        return None


def validate_instance(raw: dict, check_trades: bool = True) -> ExchangeInstance:
    """Build an :class:`ExchangeInstance` from the document format.

    Every problem found is collected before raising :class:`ValidationError`.
    With ``check_trades`` the instance is also solved once to confirm that its
    optimal flow splits into two-contract trades.
    """
    problems = []
    if not isinstance(raw, dict):
        raise ValidationError("instance document must be a mapping")
    players = raw.get("players")
    nodes = raw.get("nodes")
    edges = raw.get("edges")
    for key, val in (("players", players), ("nodes", nodes), ("edges", edges)):
        if not isinstance(val, list):
            problems.append(f"missing or non-list field '{key}'")
    if problems:
        raise ValidationError(problems)

    players = [str(p) for p in players]
    if len(set(players)) != len(players):
        problems.append("duplicate player ids")

    index = {}
    labels = []
    source = sink = None
    contract = {}
    owned = {p: [] for p in players}
    for i, nd in enumerate(nodes):
        nid = str(nd.get("id")) if isinstance(nd, dict) else None
        if nid is None or nid == "None":
            problems.append(f"node #{i}: missing id")
            continue
        if nid in index:
            problems.append(f"duplicate node id {nid!r}")
            continue
        index[nid] = len(labels)
        labels.append(nid)
        kind = nd.get("kind")
        if kind not in NODE_KINDS:
            problems.append(f"node {nid!r}: unknown kind {kind!r}")
        if nd.get("player") is not None and kind != "contract":
            problems.append(f"node {nid!r}: player attached to a {kind} node (contract on terminal?)")
        if kind == "source":
            if source is not None:
                problems.append("more than one source node")
            source = index[nid]
        elif kind == "sink":
            if sink is not None:
                problems.append("more than one sink node")
            sink = index[nid]
        elif kind == "contract":
            p = nd.get("player")
            if p is None:
                problems.append(f"contract node {nid!r} has no player")
            elif str(p) not in owned:
                problems.append(f"contract node {nid!r}: unknown player {p!r}")
            else:
                contract[index[nid]] = str(p)
                owned[str(p)].append(nid)
    if source is None:
        problems.append("no source node")
    if sink is None:
        problems.append("no sink node")
    for p, lst in owned.items():
        if len(lst) == 0:
            problems.append(f"player {p!r} owns no contract node")
        elif len(lst) > 1:
            problems.append(f"player {p!r} owns {len(lst)} contract nodes")

    pairs, lower, upper, profit, edge_ids = [], [], [], [], []
    seen_edges = set()
    for i, ed in enumerate(edges):
        if not isinstance(ed, dict):
            problems.append(f"edge #{i}: not a mapping")
            continue
        eid = str(ed.get("id", f"#{i}"))
        if eid in seen_edges:
            problems.append(f"duplicate edge id {eid!r}")
        seen_edges.add(eid)
        tail, head = str(ed.get("tail")), str(ed.get("head"))
        ok = True
        for end in (tail, head):
            if end not in index:
                problems.append(f"edge {eid!r}: unknown node {end!r}")
                ok = False
        if ok and tail == head:
            problems.append(f"edge {eid!r}: self-loop")
            ok = False
        u = ed.get("upper")
        u = None if u is None else _num(u, f"edge {eid!r} upper", problems)
        if u is not None and u < 0:
            problems.append(f"edge {eid!r}: negative capacity")
            ok = False
        lo = _num(ed.get("lower", 0), f"edge {eid!r} lower", problems)
        if lo is not None and lo != 0:
            problems.append(f"edge {eid!r}: lower bounds must be 0")
        c = _num(ed.get("profit", 0), f"edge {eid!r} profit", problems)
        if c is not None and c < 0:
            problems.append(f"edge {eid!r}: negative profit")
        if ok and c is not None:
            pairs.append((index[tail], index[head]))
            lower.append(0)
            upper.append(u)
            profit.append(c)
            edge_ids.append(eid)
    if source is not None and source == sink:
        problems.append("source and sink coincide")
    if problems:
        raise ValidationError(problems)

    net = BoundedNetwork(DirectedGraph(labels, pairs), lower, upper, source, sink)
    inst = ExchangeInstance(net, tuple(profit), contract, tuple(players), tuple(edge_ids))
    if check_trades:
        try:
            solve_exchange(inst)
        except TradeStructureError as exc:
            raise ValidationError(exc.problems) from exc
    return inst


def _ambiguous_nodes(inst: ExchangeInstance, flow: Flow) -> list:
    # Nodes where two or more flow-carrying edges enter and leave: the path
    # decomposition could pair them differently, changing the game.
    g = inst.network.graph
    ins = [0] * g.n
    outs = [0] * g.n
    for e, (a, b) in enumerate(g.edges):
        if flow.values[e] > 0:
            outs[a] += 1
            ins[b] += 1
    terminals = (inst.network.source, inst.network.sink)
    return [g.labels[v] for v in range(g.n) if v not in terminals and ins[v] >= 2 and outs[v] >= 2]


def solve_exchange(inst: ExchangeInstance) -> TradeSolution:
    net = inst.network
    flow = max_profit_flow(net, inst.profit)
    total = sum((c * f for c, f in zip(inst.profit, flow.values)), Fraction(0))
    trades = []
    problems = []
    for pf in decompose_paths(flow, net):
        nodes = [net.graph.head(e) for e in pf.path[:-1]]
        contracts = [v for v in nodes if v in inst.contract_nodes]
        if len(contracts) != 2:
            labels = "->".join(net.graph.labels[v] for v in [net.source] + nodes + [net.sink])
            problems.append(f"path {labels} passes {len(contracts)} contract nodes, expected 2")
            continue
        seller, buyer = (inst.contract_nodes[v] for v in contracts)
        unit = sum((inst.profit[e] for e in pf.path), Fraction(0))
        trades.append(Trade(seller, buyer, pf.path, pf.amount, pf.amount * unit))
    if problems:
        raise TradeStructureError(problems)
    warnings = tuple(
        f"path decomposition is not unique at node {label}" for label in _ambiguous_nodes(inst, flow)
    )
    sol = TradeSolution(inst, flow, total, tuple(trades), warnings)
    if sum((t.profit for t in trades), Fraction(0)) != total:
        raise TradeStructureError("trade profits do not add up to the total profit")
    return sol


def coalition_value(sol: TradeSolution, coalition) -> Fraction:
    members = set(coalition)
    unknown = members - set(sol.players)
    if unknown:
        raise UnknownPlayer(", ".join(sorted(map(str, unknown))))
    return sum(
        (t.profit for t in sol.trades if t.seller in members and t.buyer in members),
        Fraction(0),
    )


class CoalitionGame:
    """Characteristic function of a trade game.

    ``v(S)`` is the total profit of trades whose seller and buyer both belong
    to ``S``. Coalitions are addressed either by player collections or by
    bitmasks over ``players`` (bit ``i`` is ``players[i]``). The full table is
    built on first use and only for up to ``TABLE_LIMIT`` players.
    """

    def __init__(self, players, pair_values):
        self.players = tuple(players)
        self.index = {p: i for i, p in enumerate(self.players)}
        # bitmask of a player pair -> summed profit of their trades
        self.pair_values = dict(pair_values)
        self.denominator = common_denominator(self.pair_values.values())
        self._int_table = None

    @property
    def n(self) -> int:
        return len(self.players)

    def mask(self, coalition) -> int:
        out = 0
        for p in coalition:
            if p not in self.index:
                raise UnknownPlayer(p)
            out |= 1 << self.index[p]
        return out

    def members(self, mask: int) -> frozenset:
        return frozenset(p for i, p in enumerate(self.players) if mask >> i & 1)

    def value_mask(self, mask: int) -> Fraction:
        if self._int_table is not None:
            return Fraction(self._int_table[mask], self.denominator)
        return sum((v for pm, v in self.pair_values.items() if pm & mask == pm), Fraction(0))

    def value(self, coalition) -> Fraction:
        return self.value_mask(self.mask(coalition))

    __call__ = value

    def int_table(self) -> list:
        """``v`` over all bitmasks, scaled by ``self.denominator`` to integers."""
        if self._int_table is None:
            if self.n > TABLE_LIMIT:
                raise TooManyPlayers(f"{self.n} players exceed the table limit of {TABLE_LIMIT}")
            tab = [0] * (1 << self.n)
            for pm, v in self.pair_values.items():
                tab[pm] += int(v * self.denominator)
            # superset sums: v(S) = sum of pair values over pairs inside S
            for i in range(self.n):
                bit = 1 << i
                for m in range(len(tab)):
                    if m & bit:
                        tab[m] += tab[m ^ bit]
            self._int_table = tab
        return self._int_table

    @property
    def table(self) -> dict:
        d = self.denominator
        return {self.members(m): Fraction(v, d) for m, v in enumerate(self.int_table())}

    def grand_value(self) -> Fraction:
        return sum(self.pair_values.values(), Fraction(0))


def build_game(sol: TradeSolution, materialize: bool = True) -> CoalitionGame:
    pairs = {}
    index = {p: i for i, p in enumerate(sol.players)}
    for t in sol.trades:
        pm = (1 << index[t.seller]) | (1 << index[t.buyer])
        pairs[pm] = pairs.get(pm, Fraction(0)) + t.profit
    game = CoalitionGame(sol.players, pairs)
    if materialize:
        game.int_table()
    return game


def scale_profits(inst: ExchangeInstance, k) -> ExchangeInstance:
    k = Fraction(k)
    return ExchangeInstance(
        inst.network, tuple(c * k for c in inst.profit), dict(inst.contract_nodes), inst.players, inst.edge_ids
    )


def coalitions(players, nonempty=True):
    """All subsets of ``players`` as frozensets, smallest first."""
    start = 1 if nonempty else 0
    for r in range(start, len(players) + 1):
        for combo in itertools.combinations(players, r):
            yield frozenset(combo)


__all__ = [
    "ExchangeInstance",
    "Trade",
    "TradeSolution",
    "CoalitionGame",
    "validate_instance",
    "solve_exchange",
    "coalition_value",
    "build_game",
    "scale_profits",
    "coalitions",
]
