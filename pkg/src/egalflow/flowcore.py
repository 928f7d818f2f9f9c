"""Exact-rational network flow primitives.

Every public function takes and returns :class:`fractions.Fraction` values.
Internally each solve rescales the bounds it touches to integers by their
common denominator and runs on plain ``int`` lists, which keeps the
arithmetic exact and an order of magnitude faster than Fraction loops.

An upper bound of ``None`` means +infinity.

Residual arcs are encoded as ``2*e`` (forward along edge ``e``, capacity
``u - f``) and ``2*e + 1`` (backward, capacity ``f - l``). Adjacency lists
are ordered by edge id, so breadth-first search returns the same augmenting
path for the same input; passing ``rng`` shuffles them instead.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .errors import CyclicSupport, Infeasible, UnboundedFlow, UnboundedObjective
from .rational import common_denominator

INF = None


@dataclass(frozen=True)
class DirectedGraph:
    labels: tuple
    edges: tuple  # (tail, head) per edge id

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "edges", tuple((int(a), int(b)) for a, b in self.edges))
        n = len(self.labels)
        for e, (a, b) in enumerate(self.edges):
            if not (0 <= a < n and 0 <= b < n):
                raise ValueError(f"edge {e} references a missing node")
            if a == b:
                raise ValueError(f"edge {e} is a self-loop")

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def m(self) -> int:
        return len(self.edges)

    def tail(self, e: int) -> int:
        return self.edges[e][0]

    def head(self, e: int) -> int:
        return self.edges[e][1]

    def out_edges(self, v: int) -> list:
        return [e for e, (a, _) in enumerate(self.edges) if a == v]

    def in_edges(self, v: int) -> list:
        return [e for e, (_, b) in enumerate(self.edges) if b == v]

    def neighbors(self, v: int) -> set:
        out = set()
        for a, b in self.edges:
            if a == v:
                out.add(b)
            elif b == v:
                out.add(a)
        return out


@dataclass(frozen=True)
class BoundedNetwork:
    graph: DirectedGraph
    lower: tuple
    upper: tuple
    source: int
    sink: int

    def __post_init__(self):
        lower = tuple(Fraction(x) for x in self.lower)
        upper = tuple(None if x is None else Fraction(x) for x in self.upper)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        m = self.graph.m
        if len(lower) != m or len(upper) != m:
            raise ValueError("bounds must cover every edge")
        for e in range(m):
            if lower[e] < 0:
                raise ValueError(f"edge {e}: negative lower bound")
            if upper[e] is not None and upper[e] < lower[e]:
                raise ValueError(f"edge {e}: upper bound below lower bound")
        if self.source == self.sink:
            raise ValueError("source and sink coincide")
        if not (0 <= self.source < self.graph.n and 0 <= self.sink < self.graph.n):
            raise ValueError("terminal out of range")

    @classmethod
    def build(cls, n_nodes, edges, upper, lower=None, source=0, sink=1, labels=None):
        """Shorthand used mostly by tests: ``edges`` is a list of (tail, head)."""
        if labels is None:
            labels = [str(i) for i in range(n_nodes)]
        if lower is None:
            lower = [0] * len(edges)
        return cls(DirectedGraph(labels, edges), lower, upper, source, sink)

    def with_bounds(self, lower=None, upper=None) -> "BoundedNetwork":
        return BoundedNetwork(
            self.graph,
            self.lower if lower is None else lower,
            self.upper if upper is None else upper,
            self.source,
            self.sink,
        )


@dataclass(frozen=True)
class Flow:
    values: tuple
    value: Fraction

    def __getitem__(self, e: int) -> Fraction:
        return self.values[e]


@dataclass(frozen=True)
class PathFlow:
    path: tuple
    amount: Fraction


def flow_violations(flow: Flow, net: BoundedNetwork) -> list:
    """Bound and conservation violations of ``flow`` (empty when feasible)."""
    g = net.graph
    bad = []
    for e in range(g.m):
        f = flow.values[e]
        u = net.upper[e]
        if f < net.lower[e] or (u is not None and f > u):
            bad.append(f"edge {e}: {f} outside bounds")
    excess = [Fraction(0)] * g.n
    for e, (a, b) in enumerate(g.edges):
        excess[a] -= flow.values[e]
        excess[b] += flow.values[e]
    for v in range(g.n):
        if v not in (net.source, net.sink) and excess[v] != 0:
            bad.append(f"node {v}: conservation off by {excess[v]}")
    if excess[net.sink] != flow.value or -excess[net.source] != flow.value:
        bad.append("flow value does not match terminal balances")
    return bad


# --------------------------------------------------------------------------
# integer engine


@dataclass
class _IntNet:
    n: int
    tails: list
    heads: list
    low: list
    cap: list
    scale: int
    adj: list = field(default_factory=list)

    def arcs_from(self, rng=None):
        adj = [[] for _ in range(self.n)]
        for e in range(len(self.tails)):
            adj[self.tails[e]].append(2 * e)
            adj[self.heads[e]].append(2 * e + 1)
        if rng is not None:
            for lst in adj:
                rng.shuffle(lst)
        self.adj = adj
        return self


def _big(low, cap_finite, extra=0) -> int:
    return sum(c for c in cap_finite if c is not None) + sum(low) + abs(extra) + 1


def _to_int(net: BoundedNetwork, extra=(), scale=None) -> tuple:
    if scale is None:
        scale = common_denominator(list(net.lower) + list(net.upper) + list(extra))
    low = [int(x * scale) for x in net.lower]
    upper = [None if x is None else int(x * scale) for x in net.upper]
    return scale, low, upper


def _residual(net: _IntNet, flow: list, a: int) -> int:
    e = a >> 1
    if a & 1:
        return flow[e] - net.low[e]
    return net.cap[e] - flow[e]


def _other_end(net: _IntNet, a: int) -> int:
    e = a >> 1
    return net.tails[e] if a & 1 else net.heads[e]


def _bfs(net: _IntNet, flow: list, s: int, banned=frozenset()):
    """Parent-arc array of a BFS in the residual graph; -1 marks unreached."""
    parent = [-1] * net.n
    parent[s] = -2
    queue = deque([s])
    tails, heads, low, cap, adj = net.tails, net.heads, net.low, net.cap, net.adj
    while queue:
        v = queue.popleft()
        for a in adj[v]:
            e = a >> 1
            if e in banned:
                continue
            if a & 1:
                if flow[e] - low[e] <= 0:
                    continue
                w = tails[e]
            else:
                if cap[e] - flow[e] <= 0:
                    continue
                w = heads[e]
            if parent[w] == -1:
                parent[w] = a
                queue.append(w)
    return parent


def _augment(net: _IntNet, flow: list, s: int, t: int, limit=None, banned=frozenset()) -> int:
    """Edmonds-Karp from ``s`` to ``t``, mutating ``flow``; returns amount pushed."""
    total = 0
    while limit is None or total < limit:
        parent = _bfs(net, flow, s, banned)
        if parent[t] == -1:
            break
        path = []
        v = t
        while v != s:
            a = parent[v]
            path.append(a)
            v = _other_end(net, a ^ 1)
        delta = min(_residual(net, flow, a) for a in path)
        if limit is not None:
            delta = min(delta, limit - total)
        for a in path:
            if a & 1:
                flow[a >> 1] -= delta
            else:
                flow[a >> 1] += delta
        total += delta
    return total


def _infinite_path(net: BoundedNetwork, s: int, t: int) -> bool:
    g = net.graph
    seen = {s}
    stack = [s]
    while stack:
        v = stack.pop()
        if v == t:
            return True
        for e, (a, b) in enumerate(g.edges):
            if a == v and net.upper[e] is None and b not in seen:
                seen.add(b)
                stack.append(b)
    return False


def _bounded_solve(net: BoundedNetwork, required, rng=None, extra_scale=()):
    """Feasible flow honoring ``l <= f <= u`` with value ``required``.

    ``required=None`` asks only for some feasible flow (any value >= 0).
    Returns ``(scale, int_net, int_flow, value_int)``; raises Infeasible.
    """
    extras = list(extra_scale) + ([required] if required is not None else [])
    scale, low, upper = _to_int(net, extras)
    g = net.graph
    s, t = net.source, net.sink
    req = None if required is None else int(Fraction(required) * scale)
    big = _big(low, upper, req or 0)
    cap = [big if u is None else u for u in upper]
    # sink -> source return edge carries the flow value
    tails = [a for a, _ in g.edges] + [t]
    heads = [b for _, b in g.edges] + [s]
    low_r = low + [req if req is not None else 0]
    cap_r = cap + [req if req is not None else big]

    n = g.n
    excess = [0] * n
    for e in range(len(tails)):
        excess[heads[e]] += low_r[e]
        excess[tails[e]] -= low_r[e]
    ss, tt = n, n + 1
    rt = list(tails)
    rh = list(heads)
    rl = [0] * len(tails)
    rc = [cap_r[e] - low_r[e] for e in range(len(tails))]
    need = 0
    for v in range(n):
        if excess[v] > 0:
            rt.append(ss), rh.append(v), rl.append(0), rc.append(excess[v])
            need += excess[v]
        elif excess[v] < 0:
            rt.append(v), rh.append(tt), rl.append(0), rc.append(-excess[v])
    red = _IntNet(n + 2, rt, rh, rl, rc, scale).arcs_from(rng)
    rflow = [0] * len(rt)
    pushed = _augment(red, rflow, ss, tt)
    if pushed < need:
        parent = _bfs(red, rflow, ss)
        cut = frozenset(v for v in range(n) if parent[v] != -1)
        deficiency = Fraction(need - pushed, scale)
        raise Infeasible("bounds admit no feasible flow", cut=cut, deficiency=deficiency)
    m = g.m
    iflow = [low_r[e] + rflow[e] for e in range(m)]
    value = low_r[m] + rflow[m]
    inet = _IntNet(n, tails[:m], heads[:m], low, cap, scale)
    return scale, inet, iflow, value


def _to_flow(scale, iflow, value) -> Flow:
    return Flow(tuple(Fraction(x, scale) for x in iflow), Fraction(value, scale))


# --------------------------------------------------------------------------
# public operations


def max_flow(net: BoundedNetwork, rng: Optional[random.Random] = None) -> Flow:
    """Maximum source-sink flow on a network whose lower bounds are all zero.

    Augments along breadth-first shortest paths; adjacency is scanned in edge
    id order unless ``rng`` is given, in which case each call with a
    differently seeded ``rng`` may return a different maximum flow.
    """
    if any(x != 0 for x in net.lower):
        raise ValueError("max_flow needs zero lower bounds; use feasible_circulation")
    if _infinite_path(net, net.source, net.sink):
        raise UnboundedFlow("an all-infinite path joins source and sink")
    scale, low, upper = _to_int(net)
    big = _big(low, upper)
    cap = [big if u is None else u for u in upper]
    g = net.graph
    inet = _IntNet(g.n, [a for a, _ in g.edges], [b for _, b in g.edges], low, cap, scale)
    inet.arcs_from(rng)
    flow = [0] * g.m
    value = _augment(inet, flow, net.source, net.sink)
    return _to_flow(scale, flow, value)


def feasible_circulation(net: BoundedNetwork, required_value="maximize", rng=None) -> Flow:
    """A flow with ``l <= f <= u`` and the given value, or the largest value.

    Raises :class:`Infeasible` carrying a violated cut. The certificate treats
    the value as an extra sink-to-source edge with bounds ``[v, v]`` (or
    ``[0, inf)`` when maximizing).
    """
    maximize = isinstance(required_value, str)
    if maximize and required_value != "maximize":
        raise ValueError(f"unknown mode {required_value!r}")
    if maximize:
        if _infinite_path(net, net.source, net.sink):
            raise UnboundedFlow("an all-infinite path joins source and sink")
        scale, inet, iflow, value = _bounded_solve(net, None, rng)
        inet.arcs_from(rng)
        value += _augment(inet, iflow, net.source, net.sink)
        return _to_flow(scale, iflow, value)
    scale, inet, iflow, value = _bounded_solve(net, Fraction(required_value), rng)
    return _to_flow(scale, iflow, value)


def residual_reach_set(flow: Flow, net: BoundedNetwork, start: int) -> set:
    """Nodes reachable from ``start`` along arcs with positive residual capacity."""
    g = net.graph
    adj = [[] for _ in range(g.n)]
    for e, (a, b) in enumerate(g.edges):
        u = net.upper[e]
        if u is None or flow.values[e] < u:
            adj[a].append(b)
        if flow.values[e] > net.lower[e]:
            adj[b].append(a)
    seen = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return seen


def residual_reachable(flow: Flow, net: BoundedNetwork, frm: int, to: int) -> bool:
    return to in residual_reach_set(flow, net, frm)


def max_edge_objective(net: BoundedNetwork, target_edge: int, required_value, start: Flow = None, rng=None) -> Fraction:
    """Largest flow on ``target_edge`` over feasible flows of exactly ``required_value``.

    Begins at ``start`` (or any feasible flow) and pushes flow around residual
    cycles closing through the target edge until none is left.
    """
    return max_edge_flow(net, target_edge, required_value, start, rng).values[target_edge]


def max_edge_flow(net: BoundedNetwork, target_edge: int, required_value, start: Flow = None, rng=None) -> Flow:
    required_value = Fraction(required_value)
    if start is None:
        scale, inet, iflow, value = _bounded_solve(net, required_value, rng)
    else:
        if start.value != required_value or flow_violations(start, net):
            raise ValueError("start flow is not feasible at the required value")
        scale, low, upper = _to_int(net, list(start.values) + [required_value])
        big = _big(low, upper, int(required_value * scale))
        cap = [big if u is None else u for u in upper]
        g = net.graph
        inet = _IntNet(g.n, [a for a, _ in g.edges], [b for _, b in g.edges], low, cap, scale)
        iflow = [int(x * scale) for x in start.values]
        value = int(required_value * scale)
    inet.arcs_from(rng)
    e = target_edge
    pushed = _augment(
        inet, iflow, inet.heads[e], inet.tails[e], limit=inet.cap[e] - iflow[e], banned=frozenset([e])
    )
    iflow[e] += pushed
    if net.upper[e] is None and iflow[e] >= inet.cap[e]:
        raise UnboundedObjective(f"edge {e} lies on an uncapacitated residual cycle")
    return _to_flow(scale, iflow, value)


def _bellman_ford_cycle(inet, flow, profit):
    """A residual cycle of positive total profit, as a list of arcs, or None."""
    n = inet.n
    arcs = []
    for e in range(len(inet.tails)):
        arcs.append(2 * e)
        arcs.append(2 * e + 1)
    dist = [0] * n
    pred = [-1] * n
    last = -1
    for _ in range(n):
        last = -1
        for a in arcs:
            if _residual(inet, flow, a) <= 0:
                continue
            e = a >> 1
            if a & 1:
                u, v, w = inet.heads[e], inet.tails[e], -profit[e]
            else:
                u, v, w = inet.tails[e], inet.heads[e], profit[e]
            if dist[u] + w > dist[v]:
                dist[v] = dist[u] + w
                pred[v] = a
                last = v
        if last == -1:
            return None, dist
    v = last
    for _ in range(n):
        v = _other_end(inet, pred[v] ^ 1)
    cycle = []
    x = v
    while True:
        a = pred[x]
        cycle.append(a)
        x = _other_end(inet, a ^ 1)
        if x == v:
            break
    cycle.reverse()
    return cycle, dist


def _lex_positive_path(inet, flow, profit, s, t, budget):
    """Lexicographically first simple residual s-t path with positive profit."""
    path = []
    on_path = {s}
    iters = [0]
    gain = [0]
    v = s
    steps = 0
    while True:
        if steps > budget:
            return None, True
        adj = inet.adj[v]
        i = iters[-1]
        advanced = False
        while i < len(adj):
            a = adj[i]
            i += 1
            if _residual(inet, flow, a) <= 0:
                continue
            w = _other_end(inet, a)
            if w in on_path:
                continue
            e = a >> 1
            g = gain[-1] + (-profit[e] if a & 1 else profit[e])
            steps += 1
            if w == t:
                if g > 0:
                    return path + [a], False
                continue
            iters[-1] = i
            path.append(a)
            on_path.add(w)
            iters.append(0)
            gain.append(g)
            v = w
            advanced = True
            break
        if advanced:
            continue
        if not path:
            return None, False
        a = path.pop()
        iters.pop()
        gain.pop()
        on_path.discard(v)
        v = _other_end(inet, a ^ 1)


_DFS_BUDGET = 50_000


def max_profit_flow(net: BoundedNetwork, profit: Sequence, rng=None) -> Flow:
    """Feasible flow maximizing ``sum(profit[e] * f[e])`` (any flow value).

    Ties are broken deterministically: first augment along the
    lexicographically smallest positive-profit source-sink path (edge id
    order) while one exists, then cancel any remaining positive-profit
    residual cycles, then strip zero-profit cycles from the flow support.
    """
    profit = [Fraction(c) for c in profit]
    g = net.graph
    m = g.m
    if len(profit) != m:
        raise ValueError("profit must cover every edge")
    if any(c < 0 for c in profit):
        raise ValueError("profits must be non-negative")
    pscale = common_denominator(profit)
    iprofit = [int(c * pscale) for c in profit] + [0]
    s, t = net.source, net.sink

    if any(x != 0 for x in net.lower):
        scale, inet0, iflow, value = _bounded_solve(net, None, rng)
        low, cap = inet0.low, inet0.cap
    else:
        scale, low, upper = _to_int(net)
        big = _big(low, upper)
        cap = [big if u is None else u for u in upper]
        iflow, value = [0] * m, 0
    big = _big(low, [None if net.upper[e] is None else cap[e] for e in range(m)])
    cap = [big if net.upper[e] is None else cap[e] for e in range(m)]
    inf_edge = [net.upper[e] is None for e in range(m)] + [True]

    # original edges plus the sink -> source return edge (index m)
    tails = [a for a, _ in g.edges] + [t]
    heads = [b for _, b in g.edges] + [s]
    inet = _IntNet(g.n, tails, heads, low + [0], cap + [big], scale).arcs_from(rng)
    flow = iflow + [value]

    def push(arcs, delta):
        for a in arcs:
            flow[a >> 1] += -delta if a & 1 else delta

    def all_infinite(arcs):
        return all((a & 1) == 0 and inf_edge[a >> 1] for a in arcs)

    inet_paths = _IntNet(g.n, tails, heads, inet.low, inet.cap, scale)
    inet_paths.adj = [[a for a in lst if (a >> 1) != m] for lst in inet.adj]
    while True:
        path, exhausted = _lex_positive_path(inet_paths, flow, iprofit, s, t, _DFS_BUDGET)
        if path is None:
            break
        if all_infinite(path):
            raise UnboundedObjective("positive-profit path of unbounded capacity")
        delta = min(_residual(inet, flow, a) for a in path)
        push(path + [2 * m], delta)

    while True:
        cycle, dist = _bellman_ford_cycle(inet, flow, iprofit)
        if cycle is None:
            break
        if all_infinite(cycle):
            raise UnboundedObjective("positive-profit cycle of unbounded capacity")
        delta = min(_residual(inet, flow, a) for a in cycle)
        push(cycle, delta)

    # zero-profit support cycles: with optimal potentials, these are exactly
    # the cycles among support edges of zero reduced profit
    tight = [
        e
        for e in range(m)
        if flow[e] > low[e] and iprofit[e] + dist[tails[e]] - dist[heads[e]] == 0
    ]
    _cancel_support_cycles(g.n, tails, heads, low, flow, tight)

    if any(flow[e] >= big and inf_edge[e] for e in range(m + 1)):
        raise UnboundedObjective("optimal flow is unbounded")
    return _to_flow(scale, flow[:m], flow[m])


def _cancel_support_cycles(n, tails, heads, low, flow, edges):
    edges = sorted(edges)
    while True:
        live = [e for e in edges if flow[e] > low[e]]
        out = [[] for _ in range(n)]
        for e in live:
            out[tails[e]].append(e)
        cycle = _find_cycle(n, heads, out)
        if cycle is None:
            return
        delta = min(flow[e] - low[e] for e in cycle)
        for e in cycle:
            flow[e] -= delta


def _find_cycle(n, heads, out):
    """Edge list of some directed cycle in the graph given by ``out``, or None."""
    color = [0] * n
    for root in range(n):
        if color[root]:
            continue
        nodes = [root]
        idx = [0]
        via = []
        color[root] = 1
        while nodes:
            v = nodes[-1]
            if idx[-1] < len(out[v]):
                e = out[v][idx[-1]]
                idx[-1] += 1
                w = heads[e]
                if color[w] == 1:
                    return via[nodes.index(w):] + [e]
                if color[w] == 0:
                    color[w] = 1
                    nodes.append(w)
                    idx.append(0)
                    via.append(e)
            else:
                color[v] = 2
                nodes.pop()
                idx.pop()
                if via:
                    via.pop()
    return None


def decompose_paths(flow: Flow, net: BoundedNetwork) -> list:
    """Split an acyclic flow into source-sink paths.

    Each walk starts at the source and always leaves a node by the lowest-id
    edge that still carries flow; the path amount is the smallest remaining
    flow along it.
    """
    g = net.graph
    rem = list(flow.values)
    out = [[] for _ in range(g.n)]
    for e, (a, _) in enumerate(g.edges):
        out[a].append(e)
    s, t = net.source, net.sink
    paths = []
    while True:
        first = next((e for e in out[s] if rem[e] > 0), None)
        if first is None:
            break
        path = []
        seen = {s}
        v = s
        while v != t:
            e = next((e for e in out[v] if rem[e] > 0), None)
            if e is None:
                raise ValueError(f"flow is not conserved at node {v}")
            path.append(e)
            v = g.head(e)
            if v in seen:
                raise CyclicSupport(f"flow support has a directed cycle through node {v}")
            seen.add(v)
        amount = min(rem[e] for e in path)
        for e in path:
            rem[e] -= amount
        paths.append(PathFlow(tuple(path), amount))
    if any(r != 0 for r in rem):
        raise CyclicSupport("flow left over after removing all source-sink paths")
    return paths
