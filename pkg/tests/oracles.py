"""Independent reference computations used by the tests.

Nothing here calls the flow solvers under test: cuts are enumerated, integer
flows are enumerated, and core quantities come from a floating-point LP over
the coalition inequalities (no flows involved).
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

import numpy as np
from scipy.optimize import linprog

from egalflow.flowcore import BoundedNetwork, max_edge_flow, max_flow


def brute_min_cut(net: BoundedNetwork):
    g = net.graph
    others = [v for v in range(g.n) if v not in (net.source, net.sink)]
    best = None
    for r in range(len(others) + 1):
        for combo in itertools.combinations(others, r):
            side = set(combo) | {net.source}
            cap = Fraction(0)
            for e, (a, b) in enumerate(g.edges):
                if a in side and b not in side:
                    if net.upper[e] is None:
                        cap = None
                        break
                    cap += net.upper[e]
            if cap is not None and (best is None or cap < best):
                best = cap
    return best


def brute_max_profit(net: BoundedNetwork, profit):
    """Max of sum(profit * f) over integer flows (integer capacities only)."""
    g = net.graph
    ranges = [range(int(net.lower[e]), int(net.upper[e]) + 1) for e in range(g.m)]
    best = None
    for f in itertools.product(*ranges):
        bal = [0] * g.n
        for e, (a, b) in enumerate(g.edges):
            bal[a] -= f[e]
            bal[b] += f[e]
        if any(bal[v] for v in range(g.n) if v not in (net.source, net.sink)):
            continue
        obj = sum(Fraction(c) * x for c, x in zip(profit, f))
        if best is None or obj > best:
            best = obj
    return best


def random_network(rng: random.Random, n_nodes, n_edges, max_cap=5, lower=False, dag=False):
    edges, upper, low = [], [], []
    rank = {0: -1, 1: n_nodes}
    while len(edges) < n_edges:
        a, b = rng.randrange(n_nodes), rng.randrange(n_nodes)
        if a == b or b == 0 or a == 1:
            continue
        if dag and rank.get(a, a) > rank.get(b, b):
            continue
        edges.append((a, b))
        u = rng.randint(0, max_cap)
        upper.append(u)
        low.append(rng.randint(0, u) if lower and rng.random() < 0.3 else 0)
    return BoundedNetwork.build(n_nodes, edges, upper, low)


def lp_feasible(net: BoundedNetwork, value) -> bool:
    g = net.graph
    A = np.zeros((g.n, g.m))
    for e, (a, b) in enumerate(g.edges):
        A[a, e] -= 1
        A[b, e] += 1
    rhs = np.zeros(g.n)
    rhs[net.source] = -float(value)
    rhs[net.sink] = float(value)
    bounds = [(float(net.lower[e]), None if net.upper[e] is None else float(net.upper[e])) for e in range(g.m)]
    res = linprog(np.zeros(g.m), A_eq=A, b_eq=rhs, bounds=bounds, method="highs")
    return res.status == 0


def _core_rows(game):
    n = game.n
    rows, rhs = [], []
    for mask in range(1, 1 << n):
        rows.append([-1.0 if mask >> i & 1 else 0.0 for i in range(n)])
        rhs.append(-float(game.value_mask(mask)))
    return rows, rhs


def lp_max_floor(game, free_players, pinned: dict) -> float:
    """max lam s.t. p in core, p_i >= lam for free players, pinned players fixed."""
    n = game.n
    rows, rhs = _core_rows(game)
    rows = [r + [0.0] for r in rows]
    for p in free_players:
        r = [0.0] * (n + 1)
        r[game.index[p]] = -1.0
        r[n] = 1.0
        rows.append(r)
        rhs.append(0.0)
    A_eq = [[1.0] * n + [0.0]]
    b_eq = [float(game.grand_value())]
    for p, v in pinned.items():
        r = [0.0] * (n + 1)
        r[game.index[p]] = 1.0
        A_eq.append(r)
        b_eq.append(float(v))
    c = [0.0] * n + [-1.0]
    res = linprog(c, A_ub=rows, b_ub=rhs, A_eq=A_eq, b_eq=b_eq, bounds=[(None, None)] * (n + 1), method="highs")
    assert res.status == 0, res.message
    return -res.fun


def lp_min_spread(game) -> float:
    """min (hi - lo) s.t. p in core and lo <= p_i <= hi."""
    n = game.n
    rows, rhs = _core_rows(game)
    rows = [r + [0.0, 0.0] for r in rows]
    for i in range(n):
        r = [0.0] * (n + 2)
        r[i], r[n] = -1.0, 1.0  # lo - p_i <= 0
        rows.append(r)
        rhs.append(0.0)
        r = [0.0] * (n + 2)
        r[i], r[n + 1] = 1.0, -1.0  # p_i - hi <= 0
        rows.append(r)
        rhs.append(0.0)
    c = [0.0] * n + [-1.0, 1.0]
    res = linprog(
        c,
        A_ub=rows,
        b_ub=rhs,
        A_eq=[[1.0] * n + [0.0, 0.0]],
        b_eq=[float(game.grand_value())],
        bounds=[(None, None)] * (n + 2),
        method="highs",
    )
    assert res.status == 0, res.message
    return res.fun


def marginal_vectors(game):
    """Marginal contribution vectors for every player order (core vertices of a convex game)."""
    out = []
    for order in itertools.permutations(range(game.n)):
        mask = 0
        vec = {}
        for i in order:
            before = game.value_mask(mask)
            mask |= 1 << i
            vec[game.players[i]] = game.value_mask(mask) - before
        out.append(vec)
    return out


def distinct_max_flows(psg, count, seed=0):
    """At least ``count`` pairwise different maximum flows of a profit-sharing graph.

    Vertex flows come from randomized augmenting orders and from pushing each
    payment edge to its maximum; the rest are random rational convex
    combinations of those.
    """
    rng = random.Random(seed)
    net = psg.network
    found = {}
    for k in range(count):
        f = max_flow(net, rng=random.Random(seed * 1000 + k))
        found.setdefault(f.values, f)
    base = max_flow(net)
    for e in psg.payment_edge_list:
        f = max_edge_flow(net, e, psg.total_profit, start=base)
        found.setdefault(f.values, f)
    vertices = list(found.values())
    flows = list(vertices)
    attempts = 0
    while len(found) < count and len(vertices) >= 2:
        attempts += 1
        a, b = rng.sample(vertices, 2)
        w = Fraction(rng.randint(1, 99), 100)
        vals = tuple(w * x + (1 - w) * y for x, y in zip(a.values, b.values))
        if vals not in found:
            f = type(a)(vals, a.value)
            found[vals] = f
            flows.append(f)
        assert attempts < 100 * count
    return list(found.values())[: max(count, len(found))]
