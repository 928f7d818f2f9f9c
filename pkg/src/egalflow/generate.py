"""Seeded random exchange instances.

Players are split into sellers and buyers, so every trade path is
``s -> seller -> buyer -> t`` and the optimal flow decomposes the same way
whatever the tie-breaking. A seller may trade with several buyers (star
shapes) and a pair may trade more than once over parallel edges.
"""

from __future__ import annotations

import random

DEFAULTS = {"players": 6, "trades": 8, "max_capacity": 10, "max_profit": 5}


def random_document(seed=0, players=6, trades=8, max_capacity=10, max_profit=5) -> dict:
    if players < 2:
        raise ValueError("need at least two players")
    if trades < 1 or max_capacity < 1 or max_profit < 1:
        raise ValueError("trades, max_capacity and max_profit must be positive")
    rng = random.Random(seed)
    ids = [f"P{i + 1}" for i in range(players)]
    order = ids[:]
    rng.shuffle(order)
    sellers = [order[0]]
    buyers = [order[1]]
    for p in order[2:]:
        (sellers if rng.random() < 0.5 else buyers).append(p)
    sellers.sort(key=ids.index)
    buyers.sort(key=ids.index)

    deals = []
    for _ in range(trades):
        deals.append(
            (
                rng.choice(sellers),
                rng.choice(buyers),
                rng.randint(1, max_capacity),
                rng.randint(1, max_profit),
            )
        )
    supply = {p: 0 for p in sellers}
    demand = {p: 0 for p in buyers}
    for s, b, cap, _ in deals:
        supply[s] += cap
        demand[b] += cap

    nodes = [{"id": "s", "kind": "source"}, {"id": "t", "kind": "sink"}]
    nodes += [{"id": p, "kind": "contract", "player": p} for p in ids]
    edges = []
    for p in sellers:
        if supply[p]:
            edges.append({"id": f"in_{p}", "tail": "s", "head": p, "upper": supply[p], "profit": 0})
    for k, (s, b, cap, c) in enumerate(deals):
        edges.append({"id": f"trade{k}", "tail": s, "head": b, "upper": cap, "profit": c})
    for p in buyers:
        if demand[p]:
            edges.append({"id": f"out_{p}", "tail": p, "head": "t", "upper": demand[p], "profit": 0})
    return {"name": f"random-{seed}", "players": ids, "nodes": nodes, "edges": edges}


def corpus_params(seed: int, max_players=8, max_trades=12) -> dict:
    """Size parameters for the seeded test corpus (2..max_players players)."""
    return {
        "players": 2 + seed % (max_players - 1),
        "trades": 1 + (seed // 7) % max_trades,
        "max_capacity": 10,
        "max_profit": 5,
    }


def corpus_document(seed: int, max_players=8, max_trades=12) -> dict:
    return random_document(seed, **corpus_params(seed, max_players, max_trades))
