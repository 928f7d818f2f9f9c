"""Equal and almost-equal maximum flows on a profit-sharing graph.

All searches here are parametric in one or two rationals (a common lower
bound ``lam``, or a window ``[L, L + delta]``) and are driven by the cut
certificates that :func:`feasible_circulation` raises. An infeasible cut ``X``
gives a deficiency that is affine in the parameters, and its root is the
next trial point. A plain bisection followed by :func:`rational_recover` is
kept alongside as the reference path; the two must agree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .errors import Infeasible, InfeasiblePinned, InvariantViolation
from .flowcore import BoundedNetwork, Flow, feasible_circulation
from .rational import common_denominator, rational_recover
from .sharing import SIGMA, TAU, ProfitSharingGraph


@dataclass(frozen=True)
class HomologousSet:
    edges: frozenset
    deviation: Optional[Fraction] = Fraction(0)  # None: unbounded

    def __post_init__(self):
        object.__setattr__(self, "edges", frozenset(self.edges))
        if not self.edges:
            raise ValueError("homologous set must be nonempty")
        if self.deviation is not None:
            object.__setattr__(self, "deviation", Fraction(self.deviation))
            if self.deviation < 0:
                raise ValueError("deviation must be non-negative")


@dataclass(frozen=True)
class PinnedState:
    pinned: dict = field(default_factory=dict)  # payment edge -> fixed value
    free: frozenset = frozenset()

    @classmethod
    def initial(cls, psg: ProfitSharingGraph) -> "PinnedState":
        return cls({}, frozenset(psg.payment_edges.values()))

    def pin(self, edges, value) -> "PinnedState":
        edges = set(edges)
        if not edges <= self.free:
            raise ValueError("can only pin free edges")
        pinned = dict(self.pinned)
        for e in edges:
            pinned[e] = Fraction(value)
        return PinnedState(pinned, self.free - edges)


def _cut_sides(psg: ProfitSharingGraph, cut):
    """Edges entering and leaving ``cut``, the sink-to-source value edge included as -1."""
    g = psg.network.graph
    entering, leaving = [], []
    for e, (a, b) in enumerate(g.edges):
        if a not in cut and b in cut:
            entering.append(e)
        elif a in cut and b not in cut:
            leaving.append(e)
    if TAU not in cut and SIGMA in cut:
        entering.append(-1)
    elif TAU in cut and SIGMA not in cut:
        leaving.append(-1)
    return entering, leaving


# --------------------------------------------------------------------------
# common lower bound on the free payment edges


def _lambda_network(psg, state, lam) -> BoundedNetwork:
    net = psg.network
    lower = list(net.lower)
    upper = list(net.upper)
    for e, v in state.pinned.items():
        lower[e] = upper[e] = v
    for e in state.free:
        lower[e] = max(Fraction(0), lam)
    return net.with_bounds(lower, upper)


def _lambda_cut_line(psg, state, cut):
    """``(a, b)`` with deficiency ``a * lam + b`` for the cut ``X``."""
    net = psg.network
    entering, leaving = _cut_sides(psg, cut)
    a = 0
    b = Fraction(0)
    for e in entering:
        if e == -1:
            b += psg.total_profit
        elif e in state.free:
            a += 1
        elif e in state.pinned:
            b += state.pinned[e]
        else:
            b += net.lower[e]
    for e in leaving:
        if e == -1:
            b -= psg.total_profit
        elif e in state.free:
            return None  # uncapacitated: this cut never binds
        elif e in state.pinned:
            b -= state.pinned[e]
        elif net.upper[e] is None:
            return None
        else:
            b -= net.upper[e]
    return a, b


def lambda_den_bound(psg: ProfitSharingGraph, state: PinnedState) -> int:
    """Every breakpoint of the lower-bound search has a denominator below this."""
    net = psg.network
    d = common_denominator(list(net.upper) + list(state.pinned.values()) + [psg.total_profit])
    return d * max(1, len(state.free))


def lambda_feasible(psg, state, lam, rng=None) -> Flow:
    """Witness flow of value C with free edges >= lam and pinned edges fixed."""
    return feasible_circulation(_lambda_network(psg, state, lam), psg.total_profit, rng=rng)


def max_common_lower_bound(psg: ProfitSharingGraph, state: PinnedState, method="newton", rng=None):
    """Largest ``lam`` such that a flow of value C keeps every free payment edge at >= lam.

    Returns ``(lam, witness)``. ``method`` is ``"newton"`` (cut-certificate
    steps from above) or ``"bisect"`` (bisection plus rational recovery).
    """
    if not state.free:
        raise ValueError("no free edges")
    c = psg.total_profit
    hi = (c - sum(state.pinned.values(), Fraction(0))) / len(state.free)
    if method == "newton":
        return _lambda_newton(psg, state, hi, rng)
    if method == "bisect":
        return _lambda_bisect(psg, state, hi, rng)
    raise ValueError(f"unknown method {method!r}")


def _lambda_newton(psg, state, lam, rng):
    while True:
        try:
            return lam, lambda_feasible(psg, state, lam, rng)
        except Infeasible as exc:
            line = _lambda_cut_line(psg, state, exc.cut)
            if line is None:
                raise InvariantViolation("certificate cut has an uncapacitated leaving edge") from exc
            a, b = line
            if a == 0:
                raise InfeasiblePinned("pinned values admit no flow of full value") from exc
            nxt = -b / a
            if nxt >= lam:
                raise InvariantViolation(f"lower-bound search stalled at {lam}") from exc
            if nxt < 0:
                raise InfeasiblePinned("pinned values admit no flow of full value") from exc
            lam = nxt


def _lambda_bisect(psg, state, hi, rng):
    try:
        witness = lambda_feasible(psg, state, hi, rng)
        return hi, witness
    except Infeasible:
        pass
    lo = Fraction(0)
    try:
        lambda_feasible(psg, state, lo, rng)
    except Infeasible as exc:
        raise InfeasiblePinned("pinned values admit no flow of full value") from exc
    den = lambda_den_bound(psg, state)
    eps = Fraction(1, den * den)
    while hi - lo >= eps:
        mid = (lo + hi) / 2
        try:
            lambda_feasible(psg, state, mid, rng)
            lo = mid
        except Infeasible:
            hi = mid
    lam = rational_recover(lo, hi, den)
    return lam, lambda_feasible(psg, state, lam, rng)


# --------------------------------------------------------------------------
# homologous windows


def check_aemf_feasible(net: BoundedNetwork, sets, anchors, required_value, rng=None) -> Flow:
    """Flow of ``required_value`` with ``f_e`` in ``[L_i, L_i + delta_i]`` for ``e`` in ``R_i``."""
    sets = list(sets)
    anchors = [Fraction(x) for x in anchors]
    if len(sets) != len(anchors):
        raise ValueError("one anchor per homologous set")
    lower = list(net.lower)
    upper = list(net.upper)
    for hs, anchor in zip(sets, anchors):
        for e in hs.edges:
            lower[e] = max(lower[e], anchor)
            if hs.deviation is not None:
                top = anchor + hs.deviation
                upper[e] = top if upper[e] is None else min(upper[e], top)
            if upper[e] is not None and upper[e] < lower[e]:
                raise Infeasible(f"edge {e}: window misses its capacity interval")
    return feasible_circulation(net.with_bounds(lower, upper), Fraction(required_value), rng=rng)


def _window_network(psg, H, anchor, delta) -> BoundedNetwork:
    net = psg.network
    lower = list(net.lower)
    upper = list(net.upper)
    for e in H:
        lower[e] = anchor
        upper[e] = anchor + delta
    return net.with_bounds(lower, upper)


def deviation_feasible(psg, H, anchor, delta, rng=None) -> Flow:
    """Flow of value C with every payment edge of ``H`` inside ``[anchor, anchor + delta]``."""
    anchor, delta = Fraction(anchor), Fraction(delta)
    if anchor < 0 or delta < 0:
        raise Infeasible("negative window")
    return feasible_circulation(_window_network(psg, H, anchor, delta), psg.total_profit, rng=rng)


def _window_cut(psg, H, cut):
    """``(alpha, beta, gamma)`` with deficiency ``alpha*L + beta*delta + gamma``."""
    net = psg.network
    entering, leaving = _cut_sides(psg, cut)
    alpha = beta = 0
    gamma = Fraction(0)
    for e in entering:
        if e == -1:
            gamma += psg.total_profit
        elif e in H:
            alpha += 1
        else:
            gamma += net.lower[e]
    for e in leaving:
        if e == -1:
            gamma -= psg.total_profit
        elif e in H:
            alpha -= 1
            beta -= 1
        elif net.upper[e] is None:
            return None
        else:
            gamma -= net.upper[e]
    return alpha, beta, gamma


def deviation_den_bound(psg: ProfitSharingGraph, H) -> int:
    # two cut lines meet at a point whose coordinates have denominators
    # dividing D * det, |det| <= 2 * |H|**2 (Hadamard on the 2x2 system)
    net = psg.network
    d = common_denominator(list(net.upper) + [psg.total_profit])
    return d * 2 * max(1, len(H)) ** 2


def _payment_set(psg, H):
    if H is None:
        return frozenset(psg.payment_edges.values())
    H = frozenset(H)
    if not H <= set(psg.payment_edges.values()):
        raise ValueError("H must consist of payment edges")
    return H


def _anchor_for(psg, H, delta, rng=None):
    """Some feasible window anchor for fixed ``delta``, as ``(L, flow)``, or None.

    Each infeasible anchor yields a cut whose sign of ``alpha`` says whether
    the anchor is too high or too low; the anchor jumps to that cut's root and
    the bracket shrinks until a flow appears or the bracket empties.
    """
    lo = Fraction(0)
    hi = psg.total_profit / len(H)
    anchor = lo
    while True:
        try:
            return anchor, deviation_feasible(psg, H, anchor, delta, rng)
        except Infeasible as exc:
            form = _window_cut(psg, H, exc.cut)
            if form is None:
                raise InvariantViolation("certificate cut has an uncapacitated leaving edge") from exc
            alpha, beta, gamma = form
            if alpha == 0:
                return None
            root = -(beta * delta + gamma) / alpha
            if alpha > 0:
                hi = min(hi, root)
            else:
                lo = max(lo, root)
            if lo > hi:
                return None
            anchor = hi if alpha > 0 else lo


def _lp_min_delta(cuts, cap):
    """Exact 2-variable LP: min (delta, L) s.t. every cut, 0 <= L <= cap, delta >= 0."""
    uppers = [(Fraction(0), cap)]  # L <= slope*delta + icpt
    lowers = [(Fraction(0), Fraction(0))]  # L >= slope*delta + icpt
    d0 = Fraction(0)
    for alpha, beta, gamma in cuts:
        if alpha > 0:
            uppers.append((Fraction(-beta, alpha), -gamma / alpha))
        elif alpha < 0:
            lowers.append((Fraction(beta, -alpha), gamma / -alpha))
        elif beta < 0:
            d0 = max(d0, gamma / -beta)
        elif gamma > 0:
            raise InvariantViolation("cut infeasible for every window")

    def active(lines, delta, pick):
        vals = [s * delta + i for s, i in lines]
        best = pick(vals)
        return best, lines[vals.index(best)]

    delta = d0
    while True:
        top, (su, iu) = active(uppers, delta, min)
        bot, (sl, il) = active(lowers, delta, max)
        if bot <= top:
            return delta, bot
        slope = su - sl
        if slope <= 0:
            raise InvariantViolation("window constraints infeasible for every deviation")
        delta = (il - iu) / slope


def min_deviation(psg: ProfitSharingGraph, H=None, method="cutting-plane", rng=None):
    """Smallest ``delta`` admitting a flow of value C with all ``H`` payments in one window.

    Returns ``(delta, witness)``. ``"cutting-plane"`` alternates an exact
    two-variable LP over the cuts collected so far with a flow check that
    either confirms the LP point or supplies a new violated cut.
    ``"bisect"`` bisects on ``delta`` and recovers the exact value.
    """
    H = _payment_set(psg, H)
    if method == "cutting-plane":
        cuts = []
        cap = psg.total_profit / len(H)
        delta, anchor = Fraction(0), Fraction(0)
        while True:
            try:
                return delta, deviation_feasible(psg, H, anchor, delta, rng)
            except Infeasible as exc:
                form = _window_cut(psg, H, exc.cut)
                if form is None or form in cuts:
                    raise InvariantViolation("cutting plane made no progress") from exc
                cuts.append(form)
                delta, anchor = _lp_min_delta(cuts, cap)
    if method == "bisect":
        return _deviation_bisect(psg, H, rng)
    raise ValueError(f"unknown method {method!r}")


def deviation_decide(psg, H, delta, rng=None):
    """``(L, flow)`` when some window of width ``delta`` is feasible, else None."""
    return _anchor_for(psg, _payment_set(psg, H), Fraction(delta), rng)


def _deviation_bisect(psg, H, rng):
    found = _anchor_for(psg, H, Fraction(0), rng)
    if found is not None:
        return Fraction(0), found[1]
    lo, hi = Fraction(0), psg.total_profit
    den = deviation_den_bound(psg, H)
    eps = Fraction(1, den * den)
    while hi - lo >= eps:
        mid = (lo + hi) / 2
        if _anchor_for(psg, H, mid, rng) is None:
            lo = mid
        else:
            hi = mid
    delta = rational_recover(lo, hi, den)
    found = _anchor_for(psg, H, delta, rng)
    if found is None:
        raise InvariantViolation(f"recovered deviation {delta} is not feasible")
    return delta, found[1]


def witness_spread(psg, flow: Flow, H=None) -> Fraction:
    vals = [flow.values[e] for e in _payment_set(psg, H)]
    return max(vals) - min(vals)


__all__ = [
    "HomologousSet",
    "PinnedState",
    "max_common_lower_bound",
    "lambda_feasible",
    "lambda_den_bound",
    "check_aemf_feasible",
    "deviation_feasible",
    "deviation_decide",
    "deviation_den_bound",
    "min_deviation",
    "witness_spread",
]
