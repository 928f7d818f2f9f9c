"""Profit sharing for combinatorial-exchange flow games.

Build the profit-sharing graph of a solved exchange, read core payments off
its maximum flows, and compute the egalitarian allocation with exact
rational arithmetic.
"""

from .aemf import HomologousSet, PinnedState, check_aemf_feasible, max_common_lower_bound, min_deviation
from .egalitarian import (
    EAResult,
    LeximinOrder,
    dutta_ray,
    egalitarian_allocation,
    egalitarian_from_solution,
    leximin_compare,
    spread,
)
from .exchange import (
    CoalitionGame,
    ExchangeInstance,
    Trade,
    TradeSolution,
    build_game,
    coalition_value,
    solve_exchange,
    validate_instance,
)
from .flowcore import (
    BoundedNetwork,
    DirectedGraph,
    Flow,
    PathFlow,
    decompose_paths,
    feasible_circulation,
    max_edge_objective,
    max_flow,
    max_profit_flow,
    residual_reachable,
)
from .rational import Rat, fmt_rat, rational_recover, to_rat
from .sharing import (
    CoreReport,
    PaymentVector,
    ProfitSharingGraph,
    build_profit_sharing_graph,
    check_core,
    extended_in_edges,
    extract_payments,
)

__version__ = "0.1.0"
