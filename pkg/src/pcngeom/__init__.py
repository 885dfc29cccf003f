"""Geometry of payment channel networks.

Feasible wealth distributions, liquidity fibers and the circulations between
them, fee-driven depletion and two ways to counter it.
"""

from .network import (
    Channel,
    ChannelGraph,
    LiquidityNetwork,
    LiquidityState,
    NetworkError,
    WealthVector,
    build_graph,
    graph_from_dict,
    liquidity_network,
    load_graph,
    load_liquidity,
    volume,
    wealth_of,
)
from .flow import FlowArc, FlowNetwork, feasible_transshipment, max_flow, min_cost_circulation, min_cost_flow
from .feasibility import (
    FeasibilityResult,
    cut_interval,
    is_feasible,
    is_feasible_bruteforce,
    payment_feasible,
)
from .sampling import (
    PaymentModel,
    count_wealth_distributions,
    estimate_r,
    estimate_rho,
    exact_r,
    sample_wealth,
    throughput,
)
from .multiparty import RandomTopologySpec, coupled_dominance_check, q2, qk
from .fibers import Circulation, circuit_rank, fiber_enumerate, strict_circulations_enumerate
from .depletion import FeeSchedule, cycle_fee_gap, depletion_experiment, fee_potential, maximize_potential
from .convex import TierSchedule, cycle_equilibrium, delta_C, potential_phi, routing_simulation, summarize_liquidity
from .replenish import ReplenishmentProblem, continuous_relaxation, delta_radius, integer_repair, replenish, replenish_report
from .rng import make_rng

__version__ = "0.1.0"
