"""Fee potential and why maximizing it depletes channels."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .feasibility import is_feasible
from .fibers import Circulation, apply_circulation, circuit_rank, fundamental_cycles, cycle_nodes
from .flow import Flow, FlowArc, FlowNetwork, has_negative_residual_cycle, min_cost_circulation
from .network import ChannelGraph, LiquidityState, NetworkError, as_wealth, build_graph, wealth_of
from .rng import make_rng

log = logging.getLogger(__name__)

GENERIC_FEE_RANGE = (1, 1000)


@dataclass(frozen=True)
class FeeSchedule:
    """Linear per-unit fee rate (ppm) charged by each endpoint for outbound flow."""

    fees: tuple[tuple[int, ...], ...]  # aligned with channel endpoints

    def __post_init__(self):
        for row in self.fees:
            if any(f < 0 for f in row):
                raise ValueError("fees must be nonnegative")

    def fee(self, g: ChannelGraph, e: int, v: str) -> int:
        return self.fees[e][g.channels[e].endpoints.index(v)]

    @property
    def is_symmetric(self) -> bool:
        return all(len(set(row)) == 1 for row in self.fees)

    @classmethod
    def symmetric(cls, g: ChannelGraph, rates) -> "FeeSchedule":
        return cls(tuple((int(r),) * ch.k for r, ch in zip(rates, g.channels)))

    @classmethod
    def generic(cls, g: ChannelGraph, rng, lo: int = GENERIC_FEE_RANGE[0], hi: int = GENERIC_FEE_RANGE[1]):
        return cls(tuple(tuple(int(x) for x in rng.integers(lo, hi + 1, size=ch.k)) for ch in g.channels))


@dataclass(frozen=True)
class PotentialReport:
    p_G: int
    p_v: dict
    depleted_channels: int
    circuit_rank: int


def fee_potential(g: ChannelGraph, lam: LiquidityState, fees: FeeSchedule) -> PotentialReport:
    p_v = {v: 0 for v in g.nodes}
    for ch, bal, fr in zip(g.channels, lam.balances, fees.fees):
        for v, b, f in zip(ch.endpoints, bal, fr):
            p_v[v] += b * f
    rank = circuit_rank(g) if g.is_two_party else -1
    return PotentialReport(sum(p_v.values()), p_v, len(lam.depleted()), rank)


def _fee_network(g: ChannelGraph, lam: LiquidityState, fees: FeeSchedule) -> FlowNetwork:
    # pushing a unit u -> v on e changes p_G by fee(e,v) - fee(e,u); cost is its negation
    arcs = []
    for (u, v), bal, (fu, fv) in zip((ch.endpoints for ch in g.channels), lam.balances, fees.fees):
        arcs.append(FlowArc(u, v, bal[0], fu - fv))
        arcs.append(FlowArc(v, u, bal[1], fv - fu))
    return FlowNetwork(g.nodes, tuple(arcs))


def maximize_potential(
    g: ChannelGraph, omega, fees: FeeSchedule, start: LiquidityState | None = None
) -> tuple[LiquidityState, PotentialReport]:
    """The fiber element of ``omega`` with the largest network fee potential.

    Min-cost circulation on L(G, start) with the negated gains as costs; the
    result is optimal because no positive-gain cycle remains.
    """
    if not g.is_two_party:
        raise NetworkError("fee potential maximization is implemented for 2-party channels")
    omega = as_wealth(g, omega)
    if start is None:
        res = is_feasible(g, omega)
        if not res.feasible:
            raise NetworkError("wealth vector is infeasible in this network")
        start = res.witness
    elif wealth_of(g, start) != omega:
        raise NetworkError("start state does not realize omega")
    net = _fee_network(g, start, fees)
    flow = min_cost_circulation(net)
    pairs = tuple((flow[2 * i], flow[2 * i + 1]) for i in range(g.m))
    best = apply_circulation(g, start, Circulation(pairs))
    return best, fee_potential(g, best, fees)


def is_potential_optimal(g: ChannelGraph, lam: LiquidityState, fees: FeeSchedule) -> bool:
    """True when no rebalancing cycle on L(G, lam) raises the fee potential."""
    net = _fee_network(g, lam, fees)
    return not has_negative_residual_cycle(net, Flow((0,) * len(net.arcs)))


def cycle_fee_gap(g: ChannelGraph, fees: FeeSchedule, cycle) -> int:
    """sum_i fee(e_i, v_i) - fee(e_i, v_{i+1}) around a closed walk of nodes."""
    seq = list(cycle)
    if len(seq) > 1 and seq[0] == seq[-1]:
        seq = seq[:-1]
    if len(seq) < 2:
        raise ValueError("cycle needs at least two nodes")
    gap = 0
    for a, b in zip(seq, seq[1:] + seq[:1]):
        found = g.channels_between(a, b)
        if not found:
            raise NetworkError(f"no channel between {a!r} and {b!r}")
        e = found[0]
        gap += fees.fee(g, e, a) - fees.fee(g, e, b)
    return gap


def nondepleted_cycle_gaps(g: ChannelGraph, lam: LiquidityState, fees: FeeSchedule) -> list[int]:
    """Fee gaps of a cycle basis of the non-depleted subgraph.

    The gap is linear on the cycle space, so all of them being zero means every
    cycle of non-depleted channels has zero gap.
    """
    live = [i for i, bal in enumerate(lam.balances) if min(bal) > 0]
    return [cycle_fee_gap(g, fees, cycle_nodes(g, c)) for c in fundamental_cycles(g, live)]


# ---------------------------------------------------------------------------
# experiment

def random_connected_graph(n: int, m: int, rng, cap_range=(10, 100), max_tries: int = 10**6) -> ChannelGraph:
    """Erdos-Renyi G(n, m) conditioned on connectivity, with uniform integer capacities."""
    from .fibers import _components

    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    if not n - 1 <= m <= len(pairs):
        raise ValueError("need n-1 <= m <= n(n-1)/2 for a connected simple graph")
    for _ in range(max_tries):
        pick = rng.choice(len(pairs), size=m, replace=False)
        edges = [pairs[int(p)] for p in pick]
        comps, _ = _components(n, edges)
        if comps == 1:
            break
    else:
        raise RuntimeError("could not draw a connected graph")
    caps = rng.integers(cap_range[0], cap_range[1] + 1, size=m)
    nodes = [f"n{i}" for i in range(n)]
    return build_graph(nodes, [((nodes[a], nodes[b]), int(c)) for (a, b), c in zip(sorted(edges), caps)])


@dataclass(frozen=True)
class DepletionTrial:
    trial: int
    n: int
    m: int
    circuit_rank: int
    depleted: int
    p_G: int
    nonzero_gap_cycles: int


def depletion_trial(g: ChannelGraph, fees: FeeSchedule, trial: int = 0) -> tuple[DepletionTrial, LiquidityState]:
    """Maximize the fee potential at the wealth of the balanced state."""
    center = LiquidityState.balanced(g)
    best, rep = maximize_potential(g, wealth_of(g, center), fees, start=center)
    gaps = nondepleted_cycle_gaps(g, best, fees)
    return (
        DepletionTrial(trial, g.n, g.m, rep.circuit_rank, rep.depleted_channels, rep.p_G,
                       sum(1 for x in gaps if x != 0)),
        best,
    )


def depletion_experiment(
    n: int = 20,
    m: int = 30,
    trials: int = 50,
    seed: int = 0,
    m_min: int | None = None,
    cap_range=(10, 100),
) -> list[DepletionTrial]:
    """Depleted channels at the fee-potential optimum across random networks.

    Trial ``t`` draws its channel count uniformly from ``[m_min, m]`` (default
    ``m_min = n - 1``, so circuit ranks range from 0 to m - n + 1), a connected
    random graph, and generic fees from its own seeded stream.
    """
    m_min = n - 1 if m_min is None else m_min
    out = []
    for t in range(trials):
        rng = make_rng(seed, t)
        mt = int(rng.integers(m_min, m + 1))
        g = random_connected_graph(n, mt, rng, cap_range)
        fees = FeeSchedule.generic(g, rng)
        row, _ = depletion_trial(g, fees, t)
        log.debug("trial %d: rank %d depleted %d", t, row.circuit_rank, row.depleted)
        out.append(row)
    return out


def depletion_correlation(rows: list[DepletionTrial]) -> float:
    x = np.array([r.circuit_rank for r in rows], dtype=float)
    y = np.array([r.depleted for r in rows], dtype=float)
    if x.std() == 0 or y.std() == 0:
        return float("nan")
    return float(np.corrcoef(x, y)[0, 1])
