"""Membership of wealth vectors in the feasible set W_G, and payment feasibility."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .flow import FlowArc, FlowNetwork, max_flow
from .network import (
    ChannelGraph,
    LiquidityState,
    NetworkError,
    WealthVector,
    as_wealth,
    check_bound,
    iter_state_blocks,
)

DEFAULT_BRUTEFORCE_BOUND = 10**7


@dataclass(frozen=True)
class FeasibilityResult:
    feasible: bool
    wealth: WealthVector
    witness: LiquidityState | None = None
    certificate_cut: frozenset | None = None

    def __bool__(self):
        return self.feasible


def expansion_network(g: ChannelGraph, omega: WealthVector) -> FlowNetwork:
    """Source -> channel (cap c_e) -> member nodes (cap c_e) -> sink (cap omega(v))."""
    nodes = ["__src", "__snk"] + [("ch", i) for i in range(g.m)] + [("v", v) for v in g.nodes]
    arcs = []
    for i, ch in enumerate(g.channels):
        arcs.append(FlowArc("__src", ("ch", i), ch.capacity))
        for v in ch.endpoints:
            arcs.append(FlowArc(("ch", i), ("v", v), ch.capacity))
    for v, w in zip(g.nodes, omega.values):
        arcs.append(FlowArc(("v", v), "__snk", w))
    return FlowNetwork(tuple(nodes), tuple(arcs))


def is_feasible(g: ChannelGraph, omega) -> FeasibilityResult:
    """Decide whether some liquidity state of ``g`` realizes ``omega``.

    Solved as a max flow on the channel/node bipartite expansion, which handles
    k-party channels unchanged.  When infeasible, ``certificate_cut`` is a node
    set S whose wealth is below the capacity of the channels inside S.
    """
    omega = as_wealth(g, omega)
    if omega.total != g.total_capacity:
        raise NetworkError(f"wealth sums to {omega.total}, network holds {g.total_capacity}")
    net = expansion_network(g, omega)
    res = max_flow(net, "__src", "__snk")
    if res.value == g.total_capacity:
        flows = {}
        for a, f in zip(net.arcs, res.flow.values):
            if a.src != "__src" and a.dst != "__snk":
                flows[(a.src[1], a.dst[1])] = f
        bal = tuple(tuple(flows[(i, v)] for v in ch.endpoints) for i, ch in enumerate(g.channels))
        return FeasibilityResult(True, omega, witness=LiquidityState(g, bal))
    side = frozenset(x[1] for x in res.min_cut if isinstance(x, tuple) and x[0] == "v")
    return FeasibilityResult(False, omega, certificate_cut=side)


def is_feasible_bruteforce(g: ChannelGraph, omega, bound: int = DEFAULT_BRUTEFORCE_BOUND) -> bool:
    """Scan every liquidity state of ``g`` and look for one projecting to ``omega``."""
    omega = as_wealth(g, omega)
    check_bound(g, bound)
    target = np.array(omega.values, dtype=np.int64)
    for _, wealth in iter_state_blocks(g):
        if np.any(np.all(wealth == target, axis=1)):
            return True
    return False


def feasible_wealth_set(g: ChannelGraph, bound: int = DEFAULT_BRUTEFORCE_BOUND) -> set[tuple[int, ...]]:
    """All feasible wealth vectors, as the image of the full state space."""
    check_bound(g, bound)
    out: set[tuple[int, ...]] = set()
    for _, wealth in iter_state_blocks(g):
        out.update(map(tuple, np.unique(wealth, axis=0).tolist()))
    return out


def payment_feasible(g: ChannelGraph, omega, payer: str, payee: str, amount: int) -> FeasibilityResult:
    """Can ``payer`` send ``amount`` to ``payee`` without an on-chain transaction?

    Only the topology and the wealth vector matter, not the liquidity state.
    """
    omega = as_wealth(g, omega)
    if amount < 0:
        raise ValueError("amount must be >= 0")
    if omega[payer] < amount:
        raise ValueError(f"{payer!r} owns {omega[payer]} < {amount}")
    return is_feasible(g, omega.shifted(payer, payee, amount))


def payment_feasible_in_state(lam: LiquidityState, payer: str, payee: str, amount: int) -> bool:
    """Same question answered on the liquidity network of a concrete state."""
    from .network import liquidity_network

    ln = liquidity_network(lam.graph, lam)
    if amount == 0:
        return True
    net = FlowNetwork(ln.nodes, tuple(FlowArc(a.src, a.dst, a.capacity) for a in ln.arcs))
    return max_flow(net, payer, payee).value >= amount


def cut_interval(g: ChannelGraph, s) -> tuple[int, int]:
    """Admissible range of the total wealth of node set ``s``.

    ``lo`` is the capacity of channels entirely inside ``s``; the width is the
    capacity of channels straddling the cut (a straddling k-party channel can
    shift its whole capacity across).
    """
    s = set(s)
    if not s or not s < set(g.nodes):
        raise ValueError("cut side must be a nonempty proper subset of the nodes")
    lo = width = 0
    for ch in g.channels:
        inside = sum(v in s for v in ch.endpoints)
        if inside == ch.k:
            lo += ch.capacity
        elif inside:
            width += ch.capacity
    return lo, lo + width


def violated_cuts(g: ChannelGraph, omega) -> list[frozenset]:
    """Every node set whose wealth leaves its cut interval (exhaustive, small n)."""
    omega = as_wealth(g, omega)
    w = omega.as_dict()
    out = []
    nodes = list(g.nodes)
    for mask in range(1, (1 << g.n) - 1):
        s = frozenset(nodes[i] for i in range(g.n) if mask >> i & 1)
        lo, hi = cut_interval(g, s)
        tot = sum(w[v] for v in s)
        if not lo <= tot <= hi:
            out.append(s)
    return out
