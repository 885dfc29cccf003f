"""Tiered (scarcity-priced) fees, cycle gains, and the routing simulation.

A tier maps the sender's local liquidity ``l`` in ``{0..c}`` to the price of
the next unit it forwards; scarcity pricing makes it nonincreasing in ``l``.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

from .network import ChannelGraph, LiquidityState, NetworkError


@dataclass(frozen=True)
class TierSchedule:
    prices: tuple[tuple[tuple[int, ...], ...], ...]  # [channel][endpoint][local liquidity]
    kind: str = "custom"

    def __post_init__(self):
        for row in self.prices:
            for p in row:
                if any(x < 0 for x in p):
                    raise ValueError("prices must be nonnegative")

    def price(self, e: int, j: int, local: int) -> int:
        return self.prices[e][j][local]

    @property
    def is_scarcity_priced(self) -> bool:
        return all(
            all(a >= b for a, b in zip(p, p[1:])) for row in self.prices for p in row
        )

    @classmethod
    def from_function(cls, g: ChannelGraph, fn, kind: str = "custom") -> "TierSchedule":
        """``fn(e, j, capacity)`` returns the price list over local liquidity 0..c."""
        out = []
        for e, ch in enumerate(g.channels):
            row = []
            for j in range(ch.k):
                p = tuple(int(x) for x in fn(e, j, ch.capacity))
                if len(p) != ch.capacity + 1:
                    raise ValueError(f"tier on channel {ch.id!r} needs {ch.capacity + 1} prices")
                row.append(p)
            out.append(tuple(row))
        return cls(tuple(out), kind)

    @classmethod
    def linear(cls, g: ChannelGraph, ppm) -> "TierSchedule":
        """Constant next-unit price; ``ppm`` is a scalar or per (channel, endpoint)."""
        def fn(e, j, c):
            rate = ppm if np.isscalar(ppm) else ppm[e][j]
            return [rate] * (c + 1)
        return cls.from_function(g, fn, "linear")

    @classmethod
    def quadratic(cls, g: ChannelGraph, ppm) -> "TierSchedule":
        """Total fee F(x) = floor(ppm * x^2 / c) over remote liquidity x.

        Sending at local liquidity ``l`` raises the remote side from ``c - l``
        to ``c - l + 1``, so the next-unit price is F(c-l+1) - F(c-l).
        """
        def fn(e, j, c):
            rate = ppm if np.isscalar(ppm) else ppm[e][j]
            F = [(rate * x * x) // c for x in range(c + 2)]
            return [F[c - l + 1] - F[c - l] for l in range(c + 1)]
        return cls.from_function(g, fn, "quadratic")


def quadratic_price(ppm: int, c: int, remote: int) -> int:
    """Next-unit price of the quadratic schedule with ``remote`` coins already sent."""
    return (ppm * (remote + 1) ** 2) // c - (ppm * remote**2) // c


def potential_phi(g: ChannelGraph, lam: LiquidityState, tiers: TierSchedule) -> int:
    total = 0
    for e, bal in enumerate(lam.balances):
        for j, b in enumerate(bal):
            total += sum(tiers.prices[e][j][1 : b + 1])
    return total


@dataclass(frozen=True)
class CycleState:
    nodes: tuple[str, ...]
    channels: tuple[int, ...]
    x_min: int
    x_max: int
    x: int = 0


def _cycle_channels(g: ChannelGraph, cycle) -> tuple[tuple[str, ...], tuple[int, ...]]:
    seq = list(cycle)
    if len(seq) > 1 and seq[0] == seq[-1]:
        seq = seq[:-1]
    if len(seq) < 2:
        raise ValueError("cycle needs at least two nodes")
    chans = []
    for a, b in zip(seq, seq[1:] + seq[:1]):
        found = g.channels_between(a, b)
        if not found:
            raise NetworkError(f"no channel between {a!r} and {b!r}")
        chans.append(found[0])
    if len(set(chans)) != len(chans):
        raise NetworkError("cycle reuses a channel")
    return tuple(seq), tuple(chans)


def cycle_state(g: ChannelGraph, lam: LiquidityState, cycle) -> CycleState:
    """Feasible push interval [-min lam(e_i, v_{i+1}), min lam(e_i, v_i)]."""
    nodes, chans = _cycle_channels(g, cycle)
    send = [lam.lam(e, a) for e, a in zip(chans, nodes)]
    recv = [lam.lam(e, b) for e, b in zip(chans, nodes[1:] + nodes[:1])]
    return CycleState(nodes, chans, -min(recv), min(send))


def push(g: ChannelGraph, lam: LiquidityState, cycle, x: int) -> LiquidityState:
    """The state lam_x: x units pushed along the cycle's orientation."""
    cs = cycle_state(g, lam, cycle)
    if not cs.x_min <= x <= cs.x_max:
        raise ValueError(f"x={x} outside [{cs.x_min}, {cs.x_max}]")
    bal = [list(b) for b in lam.balances]
    for e, a, b in zip(cs.channels, cs.nodes, cs.nodes[1:] + cs.nodes[:1]):
        eps = g.channels[e].endpoints
        bal[e][eps.index(a)] -= x
        bal[e][eps.index(b)] += x
    return LiquidityState(g, tuple(tuple(b) for b in bal))


def delta_C(g: ChannelGraph, lam: LiquidityState, tiers: TierSchedule, cycle, x: int) -> int:
    """Phi(lam_{x+1}) - Phi(lam_x): next-unit price at each receiver minus the refunded sender price."""
    cs = cycle_state(g, lam, cycle)
    if not cs.x_min <= x < cs.x_max:
        raise ValueError(f"need x and x+1 in [{cs.x_min}, {cs.x_max}], got x={x}")
    total = 0
    for e, a, b in zip(cs.channels, cs.nodes, cs.nodes[1:] + cs.nodes[:1]):
        eps = g.channels[e].endpoints
        ja, jb = eps.index(a), eps.index(b)
        send = lam.balances[e][ja] - x
        recv = lam.balances[e][jb] + x
        total += tiers.prices[e][jb][recv + 1] - tiers.prices[e][ja][send]
    return total


@dataclass(frozen=True)
class Equilibrium:
    kind: str  # interior | boundary_min | boundary_max
    optimizers: tuple[int, ...]
    x_min: int
    x_max: int
    deltas: tuple[int, ...]


def cycle_equilibrium(g: ChannelGraph, lam: LiquidityState, tiers: TierSchedule, cycle) -> Equilibrium:
    """Where the fee potential settles along one cycle.

    With nonincreasing tiers ``Delta_C`` is nonincreasing, so Phi is concave in
    the push ``x`` and a sign change of ``Delta_C`` brackets the maximizer: the
    potential-maximizing (fee-earning) operators stall there.  Without a sign
    change the optimum is the boundary in the direction of the sign.
    """
    cs = cycle_state(g, lam, cycle)
    deltas = tuple(delta_C(g, lam, tiers, cycle, x) for x in range(cs.x_min, cs.x_max))
    if not deltas:
        return Equilibrium("interior", (cs.x_min,), cs.x_min, cs.x_max, deltas)
    phi = np.concatenate(([0], np.cumsum(deltas)))
    best = tuple(int(cs.x_min + i) for i in np.flatnonzero(phi == phi.max()))
    if all(d > 0 for d in deltas):
        kind = "boundary_max"
    elif all(d < 0 for d in deltas):
        kind = "boundary_min"
    else:
        kind = "interior"
    return Equilibrium(kind, best, cs.x_min, cs.x_max, deltas)


# ---------------------------------------------------------------------------
# routing simulation

@dataclass
class SimulationSeries:
    graph: ChannelGraph
    liquidity: np.ndarray          # (steps + 1, m): first endpoint's balance, row 0 = start
    success: np.ndarray            # (steps,) bool
    fee: np.ndarray                # (steps,) fee paid by the payment (0 on failure)
    hops: np.ndarray               # (steps,) path length of the successful attempt, 0 on failure
    channel_flow: np.ndarray       # (m,) units forwarded per channel
    node_fees: dict = field(default_factory=dict)
    final: LiquidityState | None = None

    @property
    def steps(self) -> int:
        return len(self.success)


def circular_demand(nodes) -> tuple[tuple[str, str], ...]:
    """Each node pays its successor around the ring; net flow is zero in the long run."""
    nodes = list(nodes)
    return tuple((a, b) for a, b in zip(nodes, nodes[1:] + nodes[:1]))


def _cheapest_path(g: ChannelGraph, price, src: int, dst: int, banned: set):
    """Dijkstra over next-unit prices; ties broken by hop count, then node order."""
    adj = [[] for _ in range(g.n)]
    for e, ch in enumerate(g.channels):
        u, v = (g.index[x] for x in ch.endpoints)
        adj[u].append((v, e, 0))
        adj[v].append((u, e, 1))
    heap = [(0, 0, (src,), ())]
    done = set()
    while heap:
        cost, nh, path, arcs = heapq.heappop(heap)
        x = path[-1]
        if x == dst:
            return cost, arcs
        if x in done:
            continue
        done.add(x)
        for y, e, j in adj[x]:
            if y in done or (e, j) in banned:
                continue
            heapq.heappush(heap, (cost + price(e, j), nh + 1, path + (y,), arcs + ((e, j),)))
    return None


def _demand_sequence(k: int, steps: int, rng, rounds: bool) -> np.ndarray:
    if steps == 0:
        return np.zeros(0, dtype=np.int64)
    if not rounds:
        return rng.integers(k, size=steps)
    n_rounds = -(-steps // k)
    return np.concatenate([rng.permutation(k) for _ in range(n_rounds)])[:steps]


def routing_simulation(
    g: ChannelGraph,
    tiers: TierSchedule,
    steps: int,
    rng: np.random.Generator,
    demand=None,
    start: LiquidityState | None = None,
    disclose: bool = True,
    max_attempts: int = 3,
    rounds: bool = True,
) -> SimulationSeries:
    """Unit payments drawn from ``demand`` (default: circular).

    With ``rounds`` the workload is a sequence of rounds, each a random
    permutation of all demand pairs, so circular demand restores every node's
    wealth after each round.  Otherwise pairs are drawn independently, and the
    wealth vector itself performs a random walk.

    The sender picks the cheapest path by the tier prices it can see: current
    prices when ``disclose`` is set, prices at the start state otherwise.  Every
    hop is charged by its sending endpoint.  An attempt succeeds iff every hop
    has a unit of local liquidity; on failure the sender learns the failing hop,
    avoids it and retries, up to ``max_attempts`` times.
    """
    if not g.is_two_party:
        raise NetworkError("routing simulation needs 2-party channels")
    if steps < 0:
        raise ValueError("steps must be >= 0")
    lam0 = start if start is not None else LiquidityState.balanced(g)
    demand = tuple(demand) if demand is not None else circular_demand(g.nodes)
    bal = np.array([b for b in lam0.balances], dtype=np.int64)  # (m, 2)
    seen = bal.copy()
    liq = np.empty((steps + 1, g.m), dtype=np.int64)
    liq[0] = bal[:, 0]
    success = np.zeros(steps, dtype=bool)
    fee = np.zeros(steps, dtype=np.int64)
    hops = np.zeros(steps, dtype=np.int64)
    flow = np.zeros(g.m, dtype=np.int64)
    earned = np.zeros(g.n, dtype=np.int64)
    ends = [tuple(g.index[x] for x in ch.endpoints) for ch in g.channels]
    picks = _demand_sequence(len(demand), steps, rng, rounds)

    for t in range(steps):
        a, b = demand[int(picks[t])]
        src, dst = g.index[a], g.index[b]
        view = bal if disclose else seen
        banned: set = set()
        for _ in range(max_attempts):
            found = _cheapest_path(g, lambda e, j: tiers.prices[e][j][view[e, j]], src, dst, banned)
            if found is None:
                break
            _, arcs = found
            short = next(((e, j) for e, j in arcs if bal[e, j] < 1), None)
            if short is not None:
                banned.add(short)
                continue
            paid = 0
            for e, j in arcs:
                p = tiers.prices[e][j][bal[e, j]]
                paid += p
                earned[ends[e][j]] += p
                bal[e, j] -= 1
                bal[e, 1 - j] += 1
                flow[e] += 1
            success[t] = True
            fee[t] = paid
            hops[t] = len(arcs)
            break
        liq[t + 1] = bal[:, 0]

    final = LiquidityState(g, tuple(tuple(int(x) for x in row) for row in bal))
    return SimulationSeries(
        g, liq, success, fee, hops, flow,
        {v: int(earned[i]) for i, v in enumerate(g.nodes)}, final,
    )


@dataclass(frozen=True)
class LiquiditySummary:
    median_relative: tuple[float, ...]
    steady_start: int
    steady: bool
    node_fees: dict
    network_fees: int
    success_rate: float
    band_40_60: float
    band_10_90: float
    channel_flow: tuple[int, ...]


def steady_state_start(rel: np.ndarray, window: int = 500, tol: float = 0.01) -> tuple[int, bool]:
    """First window start whose per-channel mean differs from the next window's by < tol.

    ``rel`` is relative liquidity, so ``tol`` is a fraction of capacity.
    Returns ``(start, found)``; when no such window exists the second half is used.
    """
    T = rel.shape[0]
    for s in range(0, T - 2 * window + 1, window):
        a = rel[s : s + window].mean(axis=0)
        b = rel[s + window : s + 2 * window].mean(axis=0)
        if np.all(np.abs(a - b) < tol):
            return s, True
    return T // 2, False


def summarize_liquidity(series: SimulationSeries, window: int = 500, tol: float = 0.01) -> LiquiditySummary:
    if series.steps == 0:
        raise ValueError("cannot summarize an empty series")
    caps = np.array(series.graph.capacities, dtype=float)
    rel = series.liquidity[1:] / caps
    start, found = steady_state_start(rel, window, tol)
    tail = rel[start:]
    med = np.median(tail, axis=0)
    return LiquiditySummary(
        tuple(float(x) for x in med),
        int(start),
        found,
        dict(series.node_fees),
        int(series.fee.sum()),
        float(series.success.mean()),
        float(np.mean((tail >= 0.4) & (tail <= 0.6))),
        float(np.mean((tail >= 0.1) & (tail <= 0.9))),
        tuple(int(x) for x in series.channel_flow),
    )


def triangle_benchmark(capacity: int = 100) -> ChannelGraph:
    from .network import build_graph

    return build_graph(
        ["a", "b", "c"],
        [(("a", "b"), capacity), (("b", "c"), capacity), (("c", "a"), capacity)],
    )
