"""Fibers of the wealth projection and the strict circulations that move within them."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .network import (
    ChannelGraph,
    LiquidityState,
    NetworkError,
    as_wealth,
    check_bound,
    iter_state_blocks,
    volume,
    wealth_of,
)

DEFAULT_ENUM_BOUND = 10**7


@dataclass(frozen=True)
class Circulation:
    """Flow on the liquidity network, per channel ``(f(u->v), f(v->u))``.

    ``u, v`` follow the channel's endpoint order.
    """

    flows: tuple[tuple[int, int], ...]

    @property
    def is_strict(self) -> bool:
        return all(a == 0 or b == 0 for a, b in self.flows)

    @property
    def is_zero(self) -> bool:
        return all(a == 0 and b == 0 for a, b in self.flows)

    def net(self) -> tuple[int, ...]:
        """Per channel, units gained by the first endpoint: f(v->u) - f(u->v)."""
        return tuple(b - a for a, b in self.flows)

    @classmethod
    def from_net(cls, net) -> "Circulation":
        return cls(tuple((max(-d, 0), max(d, 0)) for d in net))


def check_circulation(g: ChannelGraph, lam: LiquidityState, f: Circulation) -> None:
    if not g.is_two_party:
        raise NetworkError("circulations are defined on 2-party liquidity networks")
    if len(f.flows) != g.m:
        raise NetworkError("circulation must give a flow pair for every channel")
    bal = [0] * g.n
    for ch, (a, b), lb in zip(g.channels, f.flows, lam.balances):
        if a < 0 or b < 0:
            raise NetworkError(f"negative flow on {ch.id!r}")
        if a > lb[0] or b > lb[1]:
            raise NetworkError(f"flow exceeds liquidity on {ch.id!r}: {(a, b)} vs {lb}")
        u, v = (g.index[x] for x in ch.endpoints)
        bal[u] += b - a
        bal[v] += a - b
    if any(bal):
        raise NetworkError("flow conservation violated")


def apply_circulation(g: ChannelGraph, lam: LiquidityState, f: Circulation) -> LiquidityState:
    check_circulation(g, lam, f)
    new = LiquidityState(
        g, tuple((lb[0] + b - a, lb[1] + a - b) for lb, (a, b) in zip(lam.balances, f.flows))
    )
    assert wealth_of(g, new) == wealth_of(g, lam)
    return new


def circulation_between(lam: LiquidityState, other: LiquidityState) -> Circulation:
    """The unique strict circulation on L(G, lam) that leads to ``other``."""
    g = lam.graph
    if wealth_of(g, lam) != wealth_of(g, other):
        raise NetworkError("states lie in different fibers")
    return Circulation.from_net(tuple(o[0] - l[0] for l, o in zip(lam.balances, other.balances)))


def fiber_enumerate(g: ChannelGraph, omega, bound: int = DEFAULT_ENUM_BOUND) -> list[LiquidityState]:
    """Every liquidity state projecting to ``omega``, in lexicographic order."""
    omega = as_wealth(g, omega)
    check_bound(g, bound)
    target = np.array(omega.values, dtype=np.int64)
    out = []
    for states, wealth in iter_state_blocks(g):
        hit = np.all(wealth == target, axis=1)
        for row in states[hit]:
            out.append(LiquidityState.from_flat(g, row.tolist()))
    return out


def fiber_size(g: ChannelGraph, omega, bound: int = DEFAULT_ENUM_BOUND) -> int:
    omega = as_wealth(g, omega)
    check_bound(g, bound)
    target = np.array(omega.values, dtype=np.int64)
    return int(sum(np.all(w == target, axis=1).sum() for _, w in iter_state_blocks(g)))


def fiber_sizes(g: ChannelGraph, bound: int = DEFAULT_ENUM_BOUND) -> dict[tuple[int, ...], int]:
    """Fiber size of every feasible wealth vector (the fibers partition L_G)."""
    check_bound(g, bound)
    out: dict[tuple[int, ...], int] = {}
    for _, wealth in iter_state_blocks(g):
        rows, counts = np.unique(wealth, axis=0, return_counts=True)
        for r, c in zip(map(tuple, rows.tolist()), counts.tolist()):
            out[r] = out.get(r, 0) + c
    return out


def strict_circulations_enumerate(
    g: ChannelGraph, lam: LiquidityState, bound: int = DEFAULT_ENUM_BOUND
) -> list[Circulation]:
    """All strict circulations on L(G, lam) by backtracking over channels.

    A strict circulation is fixed by its net value per channel,
    ``d_e = f(v->u) - f(u->v)`` in ``[-lam(e,u), lam(e,v)]``.  Channels are
    assigned in order; a node is checked for zero net flow as soon as its last
    incident channel is set.  Pruning uses the remaining reachable range.
    """
    if not g.is_two_party:
        raise NetworkError("strict circulations are defined on 2-party liquidity networks")
    if volume(g) > bound:
        raise NetworkError(f"search space {volume(g)} above bound {bound}")
    ends = [tuple(g.index[x] for x in ch.endpoints) for ch in g.channels]
    last = [-1] * g.n
    for i, (u, v) in enumerate(ends):
        last[u] = last[v] = i
    closing = [[] for _ in range(g.m)]
    for x in range(g.n):
        if last[x] >= 0:
            closing[last[x]].append(x)
    # remaining max inflow / outflow per node from channels after position i
    rem_in = np.zeros((g.m + 1, g.n), dtype=np.int64)
    rem_out = np.zeros((g.m + 1, g.n), dtype=np.int64)
    for i in range(g.m - 1, -1, -1):
        rem_in[i] = rem_in[i + 1]
        rem_out[i] = rem_out[i + 1]
        (u, v), (lu, lv) = ends[i], lam.balances[i]
        # d > 0: u gains up to lv; d < 0: u loses up to lu
        rem_in[i, u] += lv
        rem_out[i, u] += lu
        rem_in[i, v] += lu
        rem_out[i, v] += lv
    rem_in, rem_out = rem_in.tolist(), rem_out.tolist()

    out: list[Circulation] = []
    bal = [0] * g.n
    net = [0] * g.m

    def rec(i: int):
        if i == g.m:
            out.append(Circulation.from_net(tuple(net)))
            return
        (u, v), (lu, lv) = ends[i], lam.balances[i]
        for d in range(-lu, lv + 1):
            bal[u] += d
            bal[v] -= d
            ok = all(bal[x] == 0 for x in closing[i])
            if ok:
                ri, ro = rem_in[i + 1], rem_out[i + 1]
                ok = all(-ri[x] <= bal[x] <= ro[x] for x in (u, v))
            if ok:
                net[i] = d
                rec(i + 1)
            bal[u] -= d
            bal[v] += d
        net[i] = 0

    rec(0)
    return out


def _components(n: int, edges) -> tuple[int, list[int]]:
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in edges:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
    roots = [find(x) for x in range(n)]
    return len(set(roots)), roots


def circuit_rank(g: ChannelGraph) -> int:
    """m - n + number of connected components."""
    if not g.is_two_party:
        raise NetworkError("circuit rank is defined here for 2-party graphs; use the 2-section")
    comps, _ = _components(g.n, [g.ends_idx(i) for i in range(g.m)])
    return g.m - g.n + comps


def fundamental_cycles(g: ChannelGraph, channels=None) -> list[list[tuple[int, int]]]:
    """Cycle basis of the subgraph on ``channels`` (default: all).

    Each cycle is a list of ``(channel, sign)``; ``sign=+1`` means the cycle
    traverses the channel from its first to its second endpoint.
    """
    chans = list(range(g.m)) if channels is None else list(channels)
    adj: dict[int, list[tuple[int, int, int]]] = {x: [] for x in range(g.n)}
    for i in chans:
        u, v = g.ends_idx(i)
        adj[u].append((v, i, +1))
        adj[v].append((u, i, -1))
    parent: dict[int, tuple[int, int, int] | None] = {}
    depth: dict[int, int] = {}
    tree: set[int] = set()
    for root in range(g.n):
        if root in parent:
            continue
        parent[root] = None
        depth[root] = 0
        stack = [root]
        while stack:
            x = stack.pop()
            for y, i, sgn in adj[x]:
                if y not in parent:
                    parent[y] = (x, i, sgn)
                    depth[y] = depth[x] + 1
                    tree.add(i)
                    stack.append(y)

    def path_up(x, anc_depth):
        steps = []
        while depth[x] > anc_depth:
            px, i, sgn = parent[x]
            steps.append((i, -sgn))  # walking x -> px reverses the tree edge
            x = px
        return steps, x

    cycles = []
    for i in chans:
        if i in tree:
            continue
        u, v = g.ends_idx(i)
        # cycle: u -> v along channel i, then v back up to u through the tree
        a, b = v, u
        up_a, up_b = [], []
        while a != b:
            if depth[a] >= depth[b]:
                pa, j, sgn = parent[a]
                up_a.append((j, -sgn))
                a = pa
            else:
                pb, j, sgn = parent[b]
                up_b.append((j, sgn))
                b = pb
        cycles.append([(i, +1)] + up_a + list(reversed(up_b)))
    return cycles


def cycle_nodes(g: ChannelGraph, cycle: list[tuple[int, int]]) -> list[str]:
    """Node sequence of a signed channel cycle (start node not repeated)."""
    seq = []
    for i, sgn in cycle:
        u, v = g.channels[i].endpoints
        seq.append(u if sgn > 0 else v)
    return seq
