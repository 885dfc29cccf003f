"""Integer max-flow, transshipment and min-cost circulation.

Dinic's blocking-flow algorithm for max flow, a super-source/super-sink
reduction for multi-source transshipment, and cycle canceling with
Bellman-Ford negative-cycle detection for min-cost circulations.  All
capacities, costs and flows are Python ints.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Hashable, Mapping, Sequence


@dataclass(frozen=True)
class FlowArc:
    src: Hashable
    dst: Hashable
    capacity: int
    cost: int = 0


@dataclass(frozen=True)
class FlowNetwork:
    nodes: tuple
    arcs: tuple[FlowArc, ...]
    supply: Mapping[Hashable, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(
            self, "arcs", tuple(a if isinstance(a, FlowArc) else FlowArc(*a) for a in self.arcs)
        )
        known = set(self.nodes)
        if len(known) != len(self.nodes):
            raise ValueError("duplicate nodes in flow network")
        for a in self.arcs:
            if a.src not in known or a.dst not in known:
                raise ValueError(f"arc {a} references an unknown node")
            if a.capacity < 0:
                raise ValueError(f"negative capacity on arc {a}")
        for v in self.supply:
            if v not in known:
                raise ValueError(f"supply given for unknown node {v!r}")
        if sum(self.supply.values()) != 0:
            raise ValueError("supplies must sum to zero")


@dataclass(frozen=True)
class Flow:
    values: tuple[int, ...]  # aligned with FlowNetwork.arcs

    def __getitem__(self, i: int) -> int:
        return self.values[i]

    def cost(self, net: FlowNetwork) -> int:
        return sum(f * a.cost for f, a in zip(self.values, net.arcs))


@dataclass(frozen=True)
class MaxFlowResult:
    value: int
    flow: Flow
    min_cut: frozenset  # source side


@dataclass(frozen=True)
class TransshipmentResult:
    feasible: bool
    flow: Flow | None
    cut: frozenset | None  # node set whose net supply exceeds its outbound capacity


class _Residual:
    """Adjacency-list residual graph; edge ``2i`` is arc ``i``, ``2i+1`` its reverse."""

    def __init__(self, n: int):
        self.n = n
        self.head: list[list[int]] = [[] for _ in range(n)]
        self.to: list[int] = []
        self.cap: list[int] = []

    def add(self, u: int, v: int, c: int) -> int:
        eid = len(self.to)
        self.to += [v, u]
        self.cap += [c, 0]
        self.head[u].append(eid)
        self.head[v].append(eid + 1)
        return eid

    def dinic(self, s: int, t: int) -> int:
        total = 0
        n, head, to, cap = self.n, self.head, self.to, self.cap
        while True:
            level = [-1] * n
            level[s] = 0
            q = deque([s])
            while q:
                u = q.popleft()
                for e in head[u]:
                    if cap[e] > 0 and level[to[e]] < 0:
                        level[to[e]] = level[u] + 1
                        q.append(to[e])
            if level[t] < 0:
                return total
            it = [0] * n
            while True:
                pushed = self._augment(s, t, level, it)
                if not pushed:
                    break
                total += pushed

    def _augment(self, s, t, level, it) -> int:
        # iterative DFS along the level graph; returns bottleneck of one path
        head, to, cap = self.head, self.to, self.cap
        path: list[int] = []
        u = s
        while True:
            if u == t:
                f = min(cap[e] for e in path)
                for e in path:
                    cap[e] -= f
                    cap[e ^ 1] += f
                return f
            advanced = False
            while it[u] < len(head[u]):
                e = head[u][it[u]]
                v = to[e]
                if cap[e] > 0 and level[v] == level[u] + 1:
                    path.append(e)
                    u = v
                    advanced = True
                    break
                it[u] += 1
            if not advanced:
                if u == s:
                    return 0
                level[u] = -1  # dead end
                e = path.pop()
                u = to[e ^ 1]
                it[u] += 1

    def reachable(self, s: int) -> set[int]:
        seen = {s}
        q = deque([s])
        while q:
            u = q.popleft()
            for e in self.head[u]:
                if self.cap[e] > 0 and self.to[e] not in seen:
                    seen.add(self.to[e])
                    q.append(self.to[e])
        return seen


def _build(net: FlowNetwork, extra_nodes: int = 0):
    idx = {v: i for i, v in enumerate(net.nodes)}
    res = _Residual(len(net.nodes) + extra_nodes)
    for a in net.arcs:
        res.add(idx[a.src], idx[a.dst], int(a.capacity))
    return idx, res


def max_flow(net: FlowNetwork, source, sink) -> MaxFlowResult:
    """Maximum ``source``-``sink`` flow with a canonical minimum cut.

    The cut is the set of nodes reachable from ``source`` in the final
    residual graph.
    """
    if source == sink:
        raise ValueError("source and sink must differ")
    for v in (source, sink):
        if v not in net.nodes:
            raise ValueError(f"node {v!r} is not in the network")
    idx, res = _build(net)
    value = res.dinic(idx[source], idx[sink])
    flow = Flow(tuple(a.capacity - res.cap[2 * i] for i, a in enumerate(net.arcs)))
    cut = frozenset(net.nodes[i] for i in res.reachable(idx[source]))
    return MaxFlowResult(value, flow, cut)


def cut_capacity(net: FlowNetwork, side) -> int:
    side = set(side)
    return sum(a.capacity for a in net.arcs if a.src in side and a.dst not in side)


def feasible_transshipment(net: FlowNetwork) -> TransshipmentResult:
    """Find a flow meeting every node's supply (positive) or demand (negative).

    On failure the returned ``cut`` is a node set X with
    ``sum(supply[X]) > capacity(arcs leaving X)``, which proves no such flow exists.
    """
    n = len(net.nodes)
    idx, res = _build(net, extra_nodes=2)
    s, t = n, n + 1
    need = 0
    for v, b in net.supply.items():
        if b > 0:
            res.add(s, idx[v], b)
            need += b
        elif b < 0:
            res.add(idx[v], t, -b)
    value = res.dinic(s, t) if need else 0
    if value == need:
        flow = Flow(tuple(a.capacity - res.cap[2 * i] for i, a in enumerate(net.arcs)))
        return TransshipmentResult(True, flow, None)
    reach = res.reachable(s)
    cut = frozenset(net.nodes[i] for i in reach if i < n)
    return TransshipmentResult(False, None, cut)


# ---------------------------------------------------------------------------
# min-cost circulation

def _find_negative_cycle(n: int, edges: list[tuple[int, int, int, int]]) -> list[int] | None:
    """Bellman-Ford from a virtual root; returns edge ids of a negative cycle.

    ``edges`` holds ``(u, v, cost, eid)`` for residual edges with capacity > 0.
    """
    dist = [0] * n
    pred = [-1] * n
    last = -1
    for _ in range(n):
        last = -1
        for u, v, c, eid in edges:
            if dist[u] + c < dist[v]:
                dist[v] = dist[u] + c
                pred[v] = eid
                last = v
        if last < 0:
            return None
    # walk back n steps to land on the cycle
    by_id = {eid: (u, v) for u, v, _, eid in edges}
    x = last
    for _ in range(n):
        x = by_id[pred[x]][0]
    cycle, y = [], x
    while True:
        eid = pred[y]
        cycle.append(eid)
        y = by_id[eid][0]
        if y == x:
            break
    cycle.reverse()
    return cycle


def _cancel_cycles(n: int, arcs: Sequence[tuple[int, int, int, int]], flow: list[int]) -> list[int]:
    """Cancel negative residual cycles in place until none remain."""
    while True:
        edges = []
        for i, (u, v, cap, cost) in enumerate(arcs):
            if flow[i] < cap:
                edges.append((u, v, cost, 2 * i))
            if flow[i] > 0:
                edges.append((v, u, -cost, 2 * i + 1))
        cycle = _find_negative_cycle(n, edges)
        if cycle is None:
            return flow
        delta = min(
            arcs[e >> 1][2] - flow[e >> 1] if e % 2 == 0 else flow[e >> 1] for e in cycle
        )
        for e in cycle:
            flow[e >> 1] += delta if e % 2 == 0 else -delta


def _int_arcs(net: FlowNetwork):
    idx = {v: i for i, v in enumerate(net.nodes)}
    return idx, [(idx[a.src], idx[a.dst], int(a.capacity), int(a.cost)) for a in net.arcs]


def min_cost_circulation(net: FlowNetwork) -> Flow:
    """Circulation of minimum total cost, starting from the zero flow."""
    if any(net.supply.values()):
        raise ValueError("min_cost_circulation takes no supplies; use min_cost_flow")
    idx, arcs = _int_arcs(net)
    flow = _cancel_cycles(len(net.nodes), arcs, [0] * len(arcs))
    return Flow(tuple(flow))


def min_cost_flow(net: FlowNetwork) -> Flow | None:
    """Cheapest flow meeting the supplies, or ``None`` when infeasible."""
    start = feasible_transshipment(net)
    if not start.feasible:
        return None
    idx, arcs = _int_arcs(net)
    flow = _cancel_cycles(len(net.nodes), arcs, list(start.flow.values))
    return Flow(tuple(flow))


def has_negative_residual_cycle(net: FlowNetwork, flow: Flow) -> bool:
    idx, arcs = _int_arcs(net)
    edges = []
    for i, (u, v, cap, cost) in enumerate(arcs):
        if flow[i] < cap:
            edges.append((u, v, cost, 2 * i))
        if flow[i] > 0:
            edges.append((v, u, -cost, 2 * i + 1))
    return _find_negative_cycle(len(net.nodes), edges) is not None


def check_flow(net: FlowNetwork, flow: Flow, source=None, sink=None) -> int:
    """Validate bounds and conservation; returns the net outflow of ``source``."""
    bal = {v: 0 for v in net.nodes}
    for f, a in zip(flow.values, net.arcs):
        if not 0 <= f <= a.capacity:
            raise AssertionError(f"flow {f} outside [0, {a.capacity}] on {a}")
        bal[a.src] += f
        bal[a.dst] -= f
    for v in net.nodes:
        if v in (source, sink):
            continue
        if bal[v] != net.supply.get(v, 0):
            raise AssertionError(f"conservation violated at {v!r}: {bal[v]}")
    return bal[source] if source is not None else 0
