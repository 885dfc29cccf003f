"""Channel graphs, liquidity states and wealth vectors.

A :class:`ChannelGraph` is an undirected (hyper)graph whose channels carry an
integer capacity.  A :class:`LiquidityState` assigns every channel's capacity
to its members; a :class:`WealthVector` records how many coins each node owns
in total.  Everything here is immutable and integer-exact.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator, Mapping, Sequence

import numpy as np


class NetworkError(ValueError):
    """Invalid network, liquidity state or wealth vector."""


@dataclass(frozen=True)
class Channel:
    id: str
    endpoints: tuple[str, ...]
    capacity: int

    def __post_init__(self):
        if len(self.endpoints) < 2:
            raise NetworkError(f"channel {self.id!r} needs at least 2 endpoints")
        if len(set(self.endpoints)) != len(self.endpoints):
            raise NetworkError(f"channel {self.id!r} has repeated endpoints {self.endpoints}")
        if not isinstance(self.capacity, (int, np.integer)) or self.capacity <= 0:
            raise NetworkError(f"channel {self.id!r}: capacity must be a positive integer")

    @property
    def k(self) -> int:
        return len(self.endpoints)


@dataclass(frozen=True, eq=False)
class ChannelGraph:
    nodes: tuple[str, ...]
    channels: tuple[Channel, ...]
    index: Mapping[str, int] = field(repr=False)

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def m(self) -> int:
        return len(self.channels)

    @property
    def total_capacity(self) -> int:
        return sum(ch.capacity for ch in self.channels)

    C = total_capacity

    @property
    def capacities(self) -> tuple[int, ...]:
        return tuple(ch.capacity for ch in self.channels)

    @property
    def is_two_party(self) -> bool:
        return all(ch.k == 2 for ch in self.channels)

    def channel(self, cid: str) -> Channel:
        for ch in self.channels:
            if ch.id == cid:
                return ch
        raise KeyError(cid)

    def channel_index(self, cid: str) -> int:
        for i, ch in enumerate(self.channels):
            if ch.id == cid:
                return i
        raise KeyError(cid)

    def channels_between(self, u: str, v: str) -> list[int]:
        return [i for i, ch in enumerate(self.channels) if u in ch.endpoints and v in ch.endpoints]

    def ends_idx(self, i: int) -> tuple[int, ...]:
        return tuple(self.index[v] for v in self.channels[i].endpoints)

    def incident(self, v: str) -> list[int]:
        return [i for i, ch in enumerate(self.channels) if v in ch.endpoints]

    def node_capacity(self, v: str) -> int:
        """Total capacity of the channels ``v`` belongs to (its maximal wealth)."""
        return sum(self.channels[i].capacity for i in self.incident(v))

    def __eq__(self, other):
        if not isinstance(other, ChannelGraph):
            return NotImplemented
        return self.nodes == other.nodes and self.channels == other.channels

    def __hash__(self):
        return hash((self.nodes, self.channels))

    def to_dict(self) -> dict:
        return {
            "nodes": list(self.nodes),
            "channels": [
                {"id": ch.id, "ends": list(ch.endpoints), "cap": int(ch.capacity)}
                for ch in self.channels
            ],
        }


def build_graph(nodes: Iterable[str], channels: Iterable[Any]) -> ChannelGraph:
    """Validate and assemble a :class:`ChannelGraph`.

    ``channels`` items may be ``(ends, cap)`` pairs, :class:`Channel` objects or
    dicts with ``ends``/``cap`` (and optional ``id``).  Channels over the same
    endpoint set are merged into one channel whose capacity is the sum; the
    merged channel keeps the id and endpoint order of its first occurrence.
    """
    node_list = [str(v) for v in nodes]
    if len(set(node_list)) != len(node_list):
        dup = sorted({v for v in node_list if node_list.count(v) > 1})
        raise NetworkError(f"duplicate node ids: {dup}")
    index = {v: i for i, v in enumerate(node_list)}

    merged: dict[frozenset, list] = {}
    order: list[frozenset] = []
    for raw in channels:
        cid = None
        if isinstance(raw, Channel):
            ends, cap, cid = raw.endpoints, raw.capacity, raw.id
        elif isinstance(raw, Mapping):
            ends, cap, cid = raw["ends"], raw["cap"], raw.get("id")
        else:
            ends, cap = raw
        ends = tuple(str(v) for v in ends)
        for v in ends:
            if v not in index:
                raise NetworkError(f"channel references unknown node {v!r}")
        if len(ends) < 2 or len(set(ends)) != len(ends):
            raise NetworkError(f"channel endpoints must be >= 2 distinct nodes, got {ends}")
        if isinstance(cap, bool) or not isinstance(cap, (int, np.integer)) or cap <= 0:
            raise NetworkError(f"nonpositive or non-integer capacity {cap!r} on {ends}")
        key = frozenset(ends)
        if key in merged:
            merged[key][1] += int(cap)
        else:
            merged[key] = [ends, int(cap), cid]
            order.append(key)

    chans = []
    used_ids: set[str] = set()
    for i, key in enumerate(order):
        ends, cap, cid = merged[key]
        cid = str(cid) if cid is not None else f"c{i}"
        if cid in used_ids:
            raise NetworkError(f"duplicate channel id {cid!r}")
        used_ids.add(cid)
        chans.append(Channel(cid, ends, cap))
    return ChannelGraph(tuple(node_list), tuple(chans), index)


def graph_from_dict(spec: Mapping) -> ChannelGraph:
    return build_graph(spec["nodes"], spec.get("channels", []))


def load_graph(path) -> ChannelGraph:
    with open(path) as fh:
        return graph_from_dict(json.load(fh))


def dump_graph(g: ChannelGraph) -> str:
    return json.dumps(g.to_dict(), indent=2)


@dataclass(frozen=True)
class WealthVector:
    nodes: tuple[str, ...]
    values: tuple[int, ...]

    def __post_init__(self):
        if len(self.nodes) != len(self.values):
            raise NetworkError("wealth vector length does not match node list")
        for v, w in zip(self.nodes, self.values):
            if isinstance(w, bool) or not isinstance(w, (int, np.integer)):
                raise NetworkError(f"wealth of {v!r} must be an integer")
            if w < 0:
                raise NetworkError(f"negative wealth {w} for node {v!r}")
        object.__setattr__(self, "values", tuple(int(w) for w in self.values))

    @property
    def total(self) -> int:
        return sum(self.values)

    def __getitem__(self, v: str) -> int:
        return self.values[self.nodes.index(v)]

    def as_dict(self) -> dict[str, int]:
        return dict(zip(self.nodes, self.values))

    def shifted(self, payer: str, payee: str, amount: int) -> "WealthVector":
        vals = list(self.values)
        i, j = self.nodes.index(payer), self.nodes.index(payee)
        vals[i] -= amount
        vals[j] += amount
        return WealthVector(self.nodes, tuple(vals))


def as_wealth(g: ChannelGraph, omega) -> WealthVector:
    """Coerce a mapping, sequence or :class:`WealthVector` to ``g``'s node order."""
    if isinstance(omega, WealthVector):
        if omega.nodes == g.nodes:
            return omega
        omega = omega.as_dict()
    if isinstance(omega, Mapping):
        extra = set(omega) - set(g.nodes)
        if extra:
            raise NetworkError(f"wealth given for unknown nodes {sorted(extra)}")
        # nodes left out of a mapping own nothing
        return WealthVector(g.nodes, tuple(int(omega.get(v, 0)) for v in g.nodes))
    vals = tuple(int(w) for w in omega)
    if len(vals) != g.n:
        raise NetworkError(f"wealth vector has {len(vals)} entries, graph has {g.n} nodes")
    return WealthVector(g.nodes, vals)


@dataclass(frozen=True)
class LiquidityState:
    """Per-channel balances, aligned with each channel's endpoint order."""

    graph: ChannelGraph
    balances: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        g = self.graph
        if len(self.balances) != g.m:
            raise NetworkError(f"expected balances for {g.m} channels, got {len(self.balances)}")
        clean = []
        for ch, bal in zip(g.channels, self.balances):
            bal = tuple(int(b) for b in bal)
            if len(bal) != ch.k:
                raise NetworkError(f"channel {ch.id!r} needs {ch.k} balances")
            if any(b < 0 or b > ch.capacity for b in bal):
                raise NetworkError(f"balance out of [0, {ch.capacity}] on channel {ch.id!r}: {bal}")
            if sum(bal) != ch.capacity:
                raise NetworkError(
                    f"conservation of liquidity violated on {ch.id!r}: {sum(bal)} != {ch.capacity}"
                )
            clean.append(bal)
        object.__setattr__(self, "balances", tuple(clean))

    def __eq__(self, other):
        if not isinstance(other, LiquidityState):
            return NotImplemented
        return self.balances == other.balances and self.graph == other.graph

    def __hash__(self):
        return hash(self.balances)

    def lam(self, e, v: str) -> int:
        i = e if isinstance(e, int) else self.graph.channel_index(e)
        ch = self.graph.channels[i]
        return self.balances[i][ch.endpoints.index(v)] if v in ch.endpoints else 0

    @property
    def coords(self) -> tuple[int, ...]:
        """Hyperbox coordinates: the first endpoint's balance of every channel."""
        return tuple(b[0] for b in self.balances)

    @property
    def flat(self) -> np.ndarray:
        """Balances in the flat (channel, member) coordinate system of length sum(k)."""
        return np.array([b for bal in self.balances for b in bal], dtype=np.int64)

    def depleted(self) -> list[int]:
        return [i for i, bal in enumerate(self.balances) if min(bal) == 0]

    def relative(self) -> np.ndarray:
        """First endpoint's balance over capacity, per channel."""
        return np.array(
            [bal[0] / ch.capacity for bal, ch in zip(self.balances, self.graph.channels)], dtype=float
        )

    def to_dict(self) -> dict:
        return {
            ch.id: {v: int(b) for v, b in zip(ch.endpoints, bal)}
            for ch, bal in zip(self.graph.channels, self.balances)
        }

    @classmethod
    def from_coords(cls, g: ChannelGraph, coords: Sequence[int]) -> "LiquidityState":
        if not g.is_two_party:
            raise NetworkError("hyperbox coordinates only describe 2-party channels")
        return cls(g, tuple((int(x), ch.capacity - int(x)) for x, ch in zip(coords, g.channels)))

    @classmethod
    def from_flat(cls, g: ChannelGraph, flat: Sequence[int]) -> "LiquidityState":
        out, pos = [], 0
        for ch in g.channels:
            out.append(tuple(int(b) for b in flat[pos : pos + ch.k]))
            pos += ch.k
        return cls(g, tuple(out))

    @classmethod
    def from_mapping(cls, g: ChannelGraph, spec: Mapping[str, Mapping[str, int]]) -> "LiquidityState":
        if set(spec) != {ch.id for ch in g.channels}:
            raise NetworkError("liquidity mapping must list every channel id exactly once")
        return cls(
            g, tuple(tuple(int(spec[ch.id][v]) for v in ch.endpoints) for ch in g.channels)
        )

    @classmethod
    def one_sided(cls, g: ChannelGraph, owner: str) -> "LiquidityState":
        """All of ``owner``'s channels fully on its side; others on their first endpoint."""
        bal = []
        for ch in g.channels:
            pos = ch.endpoints.index(owner) if owner in ch.endpoints else 0
            bal.append(tuple(ch.capacity if j == pos else 0 for j in range(ch.k)))
        return cls(g, tuple(bal))

    @classmethod
    def balanced(cls, g: ChannelGraph) -> "LiquidityState":
        """Even split; remainders go to the endpoints with the lowest node index."""
        bal = []
        for ch in g.channels:
            base, rem = divmod(ch.capacity, ch.k)
            ranks = sorted(range(ch.k), key=lambda j: g.index[ch.endpoints[j]])
            b = [base] * ch.k
            for j in ranks[:rem]:
                b[j] += 1
            bal.append(tuple(b))
        return cls(g, tuple(bal))


def load_liquidity(g: ChannelGraph, path) -> LiquidityState:
    with open(path) as fh:
        return LiquidityState.from_mapping(g, json.load(fh))


def wealth_of(g: ChannelGraph, lam: LiquidityState) -> WealthVector:
    """Project a liquidity state to the wealth vector it realizes."""
    w = [0] * g.n
    for ch, bal in zip(g.channels, lam.balances):
        for v, b in zip(ch.endpoints, bal):
            w[g.index[v]] += b
    return WealthVector(g.nodes, tuple(w))


@dataclass(frozen=True)
class Arc:
    src: str
    dst: str
    capacity: int
    channel: int


@dataclass(frozen=True)
class LiquidityNetwork:
    nodes: tuple[str, ...]
    arcs: tuple[Arc, ...]

    def capacity(self, u: str, v: str) -> int:
        return sum(a.capacity for a in self.arcs if a.src == u and a.dst == v)


def liquidity_network(g: ChannelGraph, lam: LiquidityState) -> LiquidityNetwork:
    if not g.is_two_party:
        raise NetworkError(
            "liquidity networks are defined for 2-party channels; use the bipartite "
            "expansion in pcngeom.feasibility for hyperchannels"
        )
    arcs = []
    for i, (ch, bal) in enumerate(zip(g.channels, lam.balances)):
        u, v = ch.endpoints
        arcs.append(Arc(u, v, bal[0], i))
        arcs.append(Arc(v, u, bal[1], i))
    return LiquidityNetwork(g.nodes, tuple(arcs))


# ---------------------------------------------------------------------------
# State space L_G

def volume(g: ChannelGraph) -> int:
    """Number of liquidity states.

    For 2-party channels this is prod(c_e + 1); a k-party channel of capacity c
    contributes the number of compositions binom(c + k - 1, k - 1).
    """
    return math.prod(math.comb(ch.capacity + ch.k - 1, ch.k - 1) for ch in g.channels)


def equal_split_volume(coins: int, m: int):
    """Volume of a 2-party graph with ``m`` channels of capacity coins/m each."""
    from fractions import Fraction

    return (Fraction(coins, m) + 1) ** m


def compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """All ways to write ``total`` as an ordered sum of ``parts`` nonnegative ints.

    Lexicographic order on the leading entries.
    """
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def _channel_tables(g: ChannelGraph):
    """Per-channel allocation table and its wealth contribution table."""
    allocs, contrib = [], []
    for ch in g.channels:
        if ch.k == 2:
            x = np.arange(ch.capacity + 1, dtype=np.int64)
            a = np.stack([x, ch.capacity - x], axis=1)
        else:
            a = np.array(list(compositions(ch.capacity, ch.k)), dtype=np.int64)
        w = np.zeros((a.shape[0], g.n), dtype=np.int64)
        for j, v in enumerate(ch.endpoints):
            w[:, g.index[v]] += a[:, j]
        allocs.append(a)
        contrib.append(w)
    return allocs, contrib


def iter_state_blocks(g: ChannelGraph, block: int = 1 << 16):
    """Yield ``(flat_states, wealth)`` array blocks covering all of L_G.

    States come in lexicographic order over the per-channel allocation index
    (for 2-party channels: over the hyperbox coordinates, first channel slowest).
    """
    allocs, contrib = _channel_tables(g)
    shape = tuple(a.shape[0] for a in allocs)
    total = math.prod(shape)
    if g.m == 0:
        yield np.zeros((1, 0), dtype=np.int64), np.zeros((1, g.n), dtype=np.int64)
        return
    for start in range(0, total, block):
        idx = np.unravel_index(np.arange(start, min(total, start + block)), shape)
        states = np.concatenate([a[i] for a, i in zip(allocs, idx)], axis=1)
        wealth = sum(w[i] for w, i in zip(contrib, idx))
        yield states, wealth


def check_bound(g: ChannelGraph, bound: int) -> int:
    vol = volume(g)
    if vol > bound:
        raise NetworkError(f"state space has {vol} points, above the configured bound {bound}")
    return vol
