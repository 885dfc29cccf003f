"""Cut widths of random 2-party and k-party channel topologies.

Closed forms are exact :class:`fractions.Fraction` values; Monte Carlo runs
use vectorized draws of k-subsets.  Cuts and channel member sets are encoded
as integer bitmasks over the nodes ``0..n-1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

from .flow import FlowArc, FlowNetwork, max_flow
from .rng import make_rng


@dataclass(frozen=True)
class RandomTopologySpec:
    n: int
    m: int
    k: int
    c: int

    def __post_init__(self):
        if not 2 <= self.k <= self.n:
            raise ValueError("need 2 <= k <= n")
        if self.m < 0 or self.c <= 0:
            raise ValueError("need m >= 0 and c > 0")


def q2(n: int, s: int) -> Fraction:
    if n < 2 or not 1 <= s <= n - 1:
        raise ValueError("need n >= 2 and 1 <= s <= n-1")
    return Fraction(2 * s * (n - s), n * (n - 1))


def qk(n: int, k: int, s: int) -> Fraction:
    """Probability that a uniform k-subset of n nodes meets both sides of an s-cut."""
    if not 1 <= s <= n - 1 or not 1 <= k <= n:
        raise ValueError("need 1 <= s <= n-1 and 1 <= k <= n")
    # math.comb(a, b) is 0 for b > a
    return 1 - Fraction(math.comb(s, k) + math.comb(n - s, k), math.comb(n, k))


def expected_cut_width(spec: RandomTopologySpec, s: int) -> Fraction:
    return spec.m * spec.c * qk(spec.n, spec.k, s)


def _draw_members(n: int, k: int, m: int, topologies: int, rng, distinct: bool):
    """Random member orderings, shape (topologies, m, n); the first k entries form P_e.

    With ``distinct`` the k-sets inside one topology are pairwise different
    (whole topologies are redrawn until they are).
    """
    keys = rng.random((topologies, m, n))
    order = np.argsort(keys, axis=2)
    if not distinct or m <= 1:
        return order
    weights = (1 << np.arange(n, dtype=np.int64))
    while True:
        masks = weights[order[:, :, :k]].sum(axis=2)
        srt = np.sort(masks, axis=1)
        bad = np.any(srt[:, 1:] == srt[:, :-1], axis=1)
        if not bad.any():
            return order
        redo = np.argsort(rng.random((int(bad.sum()), m, n)), axis=2)
        order[bad] = redo


def _masks(order, size: int, n: int):
    weights = (1 << np.arange(n, dtype=np.int64))
    return weights[order[..., :size]].sum(axis=-1)


def _straddles(member_masks, cut_masks, full: int):
    """Boolean array [..., cuts]: member set meets both S and its complement."""
    mm = member_masks[..., None]
    return ((mm & cut_masks) != 0) & ((mm & (full ^ cut_masks)) != 0)


@dataclass(frozen=True)
class CutWidthReport:
    s: int
    k: int
    q_closed: Fraction
    q_mc: float
    q_stderr: float
    expected_width_closed: Fraction
    expected_width_mc: float
    samples: int
    duplicates_allowed: bool


def mc_cut_width(spec: RandomTopologySpec, s: int, samples: int, seed: int, stream: tuple = ()) -> CutWidthReport:
    """Monte Carlo check of the straddle probability for the cut ``S = {0..s-1}``.

    ``samples`` topologies of ``m`` channels are drawn; channels within one
    topology are distinct k-sets whenever binom(n, k) >= m.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    n, k, m = spec.n, spec.k, spec.m
    rng = make_rng(seed, *stream)
    distinct = math.comb(n, k) >= m
    hits = 0
    done = 0
    cut = np.array([(1 << s) - 1], dtype=np.int64)
    full = (1 << n) - 1
    width_sum = 0
    while done < samples:
        t = min(20000, samples - done)
        order = _draw_members(n, k, max(m, 1), t, rng, distinct)
        st = _straddles(_masks(order, k, n), cut, full)[..., 0]
        if m == 0:
            st = st[:, :0]
        hits += int(st.sum())
        width_sum += int(st.sum()) * spec.c
        done += t
    draws = samples * max(m, 0)
    if draws:
        q = hits / draws
        se = math.sqrt(q * (1 - q) / draws)
    else:
        q, se = 0.0, 0.0
    return CutWidthReport(
        s, k, qk(n, k, s), q, se, expected_cut_width(spec, s),
        width_sum / samples, samples, not distinct,
    )


def all_cut_masks(n: int) -> np.ndarray:
    """Every nonempty proper node subset as a bitmask."""
    return np.arange(1, (1 << n) - 1, dtype=np.int64)


def hyper_max_flow(n: int, members: list[tuple[int, ...]], caps: list[int], s: int, t: int) -> int:
    """Capacity max flow between nodes ``s`` and ``t`` of a hypergraph.

    Each channel becomes a gadget ``in -> out`` of capacity c_e with members
    wired to ``in`` and from ``out`` at unbounded capacity, so a cut pays c_e
    exactly when it separates some members of e.
    """
    big = sum(caps) + 1
    nodes = list(range(n)) + [("in", i) for i in range(len(members))] + [("out", i) for i in range(len(members))]
    arcs = []
    for i, (mem, c) in enumerate(zip(members, caps)):
        arcs.append(FlowArc(("in", i), ("out", i), c))
        for v in mem:
            arcs.append(FlowArc(v, ("in", i), big))
            arcs.append(FlowArc(("out", i), v, big))
    return max_flow(FlowNetwork(tuple(nodes), tuple(arcs)), s, t).value


@dataclass
class DominanceReport:
    topologies: int
    channel_samples: int
    indicator_violations: int = 0
    cut_violations: int = 0
    mincut_violations: int = 0
    maxflow_checked: int = 0
    maxflow_violations: int = 0
    mean_kparty_mincut: float = 0.0
    mean_twoparty_mincut: float = 0.0
    notes: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (
            self.indicator_violations or self.cut_violations
            or self.mincut_violations or self.maxflow_violations
        )


def coupled_draw(spec: RandomTopologySpec, topologies: int, rng):
    """Coupled (P_e, E_e) member masks, each of shape (topologies, m).

    P_e is a uniform k-subset; E_e is a uniform pair inside P_e, taken as the
    first two entries of the same uniform ordering.
    """
    n, k, m = spec.n, spec.k, spec.m
    order = _draw_members(n, k, m, topologies, rng, math.comb(n, k) >= m)
    return _masks(order, k, n), _masks(order, 2, n), order


def coupled_dominance_check(
    spec: RandomTopologySpec,
    samples: int,
    seed: int,
    cuts: np.ndarray | None = None,
    maxflow_topologies: int = 20,
    stream: tuple = (),
) -> DominanceReport:
    """Check k-party vs paired 2-party dominance on ``samples`` coupled topologies.

    For every topology, channel and cut: 1{A_e(S)} >= 1{B_e(S)}; the summed cut
    capacities dominate; the minimum over ``cuts`` (default: all cuts)
    dominates.  On the first ``maxflow_topologies`` topologies the s-t max flow
    of every ordered pair is compared as well.
    """
    n, m, c = spec.n, spec.m, spec.c
    cuts = all_cut_masks(n) if cuts is None else np.asarray(cuts, dtype=np.int64)
    full = (1 << n) - 1
    rng = make_rng(seed, *stream)
    rep = DominanceReport(samples, samples * m)
    k_sum = two_sum = 0.0
    done = 0
    mf_left = maxflow_topologies
    while done < samples:
        t = min(max(1, 2_000_000 // max(1, m * len(cuts))), samples - done)
        pk, p2, order = coupled_draw(spec, t, rng)
        a = _straddles(pk, cuts, full)
        b = _straddles(p2, cuts, full)
        rep.indicator_violations += int(np.count_nonzero(b & ~a))
        cap_k = a.sum(axis=1) * c
        cap_2 = b.sum(axis=1) * c
        rep.cut_violations += int(np.count_nonzero(cap_k < cap_2))
        mk, m2 = cap_k.min(axis=1), cap_2.min(axis=1)
        rep.mincut_violations += int(np.count_nonzero(mk < m2))
        k_sum += float(mk.sum())
        two_sum += float(m2.sum())
        for row in range(min(mf_left, t)):
            kmem = [tuple(int(x) for x in order[row, e, : spec.k]) for e in range(m)]
            pmem = [tuple(int(x) for x in order[row, e, :2]) for e in range(m)]
            caps = [c] * m
            for s_ in range(n):
                for t_ in range(n):
                    if s_ == t_:
                        continue
                    rep.maxflow_checked += 1
                    if hyper_max_flow(n, kmem, caps, s_, t_) < hyper_max_flow(n, pmem, caps, s_, t_):
                        rep.maxflow_violations += 1
        mf_left -= min(mf_left, t)
        done += t
    rep.mean_kparty_mincut = k_sum / samples
    rep.mean_twoparty_mincut = two_sum / samples
    if math.comb(n, spec.k) < m:
        rep.notes.append("binom(n,k) < m: duplicate k-party channels allowed")
    return rep


def realized_graphs(spec: RandomTopologySpec, seed: int, stream: tuple = ()):
    """One coupled draw as a pair of :class:`ChannelGraph` (k-party, 2-party)."""
    from .network import build_graph

    rng = make_rng(seed, *stream)
    _, _, order = coupled_draw(spec, 1, rng)
    nodes = [f"v{i}" for i in range(spec.n)]
    kch = [([nodes[int(x)] for x in order[0, e, : spec.k]], spec.c) for e in range(spec.m)]
    pch = [([nodes[int(x)] for x in order[0, e, :2]], spec.c) for e in range(spec.m)]
    return build_graph(nodes, kch), build_graph(nodes, pch)


def binom_step_holds(n: int, k: int, s: int) -> bool:
    """binom(s,k+1)/binom(n,k+1) == binom(s,k)/binom(n,k) * (s-k)/(n-k), exactly."""
    lhs = Fraction(math.comb(s, k + 1), math.comb(n, k + 1))
    rhs = Fraction(math.comb(s, k), math.comb(n, k)) * Fraction(s - k, n - k)
    return lhs == rhs
