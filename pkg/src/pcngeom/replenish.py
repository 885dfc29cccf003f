"""Coordinated replenishment: the fiber element closest to a target state.

Coordinates follow the 2m-dimensional layout ``(lam(e,u), lam(e,v))`` per
channel.  Because ``lam(e,v) = c_e - lam(e,u)`` the problem reduces to one
variable per channel,

    minimize  sum_e (x_e - a_e)^2 + (c_e - x_e - b_e)^2
    s.t.      N x = r,  0 <= x <= c

where ``N`` is the node/channel incidence matrix (+1 at the first endpoint)
and ``r`` fixes every node's wealth.  Each term equals 2 (x_e - t_e)^2 plus a
constant with ``t_e = (a_e + c_e - b_e) / 2``, so the relaxation is the
Euclidean projection of ``t`` onto an affine set intersected with a box.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .fibers import Circulation, circulation_between
from .flow import FlowArc, FlowNetwork, min_cost_flow
from .network import ChannelGraph, LiquidityState, NetworkError, wealth_of

log = logging.getLogger(__name__)

MAX_WIDENINGS = 6


@dataclass(frozen=True)
class ReplenishmentProblem:
    graph: ChannelGraph
    lam: LiquidityState
    x0: np.ndarray  # length 2m

    def __post_init__(self):
        g = self.graph
        if not g.is_two_party:
            raise NetworkError("replenishment is implemented for 2-party channels")
        x0 = np.asarray(self.x0, dtype=float)
        if x0.shape != (2 * g.m,):
            raise NetworkError(f"target must have {2 * g.m} coordinates")
        caps = np.repeat(np.array(g.capacities, dtype=float), 2)
        if np.any(x0 < 0) or np.any(x0 > caps):
            raise NetworkError("target coordinates must lie in [0, c_e]")
        object.__setattr__(self, "x0", x0)

    @classmethod
    def create(cls, lam: LiquidityState, target: LiquidityState | np.ndarray | None = None):
        g = lam.graph
        if target is None:
            target = LiquidityState.balanced(g)
        x0 = target.flat if isinstance(target, LiquidityState) else np.asarray(target, dtype=float)
        return cls(g, lam, x0)

    @property
    def caps(self) -> np.ndarray:
        return np.array(self.graph.capacities, dtype=float)

    @property
    def center(self) -> np.ndarray:
        """Per-channel target t_e of the reduced problem."""
        a, b = self.x0[0::2], self.x0[1::2]
        return (a + self.caps - b) / 2

    def incidence(self) -> np.ndarray:
        g = self.graph
        N = np.zeros((g.n, g.m))
        for e in range(g.m):
            u, v = g.ends_idx(e)
            N[u, e] = 1.0
            N[v, e] = -1.0
        return N

    def distance(self, x_first) -> float:
        """Euclidean distance to x0 of the state whose first-endpoint balances are ``x_first``."""
        x = np.asarray(x_first, dtype=float)
        full = np.empty(2 * len(x))
        full[0::2] = x
        full[1::2] = self.caps - x
        return float(np.linalg.norm(full - self.x0))


@dataclass(frozen=True)
class RelaxationResult:
    x: np.ndarray  # first-endpoint balances (length m)
    iterations: int
    kkt_residual: float
    polished: bool

    def full(self, caps) -> np.ndarray:
        out = np.empty(2 * len(self.x))
        out[0::2] = self.x
        out[1::2] = np.asarray(caps, dtype=float) - self.x
        return out


def _nullspace(N: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    if N.shape[1] == 0:
        return np.zeros((0, 0))
    _, s, vt = np.linalg.svd(N)
    rank = int(np.sum(s > tol * max(1.0, s.max() if s.size else 0.0)))
    return vt[rank:].T


def _kkt(N, x, t, lo, hi, atol=1e-7):
    """Stationarity residual with sign conditions on the active bounds."""
    g = x - t
    free = (x > lo + atol) & (x < hi - atol)
    if N.shape[0] and N.shape[1]:
        mu, *_ = np.linalg.lstsq(N[:, free].T if free.any() else N.T, g[free] if free.any() else g, rcond=None)
        r = g - N.T @ mu
    else:
        r = g
    res = np.abs(r[free]).max(initial=0.0)
    at_lo = (~free) & (x <= lo + atol)
    at_hi = (~free) & (x >= hi - atol)
    res = max(res, np.maximum(-r[at_lo], 0).max(initial=0.0), np.maximum(r[at_hi], 0).max(initial=0.0))
    return float(res)


def _polish(N, x, t, lo, hi, base, atol=1e-7):
    """Exact projection given the active set guessed by the iterative solver."""
    fixed = (x <= lo + atol) | (x >= hi - atol)
    xf = np.where(x <= lo + atol, lo, np.where(x >= hi - atol, hi, x))
    free = ~fixed
    if not free.any():
        return xf
    # x_free = t_free + d with N_free d = r - N x_at(t on free)
    Nf = N[:, free]
    rhs = N @ base - N[:, fixed] @ xf[fixed] - Nf @ t[free]
    d, *_ = np.linalg.lstsq(Nf, rhs, rcond=None)
    # minimum-norm d lies in the row space of Nf, which is the projection we want
    out = xf.copy()
    out[free] = t[free] + d
    if np.any(out < lo - 1e-9) or np.any(out > hi + 1e-9):
        return None
    if np.abs(N @ out - N @ base).max(initial=0.0) > 1e-7:
        return None
    return np.clip(out, lo, hi)


def continuous_relaxation(prob: ReplenishmentProblem, tol: float = 1e-9, max_iter: int = 200_000) -> RelaxationResult:
    """Projection of the target onto the real fiber polytope.

    Dykstra's alternating projections between the affine fiber (closed form via
    the nullspace of the incidence matrix) and the capacity box, stopped once an
    iteration moves less than ``tol``, then polished on the detected active set.
    """
    g = prob.graph
    base = np.array(prob.lam.coords, dtype=float)
    lo, hi = np.zeros(g.m), prob.caps
    t = prob.center
    N = prob.incidence()
    Q = _nullspace(N)
    if Q.shape[1] == 0:
        return RelaxationResult(base.copy(), 0, 0.0, True)

    def proj_affine(y):
        return base + Q @ (Q.T @ (y - base))

    x = np.clip(proj_affine(t), lo, hi)
    y = t.copy()
    p = np.zeros(g.m)
    q = np.zeros(g.m)
    it = 0
    for it in range(1, max_iter + 1):
        a = proj_affine(y + p)
        p = y + p - a
        y_new = np.clip(a + q, lo, hi)
        q = a + q - y_new
        step = np.abs(y_new - y).max()
        y = y_new
        if step < tol:
            break
    x = proj_affine(y)
    polished = False
    px = _polish(N, x, t, lo, hi, base)
    if px is not None:
        x, polished = px, True
    else:
        x = np.clip(x, lo, hi)
    return RelaxationResult(x, it, _kkt(N, x, t, lo, hi), polished)


def delta_radius(x_rho, x0, m: int) -> int:
    """ceil(sqrt(||x_rho - x0||_2 / m) + 1), at least 1."""
    if m <= 0:
        return 1
    dist = float(np.linalg.norm(np.asarray(x_rho, dtype=float) - np.asarray(x0, dtype=float)))
    return max(1, math.ceil(math.sqrt(dist / m) + 1 - 1e-12))


def _repair_in_cube(prob: ReplenishmentProblem, x_rho: np.ndarray, delta: int) -> LiquidityState | None:
    """Exact minimizer of the distance to x0 over integer fiber points in the cube.

    The objective is separable and convex per channel, so it becomes a
    min-cost flow with one unit arc per admissible increment, priced by the
    marginal cost of that increment.
    """
    g, lam = prob.graph, prob.lam
    a, b = prob.x0[0::2], prob.x0[1::2]
    arcs = []
    supply = [0] * g.n
    lows = []
    scale = 1 << 20  # marginal costs scaled to integers
    for e, ch in enumerate(g.channels):
        c = ch.capacity
        L = max(0, math.ceil(x_rho[e] - delta - 1e-9))
        U = min(c, math.floor(x_rho[e] + delta + 1e-9))
        if L > U:
            return None
        lows.append(L)
        u, v = g.ends_idx(e)
        d = L - lam.balances[e][0]
        supply[u] += d
        supply[v] -= d
        cost = lambda x: (x - a[e]) ** 2 + (c - x - b[e]) ** 2
        for j in range(L, U):
            # one unit v -> u raises the first endpoint's balance from j to j+1
            arcs.append(FlowArc(v, u, 1, int(round((cost(j + 1) - cost(j)) * scale))))
    net = FlowNetwork(tuple(range(g.n)), tuple(arcs), dict(enumerate(supply)))
    flow = min_cost_flow(net)
    if flow is None:
        return None
    x = list(lows)
    pos = 0
    for e, ch in enumerate(g.channels):
        U = min(ch.capacity, math.floor(x_rho[e] + delta + 1e-9))
        for _ in range(lows[e], U):
            x[e] += flow[pos]
            pos += 1
    return LiquidityState.from_coords(g, x)


def integer_repair(prob: ReplenishmentProblem, x_rho: np.ndarray, delta: int) -> tuple[LiquidityState, int]:
    """Closest integer fiber element inside the delta-cube around ``x_rho``.

    The cube doubles up to six times when it holds no fiber point; the current
    state is the last resort.  Returns the state and the radius actually used.
    """
    if delta < 1:
        raise ValueError("delta must be >= 1")
    d = delta
    for attempt in range(MAX_WIDENINGS + 1):
        got = _repair_in_cube(prob, x_rho, d)
        if got is not None:
            return got, d
        if attempt < MAX_WIDENINGS:
            log.info("no integer fiber point within delta=%d, widening to %d", d, 2 * d)
            d *= 2
    log.warning("falling back to the current liquidity state")
    return prob.lam, d


@dataclass(frozen=True)
class ReplenishmentResult:
    x_rho: np.ndarray      # length 2m
    x_int: LiquidityState
    delta: int
    dist_rho: float
    dist_int: float
    circulation: Circulation
    kkt_residual: float


def replenish(prob: ReplenishmentProblem) -> ReplenishmentResult:
    g = prob.graph
    relax = continuous_relaxation(prob)
    x_rho = relax.full(prob.caps)
    delta = delta_radius(x_rho, prob.x0, g.m)
    x_int, used = integer_repair(prob, relax.x, delta)
    if wealth_of(g, x_int) != wealth_of(g, prob.lam):
        raise AssertionError("repaired state left the fiber")
    return ReplenishmentResult(
        x_rho,
        x_int,
        used,
        float(np.linalg.norm(x_rho - prob.x0)),
        prob.distance(x_int.coords),
        circulation_between(prob.lam, x_int),
        relax.kkt_residual,
    )


@dataclass(frozen=True)
class ReplenishmentReport:
    band_40_60_before: float
    band_40_60_after: float
    band_10_90_before: float
    band_10_90_after: float
    moved_fraction: float
    dist_rho: float
    dist_int: float
    delta: int
    circulation: tuple[int, ...]

    def as_dict(self) -> dict:
        d = dict(self.__dict__)
        d["circulation"] = list(self.circulation)
        return d


def band_fraction(lam: LiquidityState, lo: float, hi: float) -> float:
    if lam.graph.m == 0:
        return 0.0
    rel = lam.relative()
    return float(np.mean((rel >= lo) & (rel <= hi)))


def replenish_report(prob: ReplenishmentProblem, res: ReplenishmentResult) -> ReplenishmentReport:
    lam, new = prob.lam, res.x_int
    C = prob.graph.total_capacity
    moved = float(np.abs(new.flat - lam.flat).sum()) / (2 * C) if C else 0.0
    return ReplenishmentReport(
        band_fraction(lam, 0.4, 0.6),
        band_fraction(new, 0.4, 0.6),
        band_fraction(lam, 0.1, 0.9),
        band_fraction(new, 0.1, 0.9),
        moved,
        res.dist_rho,
        res.dist_int,
        res.delta,
        res.circulation.net(),
    )
