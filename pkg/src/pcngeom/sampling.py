"""Uniform wealth sampling, Monte Carlo estimates of r(G) and rho, throughput."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .feasibility import feasible_wealth_set, is_feasible
from .network import ChannelGraph, WealthVector, compositions
from .rng import chunk_sizes, make_rng

CHUNK = 1000
DEFAULT_RETRY_BUDGET = 10**4


def count_wealth_distributions(C: int, n: int) -> int:
    if C < 0 or n < 1:
        raise ValueError("need C >= 0 and n >= 1")
    return math.comb(C + n - 1, n - 1)


def enumerate_wealth(C: int, n: int) -> Iterator[tuple[int, ...]]:
    return compositions(C, n)


def sample_wealth(C: int, n: int, rng: np.random.Generator, nodes: Sequence[str] | None = None) -> WealthVector:
    """Exactly uniform draw from the lattice points of W(C, n).

    Picks n-1 bar positions among C+n-1 slots without replacement; the gaps
    between bars are the coin counts (stars and bars).
    """
    if C < 0 or n < 1:
        raise ValueError("need C >= 0 and n >= 1")
    nodes = tuple(nodes) if nodes is not None else tuple(str(i) for i in range(n))
    if n == 1:
        return WealthVector(nodes, (C,))
    bars = np.sort(rng.choice(C + n - 1, size=n - 1, replace=False))
    edges = np.concatenate(([-1], bars, [C + n - 1]))
    return WealthVector(nodes, tuple(int(x) for x in np.diff(edges) - 1))


@dataclass(frozen=True)
class EstimatorReport:
    estimate: float
    sample_count: int
    standard_error: float
    seed: int
    hits: int = 0
    extra: dict = field(default_factory=dict, compare=False)


def _report(hits: int, samples: int, seed: int, **extra) -> EstimatorReport:
    p = hits / samples
    return EstimatorReport(p, samples, math.sqrt(p * (1 - p) / samples), seed, hits, extra)


def _run_chunks(fn, args_list, workers: int):
    if workers <= 1 or len(args_list) <= 1:
        return [fn(*a) for a in args_list]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, *zip(*args_list)))


def _r_chunk(g: ChannelGraph, seed: int, chunk: int, size: int) -> int:
    rng = make_rng(seed, chunk)
    C, n = g.total_capacity, g.n
    return sum(is_feasible(g, sample_wealth(C, n, rng, g.nodes)).feasible for _ in range(size))


def estimate_r(g: ChannelGraph, samples: int, seed: int, workers: int = 1) -> EstimatorReport:
    """Fraction of uniformly drawn wealth distributions that are feasible in ``g``."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    sizes = chunk_sizes(samples, CHUNK)
    hits = sum(_run_chunks(_r_chunk, [(g, seed, i, s) for i, s in enumerate(sizes)], workers))
    return _report(hits, samples, seed)


def exact_r(g: ChannelGraph) -> Fraction:
    """Relative volume |W_G| / |W(C,n)| by testing every wealth distribution."""
    C, n = g.total_capacity, g.n
    hits = sum(is_feasible(g, w).feasible for w in enumerate_wealth(C, n))
    return Fraction(hits, count_wealth_distributions(C, n))


@dataclass(frozen=True)
class PaymentModel:
    """Payment amounts and payer/payee selection.

    ``amounts`` is a single amount or a list sampled uniformly.  ``pairs``
    restricts the ordered (payer, payee) pairs; default is every ordered pair
    of distinct nodes with equal weight.
    """

    amounts: int | tuple[int, ...] = 1
    pairs: tuple[tuple[str, str], ...] | None = None

    def __post_init__(self):
        if self.pairs is not None and any(a == b for a, b in self.pairs):
            raise ValueError("payer and payee must differ")

    def _pairs(self, g: ChannelGraph):
        if self.pairs is not None:
            return list(self.pairs)
        return [(a, b) for a in g.nodes for b in g.nodes if a != b]

    def draw(self, g: ChannelGraph, rng: np.random.Generator) -> tuple[str, str, int]:
        pairs = self._pairs(g)
        a, b = pairs[int(rng.integers(len(pairs)))]
        if isinstance(self.amounts, int):
            amt = self.amounts
        else:
            amt = int(self.amounts[int(rng.integers(len(self.amounts)))])
        return a, b, amt


class RejectionBudgetExceeded(RuntimeError):
    pass


def sample_feasible_wealth(g: ChannelGraph, rng, budget: int = DEFAULT_RETRY_BUDGET) -> WealthVector:
    for _ in range(budget):
        w = sample_wealth(g.total_capacity, g.n, rng, g.nodes)
        if is_feasible(g, w).feasible:
            return w
    raise RejectionBudgetExceeded(
        f"no feasible wealth vector after {budget} draws; r(G) is too small for rejection sampling"
    )


def _payment_infeasible(g, w: WealthVector, payer, payee, amount) -> bool:
    if w[payer] < amount:
        return True
    return not is_feasible(g, w.shifted(payer, payee, amount)).feasible


def _rho_chunk(g, model, seed, chunk, size, budget) -> int:
    rng = make_rng(seed, chunk)
    bad = 0
    for _ in range(size):
        w = sample_feasible_wealth(g, rng, budget)
        payer, payee, amount = model.draw(g, rng)
        bad += _payment_infeasible(g, w, payer, payee, amount)
    return bad


def estimate_rho(
    g: ChannelGraph,
    model: PaymentModel,
    samples: int,
    seed: int,
    workers: int = 1,
    budget: int = DEFAULT_RETRY_BUDGET,
) -> EstimatorReport:
    """Expected rate of infeasible payments.

    Each sample draws a feasible wealth vector (rejection from W(C,n)) and a
    payment from ``model``; a payer who owns less than the amount counts as
    infeasible.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    sizes = chunk_sizes(samples, CHUNK)
    bad = sum(
        _run_chunks(_rho_chunk, [(g, model, seed, i, s, budget) for i, s in enumerate(sizes)], workers)
    )
    return _report(bad, samples, seed)


def exact_rho(g: ChannelGraph, amount: int, pairs=None) -> Fraction:
    """rho for a fixed amount with feasible wealth uniform on W_G, by enumeration."""
    feas = feasible_wealth_set(g)
    idx = g.index
    pairs = pairs or [(a, b) for a in g.nodes for b in g.nodes if a != b]
    bad = 0
    for w in feas:
        for a, b in pairs:
            i, j = idx[a], idx[b]
            if w[i] < amount:
                bad += 1
                continue
            w2 = list(w)
            w2[i] -= amount
            w2[j] += amount
            bad += tuple(w2) not in feas
    return Fraction(bad, len(feas) * len(pairs))


def throughput(zeta, rho):
    """Sustainable off-chain payments per second, zeta / rho.

    Exact when given ints/Fractions.  ``rho == 0`` yields ``math.inf``: no
    payment ever needs the chain, so the rate is unbounded.
    """
    if zeta < 0:
        raise ValueError("zeta must be >= 0")
    if not 0 <= rho <= 1:
        raise ValueError("rho must lie in [0, 1]")
    if rho == 0:
        return math.inf
    if isinstance(zeta, (int, Fraction)) and isinstance(rho, (int, Fraction)):
        return Fraction(zeta) / Fraction(rho)
    return zeta / rho


def required_rho(zeta, target):
    """Largest infeasible rate that still sustains ``target`` payments per second."""
    if isinstance(zeta, (int, Fraction)) and isinstance(target, (int, Fraction)):
        return Fraction(zeta) / Fraction(target)
    return zeta / target
