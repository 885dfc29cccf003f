"""
Replenishing a drained network
==============================

Start from the state a fee-maximizing network drifts into, then look for
the state with the same wealth that is closest to half-full channels.  The
real-valued optimum is rounded back to whole coins inside a small cube.
"""

from pcngeom import wealth_of
from pcngeom.depletion import FeeSchedule, maximize_potential, random_connected_graph
from pcngeom.network import LiquidityState
from pcngeom.replenish import ReplenishmentProblem, replenish, replenish_report
from pcngeom.rng import make_rng

rng = make_rng(13)
g = random_connected_graph(30, 60, rng)
start = LiquidityState.from_coords(g, [int(rng.integers(c + 1)) for c in g.capacities])
drained, _ = maximize_potential(g, wealth_of(g, start), FeeSchedule.generic(g, rng))
print("depleted channels:", len(drained.depleted()), "of", g.m)

prob = ReplenishmentProblem.create(drained)
res = replenish(prob)
rep = replenish_report(prob, res)
print(f"channels in [0.4, 0.6]: {rep.band_40_60_before:.2f} -> {rep.band_40_60_after:.2f}")
print(f"channels in [0.1, 0.9]: {rep.band_10_90_before:.2f} -> {rep.band_10_90_after:.2f}")
print(f"distance: relaxed {res.dist_rho:.3f}, integer {res.dist_int:.3f}, cube radius {res.delta}")
print(f"share of coins moved: {rep.moved_fraction:.3f}")
