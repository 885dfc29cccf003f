"""
Scarcity pricing keeps a cycle balanced
=======================================

Three nodes on a cycle route unit payments around in both directions.  With
flat fees one direction is always cheaper and the channels end up one-sided.
When the price of the next unit grows as a channel side runs dry, the
cheapest route keeps changing and balances stay in the middle.
"""

from pcngeom.convex import TierSchedule, routing_simulation, summarize_liquidity, triangle_benchmark
from pcngeom.rng import make_rng

g = triangle_benchmark(100)
for name, tiers in [("linear", TierSchedule.linear(g, 100)), ("quadratic", TierSchedule.quadratic(g, 100))]:
    s = summarize_liquidity(routing_simulation(g, tiers, 10_000, make_rng(3)))
    medians = ", ".join(f"{m:.2f}" for m in s.median_relative)
    print(f"{name:9s} medians [{medians}]  fees {s.network_fees}  success {s.success_rate:.3f}")
