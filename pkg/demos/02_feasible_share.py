"""
How much of the wealth simplex can a network realize?
=====================================================

For the path Alice - Bob - Carol only about half of all ways to split 21
coins among three people are reachable by some channel state.
"""

from pcngeom import build_graph
from pcngeom.sampling import count_wealth_distributions, estimate_r, exact_r, throughput

g = build_graph(["Alice", "Bob", "Carol"], [(("Alice", "Bob"), 10), (("Bob", "Carol"), 11)])

print("wealth distributions of 21 coins among 3:", count_wealth_distributions(21, 3))
r = exact_r(g)
print(f"exact share of feasible ones: {r} = {float(r):.4f}")

est = estimate_r(g, samples=20_000, seed=1)
print(f"Monte Carlo: {est.estimate:.4f} +- {est.standard_error:.4f}")

# If 7 on-chain transactions per second must absorb the failed payments,
# a failure rate of 7/47000 caps the network at 47000 payments per second.
from fractions import Fraction

print("payments per second at rho = 7/47000:", throughput(7, Fraction(7, 47000)))
