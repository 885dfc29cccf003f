"""
A three-node network, step by step
==================================

Three users x, y, z with channels of capacity 3, 7 and 11.  We check a
wealth distribution, list every liquidity state that realizes it, and try
two payments in a row.
"""

from pcngeom import build_graph
from pcngeom.feasibility import is_feasible, payment_feasible
from pcngeom.fibers import fiber_enumerate, strict_circulations_enumerate

g = build_graph("xyz", [(("x", "y"), 3), (("y", "z"), 7), (("x", "z"), 11)])

omega = (5, 6, 10)
res = is_feasible(g, omega)
print("wealth", omega, "feasible:", res.feasible)

# Every state with the same wealth differs from the witness by a circulation.
for state in fiber_enumerate(g, omega):
    print("  balances", state.balances)
print("strict circulations from the witness:", len(strict_circulations_enumerate(g, res.witness)))

# y pays z two coins, then z tries to pay x ten.
first = payment_feasible(g, omega, "y", "z", 2)
print("y -> z, 2:", first.feasible, "new wealth", first.wealth.values)
second = payment_feasible(g, first.wealth, "z", "x", 10)
print("z -> x, 10:", second.feasible, "blocking cut", sorted(second.certificate_cut))
