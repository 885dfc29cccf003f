"""
Selfish fees drain channels
===========================

A routing node earns more when its balance sits on the side with the higher
fee.  Pushing liquidity around cycles to maximize the total fee potential
empties channels, roughly one per independent cycle.
"""

import numpy as np

from pcngeom.depletion import depletion_correlation, depletion_experiment

rows = depletion_experiment(n=20, m=30, trials=50, seed=0)
ranks = np.array([r.circuit_rank for r in rows])
depleted = np.array([r.depleted for r in rows])

for k in np.unique(ranks):
    sel = depleted[ranks == k]
    print(f"circuit rank {k:2d}: depleted channels {sel.mean():5.2f} over {len(sel)} trials")
print(f"pearson r = {depletion_correlation(rows):.3f}")
