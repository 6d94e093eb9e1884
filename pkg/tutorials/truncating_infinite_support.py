"""
Truncating an infinitely supported pmf
======================================

A product of geometric laws on the positive quadrant is cut to the smallest
square holding all but a tiny mass; the rest forms a tail treated as one piece.
"""

import numpy as np

from isocone import truncated_level_partition
from isocone.limit_law import truncate_infinite_pmf

t = truncate_infinite_pmf(lambda i, j: 0.5**i * 0.5**j, mass_tol=1e-6)
print("square side:", t.dims, "tail mass:", t.tail_mass)

# keep the five heaviest level sets, lump everything else
lp = truncated_level_partition(t.preorder, -t.masses, 5)
print("kept values:", [round(-ls.value, 5) for ls in lp.sets])
print("tail size:", len(lp.tail_set), "gap:", lp.epsilon_tilde)
print("mass in kept sets:", np.sum([t.masses[ls.indices].sum() for ls in lp.sets]))
