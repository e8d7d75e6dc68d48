"""
Capacity regions from support functions
=======================================

A convex region closed under projections onto the axes is the
intersection of the half-planes alpha x + (1 - alpha) y <= C^alpha.
Sampling C^alpha and intersecting recovers the region; adding
conferencing links enlarges it, but only by at most the link capacity
weighted by alpha.
"""
import itertools

import numpy as np

from maccoop.capacity import (
    OptimizerConfig,
    SupportCurve,
    conferencing_calpha,
    continuity_checks,
    mac_avg_calpha,
    region_from_support,
    rstar,
)
from maccoop.channel import binary_adder_mac

mac = binary_adder_mac()
alphas = np.linspace(0, 1, 11)

curve = SupportCurve.sample(lambda a: mac_avg_calpha(mac, a), alphas)
region = region_from_support(curve, kind="no cooperation")
print("binary adder MAC, vertices:", np.round(region.vertices, 4).tolist())

config = OptimizerConfig(restarts=8)
conf = SupportCurve.sample(lambda a: conferencing_calpha(mac, 0.25, 0.25, a, config=config), alphas)
bigger = region_from_support(conf, kind="conferencing 0.25")
print("with C12 = C21 = 0.25:", np.round(bigger.vertices, 4).tolist())
print("sum rate", 2 * region.c_alpha(0.5), "->", round(2 * bigger.c_alpha(0.5), 4))

# with unlimited links the users act as one sender of a 3-output channel
print("single-user rates with unlimited links:", [round(x, 4) for x in rstar(mac, 10, 10)])

# removing a link costs at most its capacity times the matching weight
grid = list(itertools.product((0.0, 0.25, 0.5), repeat=2))
rep = continuity_checks(mac, grid, 0.5, config=config)
for row in rep["rows"]:
    print(f"C({row['c12']}, {row['c21']}) = {row['value']:.4f}  <= {row['drop_c21_bound']:.4f}"
          f" and <= {row['drop_c12_bound']:.4f}")
print("all hold:", rep["all_hold"])
