"""
Average versus maximal error on the contraction MAC
===================================================

The contraction MAC is deterministic with inputs {A, B, a, b} x {0, 1}.
When the second user sends 0 the lowercase symbols merge; when it sends 1
the uppercase ones do.  Its maximal-error region is strictly smaller than
its average-error region, and the support functions show by how much.
"""
import numpy as np

from maccoop.capacity import (
    dueck_avg_lower,
    dueck_gap_report,
    dueck_max_upper,
    dueck_witness,
    gap_cin_choice,
    mac_avg_calpha,
)
from maccoop.channel import contraction_mac

mac = contraction_mac()
print("shape (|X1|, |X2|, |Y|):", mac.shape)

# closed forms across alpha: the lower bound on the average-error support
# function beats the upper bound on the maximal-error one everywhere inside (0, 1)
print(f"{'alpha':>6} {'p*':>8} {'avg lower':>10} {'max upper':>10} {'gap':>8}")
for row in dueck_gap_report(np.linspace(0, 1, 11)):
    print(f"{row['alpha']:6.2f} {row['pstar']:8.4f} {row['avg_lower']:10.5f} "
          f"{row['max_upper']:10.5f} {row['gap']:8.5f}")

# at alpha = 1/2 the numbers are exact: log3 - 7/18 against log3 - 1/2
print("gap at 1/2:", dueck_avg_lower(0.5) - dueck_max_upper(0.5), "= 1/9")

# the optimizer, seeded with the witness input, can only do better
p1, p2 = dueck_witness(0.5)
best = mac_avg_calpha(mac, 0.5, seeds=[(p1, p2)], full=True)
print("best found C^1/2 (lower bound):", round(best.value, 6))
print("maximizing inputs:", [np.round(p, 4).tolist() for p in best.params])

# cooperation with total input capacity below the gap cannot close it
print(gap_cin_choice(1 / 9))
