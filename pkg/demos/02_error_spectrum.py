"""
From average to maximal error
=============================

The (r1, r2)-error of a code groups messages into floor(2^{n r}) blocks,
permutes rows and columns to make the worst block average as small as
possible, and reports that worst block.  At r = 0 it is the average error;
for large r it is the maximal error.
"""
import json
from pathlib import Path

import numpy as np

from maccoop.channel import DiscreteMAC
from maccoop.code import CooperationCode, avg_error, blockwise_error, error_matrix, max_error

DATA = Path(__file__).parent / "data"
mac = DiscreteMAC.from_dict(json.loads((DATA / "identity4.json").read_text()))
code = CooperationCode.from_dict(json.loads((DATA / "planted_code.json").read_text()))

em = error_matrix(code, mac)
print("messages:", code.messages, "rates:", code.rates())
print("average error:", avg_error(em), " maximal error:", max_error(em))

# the four bad pairs are invisible at r = 0 and dominate at large r;
# 16 messages are too many for the exact search, so these are upper bounds
for r in (0.0, 1 / 3, 2 / 3, 1.0, 4 / 3):
    res = blockwise_error(em, r, r, code.n, mode="heuristic", budget=50, seed=0)
    print(f"r = {r:.3f}  sizes (K1, L1, K2, L2) = {res.sizes}  error <= {res.value:.4f}")

# a small matrix where the exact minimum over permutations is cheap
e = np.array([[0.0, 1.0], [1.0, 0.0]])
exact = blockwise_error(e, 1, 0, 1)
print("2x2 example:", exact.value, exact.bound_kind, "row order", exact.perm1.tolist())
