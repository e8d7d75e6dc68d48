"""
Spreading the ones of a 0/1 matrix
==================================

Given a 0/1 matrix and a block side k, look for row and column
permutations after which every full k x k block contains a zero.  When the
counting bound (mn/k^2)(N e^2/(mn))^k is below one such a pair must exist.
"""
import json
from pathlib import Path

import numpy as np

from maccoop.blockperm import (
    existence_bound,
    find_permutation_vector,
    find_permutations,
    verify_permutations,
)

bits = np.array(json.loads((Path(__file__).parent / "data" / "ones_block.json").read_text()))
print(bits)
print("identity fails at block", verify_permutations(bits, 3, np.arange(6), np.arange(6)))

res = find_permutations(bits, 3)
print("found:", res.found, "by", res.strategy, "bound", round(res.bound, 3), res.certificate)
print(bits[np.ix_(res.perm1, res.perm2)])

# a bound below one on a larger sparse instance
rng = np.random.default_rng(1)
m = n = 12
k = 3
ones = 0
while existence_bound(m, n, k, ones + 1) < 1:
    ones += 1
big = np.zeros(m * n, dtype=int)
big[rng.choice(m * n, ones, replace=False)] = 1
big = big.reshape(m, n)
res = find_permutations(big, k, seed=1)
print(f"{m}x{n}, k={k}, {ones} ones: bound {res.bound:.3f}, found {res.found} via {res.strategy}")

# the one-dimensional version has an explicit answer: zeros go to k-strided slots
vec = find_permutation_vector([1, 1, 0, 0], 2)
print("vector permutation:", vec.perm.tolist())
