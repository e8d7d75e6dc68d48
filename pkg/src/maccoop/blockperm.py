"""Permutations that leave a zero in every k x k block of a (0,1)-matrix.

For a 0/1 matrix with N ones, a uniformly random pair of row and column
permutations leaves some all-ones full block with probability at most
``(mn/k^2) (N e^2/(mn))^k``.  When that number is below one a good pair
exists; this module evaluates the bound and actually finds such pairs.

Permutations follow the convention ``perm[p] = original index placed at
position p``; block ``(s, t)`` covers positions ``[sk, (s+1)k) x [tk, (t+1)k)``.
Partial blocks at the edges are not constrained.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .code import block_groupings

__all__ = [
    "ZeroOneMatrix",
    "PermutationSearch",
    "VectorSearch",
    "existence_bound",
    "vector_existence_bound",
    "binomial_bounds",
    "find_permutations",
    "verify_permutations",
    "find_permutation_vector",
    "verify_vector",
    "block_violations",
]

EXHAUSTIVE_LIMIT = 10**7


@dataclass(frozen=True, eq=False)
class ZeroOneMatrix:
    bits: np.ndarray

    def __post_init__(self):
        b = np.array(self.bits)
        if b.ndim != 2 or min(b.shape) < 1:
            raise ValueError("need a non-empty 2-d 0/1 matrix")
        if not np.isin(b, (0, 1)).all():
            raise ValueError("entries must be 0 or 1")
        b = b.astype(np.int8)
        b.setflags(write=False)
        object.__setattr__(self, "bits", b)

    @property
    def rows(self) -> int:
        return self.bits.shape[0]

    @property
    def cols(self) -> int:
        return self.bits.shape[1]

    @property
    def ones_count(self) -> int:
        return int(self.bits.sum())


def _check_k(k: int, *dims: int) -> None:
    if not 1 <= k <= min(dims):
        raise ValueError(f"block size k={k} must satisfy 1 <= k <= {min(dims)}")


def existence_bound(m: int, n: int, k: int, n_ones: int) -> float:
    """``(mn/k^2) (N_A e^2/(mn))^k``; below one certifies a good pair exists."""
    _check_k(k, m, n)
    if n_ones < 0:
        raise ValueError("n_ones must be nonnegative")
    return (m * n / k**2) * (n_ones * math.e**2 / (m * n)) ** k


def vector_existence_bound(m: int, k: int, n_ones: int) -> float:
    """``(m/k) (N_A e/m)^k``, the analogue for a 0/1 vector split into k-segments."""
    _check_k(k, m)
    if n_ones < 0:
        raise ValueError("n_ones must be nonnegative")
    return (m / k) * (n_ones * math.e / m) ** k


def binomial_bounds(n: int, k: int) -> tuple[float, int, float]:
    """``((n/k)^k, C(n,k), (ne/k)^k)``; the outer two bracket the middle."""
    _check_k(k, n)
    return (n / k) ** k, math.comb(n, k), (n * math.e / k) ** k


def _as_bits(a) -> np.ndarray:
    return a.bits if isinstance(a, ZeroOneMatrix) else ZeroOneMatrix(a).bits


def _check_perm(p, size: int, name: str) -> np.ndarray:
    p = np.asarray(p, dtype=np.int64)
    if p.shape != (size,) or not np.array_equal(np.sort(p), np.arange(size)):
        raise ValueError(f"{name} is not a permutation of range({size})")
    return p


def block_violations(bits: np.ndarray, k: int, perm1, perm2) -> np.ndarray:
    """Boolean ``(m//k, n//k)`` array marking full blocks that are all ones."""
    m, n = bits.shape
    s, t = m // k, n // k
    sub = bits[np.ix_(perm1[: s * k], perm2[: t * k])]
    return sub.reshape(s, k, t, k).min(axis=(1, 3)) == 1


def verify_permutations(a, k: int, perm1, perm2) -> tuple[int, int] | None:
    """None if every full block has a zero, else the first violating ``(s, t)``."""
    bits = _as_bits(a)
    _check_k(k, *bits.shape)
    p1 = _check_perm(perm1, bits.shape[0], "perm1")
    p2 = _check_perm(perm2, bits.shape[1], "perm2")
    bad = np.argwhere(block_violations(bits, k, p1, p2))
    if bad.size == 0:
        return None
    return int(bad[0, 0]), int(bad[0, 1])


@dataclass(frozen=True, eq=False)
class PermutationSearch:
    found: bool
    perm1: np.ndarray
    perm2: np.ndarray
    violations: int
    strategy: str
    seed: int
    bound: float
    attempts: int

    @property
    def certificate(self) -> str:
        return "certified" if self.bound < 1 else "uncertified"

    def to_dict(self) -> dict:
        return {
            "found": self.found,
            "perm1": self.perm1.tolist(),
            "perm2": self.perm2.tolist(),
            "violations": self.violations,
            "strategy": self.strategy,
            "seed": self.seed,
            "bound": self.bound,
            "certificate": self.certificate,
            "attempts": self.attempts,
        }


def _labels_to_perm(labels: np.ndarray) -> np.ndarray:
    return np.argsort(labels, kind="stable")


def _exhaustive(bits: np.ndarray, k: int):
    m, n = bits.shape
    s, t = m // k, n // k
    rows = np.array(list(block_groupings(m, s, k)))
    cols = np.array(list(block_groupings(n, t, k)))
    # zero_in[g, a, c]: row group a of grouping g has a zero in column c
    zero = (bits == 0).astype(np.int64)
    zero_in = np.stack([
        np.stack([zero[lab == a].max(axis=0) for a in range(s)]) for lab in rows
    ])
    col_ind = np.stack([np.stack([(lab == b) for b in range(t)]) for lab in cols]).astype(np.int64)
    tested = 0
    chunk = max(1, 1_000_000 // max(1, len(cols) * s * t))
    for g0 in range(0, len(rows), chunk):
        hits = np.einsum("gac,hbc->ghab", zero_in[g0 : g0 + chunk], col_ind)
        ok = (hits > 0).all(axis=(2, 3))
        tested += ok.size
        idx = np.argwhere(ok)
        if idx.size:
            g, h = idx[0]
            return _labels_to_perm(rows[g0 + g]), _labels_to_perm(cols[h]), tested
    return None, None, tested


def _repair(bits, k, p1, p2, max_swaps):
    """Greedy swaps of a row or column of an all-ones block with any other position."""
    bad = block_violations(bits, k, p1, p2)
    count = int(bad.sum())
    for _ in range(max_swaps):
        if count == 0:
            break
        s, t = np.argwhere(bad)[0]
        best = (count, None)
        for perm, start in ((p1, s * k), (p2, t * k)):
            for a in range(start, start + k):
                for b in range(perm.size):
                    if start <= b < start + k:
                        continue
                    perm[a], perm[b] = perm[b], perm[a]
                    c = int(block_violations(bits, k, p1, p2).sum())
                    perm[a], perm[b] = perm[b], perm[a]
                    if c < best[0]:
                        best = (c, (perm, a, b))
        if best[1] is None:
            break
        perm, a, b = best[1]
        perm[a], perm[b] = perm[b], perm[a]
        bad = block_violations(bits, k, p1, p2)
        count = int(bad.sum())
    return count


def find_permutations(a, k: int, budget: int = 10_000, seed: int = 0) -> PermutationSearch:
    """Search for row/column permutations with a zero in every full k x k block.

    Small instances (``m! n! <= 10^7``) are searched exhaustively over block
    assignments.  Otherwise each restart draws a uniform random pair and
    repairs it greedily with at most ``m + n`` swaps.  Failure is reported as
    ``found=False`` with the violation count of the best attempt.
    """
    bits = _as_bits(a)
    m, n = bits.shape
    _check_k(k, m, n)
    if budget < 1:
        raise ValueError("budget must be at least 1")
    bound = existence_bound(m, n, k, int(bits.sum()))
    ident1, ident2 = np.arange(m), np.arange(n)
    if not block_violations(bits, k, ident1, ident2).any():
        return PermutationSearch(True, ident1, ident2, 0, "identity", seed, bound, 1)
    if math.factorial(m) * math.factorial(n) <= EXHAUSTIVE_LIMIT:
        p1, p2, tested = _exhaustive(bits, k)
        if p1 is not None:
            return PermutationSearch(True, p1, p2, 0, "exhaustive", seed, bound, tested)
        fewest = _min_violations_exhaustive(bits, k)
        return PermutationSearch(False, ident1, ident2, fewest[0], "exhaustive", seed, bound, tested)
    rng = np.random.default_rng(seed)
    best = (math.inf, ident1, ident2)
    for attempt in range(1, budget + 1):
        p1, p2 = rng.permutation(m), rng.permutation(n)
        count = _repair(bits, k, p1, p2, m + n)
        if count < best[0]:
            best = (count, p1, p2)
        if count == 0:
            return PermutationSearch(True, p1, p2, 0, "random+repair", seed, bound, attempt)
    return PermutationSearch(False, best[1], best[2], int(best[0]), "random+repair", seed, bound, budget)


def _min_violations_exhaustive(bits, k):
    # only used on failure, so a plain scan over block assignments is fine
    m, n = bits.shape
    s, t = m // k, n // k
    best = (math.inf, None)
    for rl in block_groupings(m, s, k):
        p1 = _labels_to_perm(rl)
        for cl in block_groupings(n, t, k):
            c = int(block_violations(bits, k, p1, _labels_to_perm(cl)).sum())
            if c < best[0]:
                best = (c, None)
    return best


@dataclass(frozen=True, eq=False)
class VectorSearch:
    found: bool
    perm: np.ndarray
    violations: int
    bound: float

    @property
    def certificate(self) -> str:
        return "certified" if self.bound < 1 else "uncertified"


def verify_vector(a, k: int, perm) -> int | None:
    """None if every full k-segment of ``a[perm]`` has a zero, else the first bad segment."""
    a = np.asarray(a)
    _check_k(k, a.size)
    p = _check_perm(perm, a.size, "perm")
    segs = a[p[: (a.size // k) * k]].reshape(-1, k).min(axis=1)
    bad = np.nonzero(segs == 1)[0]
    return None if bad.size == 0 else int(bad[0])


def find_permutation_vector(a, k: int) -> VectorSearch:
    """Place zeros at positions ``0, k, 2k, ...`` and fill the rest in index order.

    This succeeds exactly when there are at least ``floor(m/k)`` zeros, so no
    randomized fallback is needed.
    """
    a = np.asarray(a)
    if a.ndim != 1 or not np.isin(a, (0, 1)).all():
        raise ValueError("need a 0/1 vector")
    m = a.size
    _check_k(k, m)
    segments = m // k
    bound = vector_existence_bound(m, k, int(a.sum()))
    zeros = list(np.nonzero(a == 0)[0])
    ones = list(np.nonzero(a == 1)[0])
    lead = zeros[:segments]
    rest = sorted(zeros[segments:] + ones)
    perm = np.empty(m, dtype=np.int64)
    slots = [s * k for s in range(len(lead))]
    perm[slots] = lead
    mask = np.ones(m, dtype=bool)
    mask[slots] = False
    perm[mask] = rest
    segs = a[perm[: segments * k]].reshape(-1, k).min(axis=1) if segments else np.zeros(0)
    violations = int((segs == 1).sum())
    return VectorSearch(violations == 0, perm, violations, bound)
