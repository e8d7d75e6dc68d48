"""Explicit (n, M1, M2, J) cooperation codes and their exact error analysis.

Messages, alphabet symbols and channel outputs are 0-based indices.  A code
with ``J`` facilitator rounds is described by explicit lookup tables:

* ``up_maps[i][j]`` has shape ``(M_i, |V_i1|, ..., |V_ij-1|)`` and gives the
  round-j symbol encoder i sends to the facilitator;
* ``cf_maps[i][j]`` has shape ``(|U_11|..|U_1j|, |U_21|..|U_2j|)`` and gives the
  round-j reply to encoder i;
* ``channel_maps[i]`` has shape ``(M_i, |V_i1|, ..., |V_iJ|, n)`` and holds the
  codeword as input-symbol indices;
* ``decoder`` has shape ``(|Y|**n, 2)``; row ``y`` is the decoded pair for the
  output sequence whose row-major index is ``y``.
"""
from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .channel import DEFAULT_MAX_LOG_SIZE, DiscreteMAC, SizeLimitError, check_extension_size

__all__ = [
    "LinkCapacities",
    "CooperationCode",
    "Transcript",
    "ErrorMatrix",
    "ErrorProfileQuery",
    "BlockwiseResult",
    "ExactBudgetError",
    "transcript",
    "error_matrix",
    "avg_error",
    "max_error",
    "partition_size",
    "block_averages",
    "blockwise_error",
    "concatenate",
    "empty_code",
    "inverse_decoder",
    "block_groupings",
    "worker_count",
]

CAP_TOL = 1e-9
EXACT_PAIR_BUDGET = 10**7
EXACT_MAX_MESSAGES = 8


def worker_count(workers: int | None = None) -> int:
    """Resolve a worker count, capped by ``MACCOOP_THREADS`` when set."""
    n = workers if workers is not None else (os.cpu_count() or 1)
    cap = os.environ.get("MACCOOP_THREADS")
    if cap:
        n = min(n, int(cap))
    return max(1, int(n))


@dataclass(frozen=True)
class LinkCapacities:
    """Facilitator link capacities in bits per channel use.

    ``c_in[i]`` is the link from encoder i to the facilitator and ``c_out[i]``
    the link back to encoder i.
    """

    c_in: tuple[float, float]
    c_out: tuple[float, float]

    def __post_init__(self):
        object.__setattr__(self, "c_in", tuple(float(c) for c in self.c_in))
        object.__setattr__(self, "c_out", tuple(float(c) for c in self.c_out))
        if len(self.c_in) != 2 or len(self.c_out) != 2:
            raise ValueError("capacities come in pairs")
        if min(self.c_in + self.c_out) < 0:
            raise ValueError("capacities must be nonnegative")

    @classmethod
    def conferencing(cls, c12: float, c21: float) -> "LinkCapacities":
        """The forwarding facilitator equivalent to (c12, c21)-conferencing."""
        return cls((c12, c21), (c21, c12))

    def to_dict(self) -> dict:
        return {"c_in": list(self.c_in), "c_out": list(self.c_out)}


def _ro(a) -> np.ndarray:
    arr = np.array(a, dtype=np.int64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class CooperationCode:
    n: int
    m1: int
    m2: int
    x_sizes: tuple[int, int]
    y_size: int
    up_sizes: tuple[tuple[int, ...], tuple[int, ...]]
    down_sizes: tuple[tuple[int, ...], tuple[int, ...]]
    up_maps: tuple[tuple[np.ndarray, ...], tuple[np.ndarray, ...]]
    cf_maps: tuple[tuple[np.ndarray, ...], tuple[np.ndarray, ...]]
    channel_maps: tuple[np.ndarray, np.ndarray]
    decoder: np.ndarray
    capacities: LinkCapacities | None = None

    def __post_init__(self):
        set_ = lambda k, v: object.__setattr__(self, k, v)  # noqa: E731
        set_("x_sizes", tuple(int(s) for s in self.x_sizes))
        set_("up_sizes", tuple(tuple(int(s) for s in u) for u in self.up_sizes))
        set_("down_sizes", tuple(tuple(int(s) for s in d) for d in self.down_sizes))
        set_("up_maps", tuple(tuple(_ro(t) for t in per) for per in self.up_maps))
        set_("cf_maps", tuple(tuple(_ro(t) for t in per) for per in self.cf_maps))
        set_("channel_maps", tuple(_ro(f) for f in self.channel_maps))
        set_("decoder", _ro(self.decoder).reshape(-1, 2))
        self._validate()

    def _validate(self):
        if self.n < 0 or self.m1 < 1 or self.m2 < 1:
            raise ValueError("need n >= 0 and at least one message per user")
        J = len(self.up_sizes[0])
        if any(len(s) != J for s in self.up_sizes + self.down_sizes):
            raise ValueError("both users need the same number of rounds")
        if any(len(m) != J for m in self.up_maps + self.cf_maps):
            raise ValueError("one up map and one facilitator map per user and round")
        if min(self.up_sizes[0] + self.up_sizes[1] + self.down_sizes[0] + self.down_sizes[1], default=1) < 1:
            raise ValueError("facilitator alphabets must be non-empty")
        ms = (self.m1, self.m2)
        for i in range(2):
            for j in range(J):
                want = (ms[i],) + self.down_sizes[i][:j]
                t = self.up_maps[i][j]
                if t.shape != want:
                    raise ValueError(f"up map ({i + 1},{j + 1}) has shape {t.shape}, expected {want}")
                _check_range(t, self.up_sizes[i][j], f"up map ({i + 1},{j + 1})")
                want = self.up_sizes[0][: j + 1] + self.up_sizes[1][: j + 1]
                t = self.cf_maps[i][j]
                if t.shape != want:
                    raise ValueError(f"facilitator map ({i + 1},{j + 1}) has shape {t.shape}, expected {want}")
                _check_range(t, self.down_sizes[i][j], f"facilitator map ({i + 1},{j + 1})")
            f = self.channel_maps[i]
            want = (ms[i],) + self.down_sizes[i] + (self.n,)
            if f.shape != want:
                raise ValueError(f"channel map {i + 1} has shape {f.shape}, expected {want}")
            _check_range(f, self.x_sizes[i], f"channel map {i + 1}")
        if self.decoder.shape[0] != self.y_size**self.n:
            raise ValueError(
                f"decoder must be a total table over {self.y_size}**{self.n} outputs, "
                f"got {self.decoder.shape[0]} rows"
            )
        _check_range(self.decoder[:, 0], self.m1, "decoder (user 1)")
        _check_range(self.decoder[:, 1], self.m2, "decoder (user 2)")
        if self.capacities is not None:
            up, down = self.link_usage()
            for i in range(2):
                if up[i] > self.n * self.capacities.c_in[i] + CAP_TOL:
                    raise ValueError(
                        f"user {i + 1} sends {up[i]:.4f} bits up, exceeds n*C_in = "
                        f"{self.n * self.capacities.c_in[i]:.4f}"
                    )
                if down[i] > self.n * self.capacities.c_out[i] + CAP_TOL:
                    raise ValueError(
                        f"user {i + 1} receives {down[i]:.4f} bits, exceeds n*C_out = "
                        f"{self.n * self.capacities.c_out[i]:.4f}"
                    )

    @property
    def rounds(self) -> int:
        return len(self.up_sizes[0])

    @property
    def messages(self) -> tuple[int, int]:
        return self.m1, self.m2

    def rates(self) -> tuple[float, float]:
        """``(1/n) log2 M_i``; zero for the blocklength-0 code."""
        if self.n == 0:
            return 0.0, 0.0
        return math.log2(self.m1) / self.n, math.log2(self.m2) / self.n

    def link_usage(self) -> tuple[tuple[float, float], tuple[float, float]]:
        """Total bits ``(log2|U_i^J|, log2|V_i^J|)`` per user."""
        up = tuple(sum(math.log2(s) for s in self.up_sizes[i]) for i in range(2))
        down = tuple(sum(math.log2(s) for s in self.down_sizes[i]) for i in range(2))
        return up, down

    def with_capacities(self, capacities: LinkCapacities | None) -> "CooperationCode":
        return CooperationCode(**{**self._fields(), "capacities": capacities})

    def _fields(self) -> dict:
        return {
            k: getattr(self, k)
            for k in (
                "n", "m1", "m2", "x_sizes", "y_size", "up_sizes", "down_sizes",
                "up_maps", "cf_maps", "channel_maps", "decoder", "capacities",
            )
        }

    @classmethod
    def without_cooperation(cls, codebook1, codebook2, decoder, x_sizes, y_size, capacities=None):
        """A J=0 code from two codebooks of shape ``(M_i, n)``."""
        c1 = np.asarray(codebook1, dtype=np.int64)
        c2 = np.asarray(codebook2, dtype=np.int64)
        if c1.ndim != 2 or c2.ndim != 2 or c1.shape[1] != c2.shape[1]:
            raise ValueError("codebooks must be (M_i, n) arrays with a common n")
        return cls(
            n=c1.shape[1], m1=c1.shape[0], m2=c2.shape[0], x_sizes=x_sizes, y_size=y_size,
            up_sizes=((), ()), down_sizes=((), ()), up_maps=((), ()), cf_maps=((), ()),
            channel_maps=(c1, c2), decoder=decoder, capacities=capacities,
        )

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "m1": self.m1,
            "m2": self.m2,
            "rounds": self.rounds,
            "x_sizes": list(self.x_sizes),
            "y_size": self.y_size,
            "up_sizes": [list(s) for s in self.up_sizes],
            "down_sizes": [list(s) for s in self.down_sizes],
            "up_maps": [[t.tolist() for t in per] for per in self.up_maps],
            "cf_maps": [[t.tolist() for t in per] for per in self.cf_maps],
            "channel_maps": [f.tolist() for f in self.channel_maps],
            "decoder": self.decoder.tolist(),
            "capacities": None if self.capacities is None else self.capacities.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CooperationCode":
        try:
            up_sizes = tuple(tuple(s) for s in data["up_sizes"])
            down_sizes = tuple(tuple(s) for s in data["down_sizes"])
            n, m = int(data["n"]), (int(data["m1"]), int(data["m2"]))
            if "rounds" in data and int(data["rounds"]) != len(up_sizes[0]):
                raise ValueError("'rounds' disagrees with the listed alphabet sizes")

            def table(obj, shape):
                return np.array(obj, dtype=np.int64).reshape(shape)

            up_maps = tuple(
                tuple(table(t, (m[i],) + down_sizes[i][:j]) for j, t in enumerate(data["up_maps"][i]))
                for i in range(2)
            )
            cf_maps = tuple(
                tuple(
                    table(t, up_sizes[0][: j + 1] + up_sizes[1][: j + 1])
                    for j, t in enumerate(data["cf_maps"][i])
                )
                for i in range(2)
            )
            channel_maps = tuple(
                table(data["channel_maps"][i], (m[i],) + down_sizes[i] + (n,)) for i in range(2)
            )
            caps = data.get("capacities")
            return cls(
                n=n, m1=m[0], m2=m[1], x_sizes=tuple(data["x_sizes"]), y_size=int(data["y_size"]),
                up_sizes=up_sizes, down_sizes=down_sizes, up_maps=up_maps, cf_maps=cf_maps,
                channel_maps=channel_maps,
                decoder=np.array(data["decoder"], dtype=np.int64).reshape(-1, 2),
                capacities=None if caps is None else LinkCapacities(caps["c_in"], caps["c_out"]),
            )
        except KeyError as exc:
            raise ValueError(f"code file is missing field {exc}") from None


def _check_range(t: np.ndarray, size: int, what: str) -> None:
    if t.size and (t.min() < 0 or t.max() >= size):
        raise ValueError(f"{what} has entries outside [0, {size})")


@dataclass(frozen=True)
class Transcript:
    u: tuple[tuple[int, ...], tuple[int, ...]]
    v: tuple[tuple[int, ...], tuple[int, ...]]
    x1: tuple[int, ...]
    x2: tuple[int, ...]


def transcript(code: CooperationCode, m1: int, m2: int) -> Transcript:
    """Run the J-round facilitator exchange for one message pair."""
    if not (0 <= m1 < code.m1 and 0 <= m2 < code.m2):
        raise ValueError(f"message pair ({m1}, {m2}) outside [0,{code.m1}) x [0,{code.m2})")
    ms = (int(m1), int(m2))
    u: list[list[int]] = [[], []]
    v: list[list[int]] = [[], []]
    for j in range(code.rounds):
        for i in range(2):
            u[i].append(int(code.up_maps[i][j][(ms[i], *v[i])]))
        for i in range(2):
            v[i].append(int(code.cf_maps[i][j][(*u[0], *u[1])]))
    x = [tuple(int(s) for s in code.channel_maps[i][(ms[i], *v[i])]) for i in range(2)]
    return Transcript((tuple(u[0]), tuple(u[1])), (tuple(v[0]), tuple(v[1])), x[0], x[1])


@dataclass(frozen=True, eq=False)
class ErrorMatrix:
    """The M1 x M2 matrix of per-pair error probabilities."""

    entries: np.ndarray

    def __post_init__(self):
        e = np.array(self.entries, dtype=float)
        if e.ndim != 2 or min(e.shape) < 1:
            raise ValueError("error matrix must be a non-empty 2-d array")
        if np.any(e < -1e-12) or np.any(e > 1 + 1e-12):
            raise ValueError("error probabilities must lie in [0, 1]")
        e = np.clip(e, 0.0, 1.0)
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape


def _output_distribution(transition: np.ndarray, x1: Sequence[int], x2: Sequence[int]) -> np.ndarray:
    vec = np.ones(1)
    for a, b in zip(x1, x2):
        vec = np.outer(vec, transition[a, b]).ravel()
    return vec


def error_matrix(
    code: CooperationCode,
    mac: DiscreteMAC,
    *,
    max_log_size: float = DEFAULT_MAX_LOG_SIZE,
    workers: int | None = 1,
) -> ErrorMatrix:
    """Exact ``lambda(m1, m2)`` by summing ``p(y^n|x1^n,x2^n)`` off the decoding set."""
    if code.x_sizes != mac.shape[:2] or code.y_size != mac.shape[2]:
        raise ValueError(
            f"code alphabets {code.x_sizes + (code.y_size,)} do not match channel {mac.shape}"
        )
    check_extension_size(mac, code.n, max_log_size)
    dec = code.decoder
    cache: dict = {}

    def row(m1: int) -> np.ndarray:
        out = np.empty(code.m2)
        wrong1 = dec[:, 0] != m1
        for m2 in range(code.m2):
            t = transcript(code, m1, m2)
            key = (t.x1, t.x2)
            dist = cache.get(key)
            if dist is None:
                dist = cache.setdefault(key, _output_distribution(mac.transition, t.x1, t.x2))
            out[m2] = dist[wrong1 | (dec[:, 1] != m2)].sum()
        return out

    nw = worker_count(workers)
    if nw == 1:
        rows = [row(m1) for m1 in range(code.m1)]
    else:
        with ThreadPoolExecutor(nw) as pool:
            rows = list(pool.map(row, range(code.m1)))
    return ErrorMatrix(np.clip(np.vstack(rows), 0.0, 1.0))


def _entries(em) -> np.ndarray:
    return em.entries if isinstance(em, ErrorMatrix) else np.asarray(em, dtype=float)


def avg_error(em) -> float:
    return float(_entries(em).mean())


def max_error(em) -> float:
    return float(_entries(em).max())


def partition_size(r: float, n: int, m: int) -> tuple[int, int]:
    """``(K, L)`` with ``K = min(floor(2^{nr}), M)`` and ``L = floor(M/K)``.

    A relative slack of 1e-9 guards the floor against round-off when
    ``2^{nr}`` is meant to be an integer.
    """
    if r < 0:
        raise ValueError("rates must be nonnegative")
    if n * r >= math.log2(m) + 1:
        k = m
    else:
        k = min(int(math.floor(2.0 ** (n * r) * (1 + 1e-9))), m)
    k = max(k, 1)
    return k, m // k


@dataclass(frozen=True)
class ErrorProfileQuery:
    r1: float
    r2: float
    n: int
    m1: int
    m2: int

    @property
    def sizes(self) -> tuple[int, int, int, int]:
        """``(K1, L1, K2, L2)``."""
        k1, l1 = partition_size(self.r1, self.n, self.m1)
        k2, l2 = partition_size(self.r2, self.n, self.m2)
        return k1, l1, k2, l2


def block_averages(em, k1: int, l1: int, k2: int, l2: int, perm1=None, perm2=None) -> np.ndarray:
    """Average of each ``L1 x L2`` block of the permuted matrix; remainder rows/cols dropped.

    ``perm_i[p]`` is the message placed at position ``p``.
    """
    e = _entries(em)
    p1 = np.arange(e.shape[0]) if perm1 is None else np.asarray(perm1)
    p2 = np.arange(e.shape[1]) if perm2 is None else np.asarray(perm2)
    sub = e[np.ix_(p1[: k1 * l1], p2[: k2 * l2])]
    return sub.reshape(k1, l1, k2, l2).mean(axis=(1, 3))


class ExactBudgetError(RuntimeError):
    """Exact permutation minimization refused because it would be too large."""


@dataclass(frozen=True, eq=False)
class BlockwiseResult:
    value: float
    bound_kind: str  # "exact" or "upper_bound"
    perm1: np.ndarray
    perm2: np.ndarray
    block: tuple[int, int]
    sizes: tuple[int, int, int, int]

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "bound_kind": self.bound_kind,
            "witness": {
                "perm1": self.perm1.tolist(),
                "perm2": self.perm2.tolist(),
                "block": list(self.block),
            },
            "sizes": dict(zip(("K1", "L1", "K2", "L2"), self.sizes)),
        }


def _count_groupings(m: int, k: int, l: int) -> int:
    d = m - k * l
    return math.comb(m, d) * math.factorial(k * l) // (math.factorial(l) ** k * math.factorial(k))


def block_groupings(m: int, k: int, l: int) -> Iterator[np.ndarray]:
    """All ways to split ``range(m)`` into ``k`` unordered groups of size ``l``.

    Yields a label per element: group index ``0..k-1``, or ``k`` for the
    ``m - k*l`` discarded elements.  Group order and within-group order are
    canonical, so each split appears exactly once.
    """
    d = m - k * l
    if d < 0:
        raise ValueError("k*l exceeds m")
    for dropped in itertools.combinations(range(m), d):
        labels = np.full(m, k, dtype=np.int64)
        rest = [x for x in range(m) if x not in set(dropped)]
        for split in _unordered_splits(rest, l):
            for g, members in enumerate(split):
                labels[list(members)] = g
            yield labels.copy()


def _unordered_splits(items: list, l: int) -> Iterator[list]:
    if not items:
        yield []
        return
    head, tail = items[0], items[1:]
    for mates in itertools.combinations(tail, l - 1):
        left = [x for x in tail if x not in mates]
        for rest in _unordered_splits(left, l):
            yield [(head,) + mates] + rest


def _perm_from_labels(labels: np.ndarray) -> np.ndarray:
    return np.argsort(labels, kind="stable")


def _indicator(labels: np.ndarray, k: int) -> np.ndarray:
    ind = np.zeros((k, labels.size))
    keep = labels < k
    ind[labels[keep], np.nonzero(keep)[0]] = 1.0
    return ind


def blockwise_error(
    em,
    r1: float,
    r2: float,
    n: int,
    *,
    mode: str = "exact",
    budget: int = 200,
    seed: int = 0,
    max_messages: int = EXACT_MAX_MESSAGES,
    pair_budget: int = EXACT_PAIR_BUDGET,
) -> BlockwiseResult:
    """The (r1, r2)-error: min over row/column permutations of the max block average.

    ``mode="exact"`` enumerates every distinct split of messages into blocks
    (block order and order inside a block do not change the max).
    ``mode="heuristic"`` starts from the sorted-marginal permutation, adds
    ``budget`` seeded random restarts with swap descent, and returns an upper
    bound.
    """
    e = _entries(em)
    m1, m2 = e.shape
    k1, l1 = partition_size(r1, n, m1)
    k2, l2 = partition_size(r2, n, m2)
    sizes = (k1, l1, k2, l2)
    if mode == "exact":
        return _blockwise_exact(e, sizes, max_messages, pair_budget)
    if mode == "heuristic":
        return _blockwise_heuristic(e, sizes, budget, seed)
    raise ValueError(f"unknown mode {mode!r}")


def _blockwise_exact(e, sizes, max_messages, pair_budget) -> BlockwiseResult:
    k1, l1, k2, l2 = sizes
    m1, m2 = e.shape
    g1, g2 = _count_groupings(m1, k1, l1), _count_groupings(m2, k2, l2)
    if max(m1, m2) > max_messages or g1 * g2 > pair_budget:
        raise ExactBudgetError(
            f"exact mode needs M_i <= {max_messages} and at most {pair_budget} distinct "
            f"block assignments; this instance has M = ({m1}, {m2}) and {g1 * g2}"
        )
    rows = np.array(list(block_groupings(m1, k1, l1)))
    cols = np.array(list(block_groupings(m2, k2, l2)))
    r_ind = np.stack([_indicator(lab, k1) for lab in rows])  # (g1, K1, M1)
    c_ind = np.stack([_indicator(lab, k2) for lab in cols])  # (g2, K2, M2)
    partial = np.einsum("akm,mn->akn", r_ind, e)
    best = (np.inf, 0, 0)
    chunk = max(1, 2_000_000 // max(1, len(cols) * k1 * k2))
    for a0 in range(0, len(rows), chunk):
        sums = np.einsum("akn,bln->abkl", partial[a0 : a0 + chunk], c_ind)
        worst = sums.reshape(sums.shape[0], sums.shape[1], -1).max(axis=2)
        a, b = np.unravel_index(np.argmin(worst), worst.shape)
        if worst[a, b] < best[0] - 1e-15:
            best = (worst[a, b], a0 + a, b)
    perm1 = _perm_from_labels(rows[best[1]])
    perm2 = _perm_from_labels(cols[best[2]])
    avgs = block_averages(e, k1, l1, k2, l2, perm1, perm2)
    block = np.unravel_index(np.argmax(avgs), avgs.shape)
    return BlockwiseResult(
        float(avgs.max()), "exact", perm1, perm2, (int(block[0]), int(block[1])), sizes
    )


def _max_block(e, sizes, p1, p2) -> float:
    return float(block_averages(e, *sizes, p1, p2).max())


def _swap_descent(e, sizes, p1, p2, max_passes: int = 4):
    """First-improvement pairwise swaps of positions in either permutation."""
    cur = _max_block(e, sizes, p1, p2)
    for _ in range(max_passes):
        improved = False
        for perm in (p1, p2):
            for a, b in itertools.combinations(range(perm.size), 2):
                perm[a], perm[b] = perm[b], perm[a]
                val = _max_block(e, sizes, p1, p2)
                if val < cur - 1e-15:
                    cur, improved = val, True
                else:
                    perm[a], perm[b] = perm[b], perm[a]
        if not improved:
            break
    return cur


def _blockwise_heuristic(e, sizes, budget, seed) -> BlockwiseResult:
    rng = np.random.default_rng(seed)
    # sorted marginals: keep the smallest row sums, then smallest column sums over kept rows
    p1 = np.argsort(e.sum(axis=1), kind="stable")
    k1, l1, k2, l2 = sizes
    p2 = np.argsort(e[p1[: k1 * l1]].sum(axis=0), kind="stable")
    best_val = _swap_descent(e, sizes, p1, p2)
    best = (p1.copy(), p2.copy())
    for _ in range(budget):
        q1, q2 = rng.permutation(e.shape[0]), rng.permutation(e.shape[1])
        val = _swap_descent(e, sizes, q1, q2, max_passes=1)
        if val < best_val - 1e-15:
            best_val, best = val, (q1.copy(), q2.copy())
    avgs = block_averages(e, *sizes, *best)
    block = np.unravel_index(np.argmax(avgs), avgs.shape)
    return BlockwiseResult(
        float(avgs.max()), "upper_bound", best[0], best[1], (int(block[0]), int(block[1])), sizes
    )


def empty_code(x_sizes: tuple[int, int], y_size: int) -> CooperationCode:
    """The blocklength-0 code with a single message per user."""
    return CooperationCode.without_cooperation(
        np.zeros((1, 0), dtype=np.int64), np.zeros((1, 0), dtype=np.int64),
        np.zeros((1, 2), dtype=np.int64), x_sizes, y_size,
        capacities=LinkCapacities((0, 0), (0, 0)),
    )


def _padded(sizes: tuple[int, ...], rounds: int) -> tuple[int, ...]:
    return sizes + (1,) * (rounds - len(sizes))


def concatenate(
    code_a: CooperationCode,
    code_b: CooperationCode,
    mac: DiscreteMAC | None = None,
    *,
    max_log_size: float = DEFAULT_MAX_LOG_SIZE,
) -> CooperationCode:
    """Time-share two codes back to back.

    User i's message is the pair ``(m_ia, m_ib)`` encoded as
    ``m_ia * M_ib + m_ib``.  Round j of the facilitator carries both codes'
    round-j symbols as a product symbol; the shorter exchange is padded with
    trivial rounds.  The attached capacities are the blocklength-weighted
    mixture of the two codes' capacities.
    """
    if code_a.x_sizes != code_b.x_sizes or code_a.y_size != code_b.y_size:
        raise ValueError("codes are for different channel alphabets")
    if mac is not None and (mac.shape[:2] != code_a.x_sizes or mac.shape[2] != code_a.y_size):
        raise ValueError("codes do not match the channel alphabets")
    n = code_a.n + code_b.n
    log_y = n * math.log2(code_a.y_size) if code_a.y_size > 1 else 0.0
    if log_y > max_log_size + 1e-12:
        raise SizeLimitError("decoder table Y^n", log_y, max_log_size)
    J = max(code_a.rounds, code_b.rounds)
    ma, mb = code_a.messages, code_b.messages
    ms = (ma[0] * mb[0], ma[1] * mb[1])
    upa = tuple(_padded(code_a.up_sizes[i], J) for i in range(2))
    upb = tuple(_padded(code_b.up_sizes[i], J) for i in range(2))
    dna = tuple(_padded(code_a.down_sizes[i], J) for i in range(2))
    dnb = tuple(_padded(code_b.down_sizes[i], J) for i in range(2))
    up = tuple(tuple(a * b for a, b in zip(upa[i], upb[i])) for i in range(2))
    down = tuple(tuple(a * b for a, b in zip(dna[i], dnb[i])) for i in range(2))

    def lookup(code, table_group, i, j, idx):
        if j >= code.rounds:
            return 0
        return int(code.__getattribute__(table_group)[i][j][idx])

    up_maps = []
    cf_maps = []
    for i in range(2):
        per_up, per_cf = [], []
        for j in range(J):
            t = np.empty((ms[i],) + down[i][:j], dtype=np.int64)
            for idx in np.ndindex(t.shape):
                m_a, m_b = divmod(idx[0], mb[i])
                va = tuple(s // dnb[i][r] for r, s in enumerate(idx[1:]))
                vb = tuple(s % dnb[i][r] for r, s in enumerate(idx[1:]))
                sa = lookup(code_a, "up_maps", i, j, (m_a, *va[: code_a.rounds]))
                sb = lookup(code_b, "up_maps", i, j, (m_b, *vb[: code_b.rounds]))
                t[idx] = sa * upb[i][j] + sb
            per_up.append(t)
            shape = up[0][: j + 1] + up[1][: j + 1]
            t = np.empty(shape, dtype=np.int64)
            for idx in np.ndindex(shape):
                u1, u2 = idx[: j + 1], idx[j + 1 :]
                a_idx = tuple(s // upb[0][r] for r, s in enumerate(u1))[: code_a.rounds] + tuple(
                    s // upb[1][r] for r, s in enumerate(u2)
                )[: code_a.rounds]
                b_idx = tuple(s % upb[0][r] for r, s in enumerate(u1))[: code_b.rounds] + tuple(
                    s % upb[1][r] for r, s in enumerate(u2)
                )[: code_b.rounds]
                sa = lookup(code_a, "cf_maps", i, j, a_idx)
                sb = lookup(code_b, "cf_maps", i, j, b_idx)
                t[idx] = sa * dnb[i][j] + sb
            per_cf.append(t)
        up_maps.append(tuple(per_up))
        cf_maps.append(tuple(per_cf))

    channel_maps = []
    for i in range(2):
        f = np.empty((ms[i],) + down[i] + (n,), dtype=np.int64)
        for idx in np.ndindex((ms[i],) + down[i]):
            m_a, m_b = divmod(idx[0], mb[i])
            va = tuple(s // dnb[i][r] for r, s in enumerate(idx[1:]))[: code_a.rounds]
            vb = tuple(s % dnb[i][r] for r, s in enumerate(idx[1:]))[: code_b.rounds]
            f[idx] = np.concatenate(
                [code_a.channel_maps[i][(m_a, *va)], code_b.channel_maps[i][(m_b, *vb)]]
            )
        channel_maps.append(f)

    ny_b = code_b.y_size**code_b.n
    ya, yb = np.divmod(np.arange(code_a.y_size**n), ny_b)
    ga, gb = code_a.decoder[ya], code_b.decoder[yb]
    decoder = np.stack([ga[:, 0] * mb[0] + gb[:, 0], ga[:, 1] * mb[1] + gb[:, 1]], axis=1)

    caps = None
    if code_a.capacities is not None and code_b.capacities is not None and n > 0:
        wa, wb = code_a.n / n, code_b.n / n
        mix = lambda a, b: tuple(wa * x + wb * y for x, y in zip(a, b))  # noqa: E731
        caps = LinkCapacities(
            mix(code_a.capacities.c_in, code_b.capacities.c_in),
            mix(code_a.capacities.c_out, code_b.capacities.c_out),
        )
    return CooperationCode(
        n=n, m1=ms[0], m2=ms[1], x_sizes=code_a.x_sizes, y_size=code_a.y_size,
        up_sizes=up, down_sizes=down, up_maps=tuple(up_maps), cf_maps=tuple(cf_maps),
        channel_maps=tuple(channel_maps), decoder=decoder, capacities=caps,
    )


def inverse_decoder(mac: DiscreteMAC, codebook1, codebook2) -> np.ndarray:
    """Decoder table for a J=0 code on a deterministic channel.

    Each output sequence is mapped to the lowest-index message pair whose
    joint codeword produces it; unreachable outputs go to ``(0, 0)``.
    """
    out = mac.output_map()
    c1 = np.asarray(codebook1, dtype=np.int64)
    c2 = np.asarray(codebook2, dtype=np.int64)
    n = c1.shape[1]
    ny = mac.shape[2]
    dec = np.full((ny**n, 2), -1, dtype=np.int64)
    weights = ny ** np.arange(n - 1, -1, -1)
    for m1 in range(c1.shape[0]):
        for m2 in range(c2.shape[0]):
            y = int((out[c1[m1], c2[m2]] * weights).sum())
            if dec[y, 0] < 0:
                dec[y] = (m1, m2)
    dec[dec[:, 0] < 0] = 0
    return dec
