"""Constructive code transformations that trade rate for reliability.

``plan_theorem1``/``apply_theorem1`` turn an average-error facilitator code
into one whose (r1, r2)-error is at most ``e^3 eps`` by adding one facilitator
round: encoders announce their block, the facilitator steers every pair of
blocks to a pair of low-error sub-blocks and tells each encoder the offset.

``plan_prop3``/``apply_prop3`` take a one-round conferencing code and keep the
best quarter of its block pairs, giving maximal block-average error at most
``4 eps / 3``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .blockperm import (
    ZeroOneMatrix,
    block_violations,
    existence_bound,
    find_permutation_vector,
    find_permutations,
    vector_existence_bound,
)
from .channel import DEFAULT_MAX_LOG_SIZE, DiscreteMAC
from .code import (
    CooperationCode,
    ErrorMatrix,
    ExactBudgetError,
    LinkCapacities,
    avg_error,
    block_averages,
    blockwise_error,
    error_matrix,
    max_error,
    partition_size,
)

__all__ = [
    "TransformPlan",
    "Prop3Plan",
    "UncertifiedPlanError",
    "plan_theorem1",
    "apply_theorem1",
    "plan_prop3",
    "apply_prop3",
    "conferencing_code",
    "verify_transform",
    "two_pass_selection",
]

E3 = math.e**3


class UncertifiedPlanError(RuntimeError):
    """No zero-per-block permutation was found and the existence bound is >= 1."""

    def __init__(self, message: str, attempt):
        super().__init__(message)
        self.attempt = attempt


@dataclass(frozen=True, eq=False)
class TransformPlan:
    n: int
    r: tuple[float, float]
    delta: float
    k_star: int
    k_star_mode: str
    k_star_measured: int
    sizes: tuple[tuple[int, int], tuple[int, int]]  # (K_i, L_i)
    kept1: np.ndarray
    kept2: np.ndarray
    a_matrix: ZeroOneMatrix
    epsilon: float
    threshold: float
    perm1: np.ndarray
    perm2: np.ndarray
    good_entries: np.ndarray  # (K1*, K2*, 2) positions of the chosen zero
    bound: float
    bound_kind: str  # "matrix" or "vector"
    search_strategy: str
    seed: int
    measured_rates: tuple[float, float]
    error: ErrorMatrix = field(repr=False)

    @property
    def certificate(self) -> str:
        return "certified" if self.bound < 1 else "uncertified"

    @property
    def blocks(self) -> tuple[int, int]:
        """``K_i^* = floor(K_i / K*)``."""
        return tuple(k // self.k_star for k, _ in self.sizes)

    @property
    def new_messages(self) -> tuple[int, int]:
        return tuple(kb * l for kb, (_, l) in zip(self.blocks, self.sizes))

    @property
    def round1_up_bits(self) -> tuple[float, float]:
        return tuple(math.log2(k) for k, _ in self.sizes)

    @property
    def round1_down_bits(self) -> tuple[float, float]:
        return (math.log2(self.k_star),) * 2

    def block_sums(self) -> np.ndarray:
        (k1, l1), (k2, l2) = self.sizes
        sub = self.error.entries[np.ix_(self.kept1, self.kept2)]
        return sub.reshape(k1, l1, k2, l2).sum(axis=(1, 3))

    def to_dict(self) -> dict:
        (k1, l1), (k2, l2) = self.sizes
        return {
            "k_star": self.k_star,
            "k_star_mode": self.k_star_mode,
            "k_star_measured": self.k_star_measured,
            "K": [k1, k2],
            "L": [l1, l2],
            "blocks": list(self.blocks),
            "kept1": self.kept1.tolist(),
            "kept2": self.kept2.tolist(),
            "a_matrix": self.a_matrix.bits.tolist(),
            "ones": self.a_matrix.ones_count,
            "epsilon": self.epsilon,
            "threshold": self.threshold,
            "perm1": self.perm1.tolist(),
            "perm2": self.perm2.tolist(),
            "good_entries": self.good_entries.tolist(),
            "existence_bound": self.bound,
            "bound_kind": self.bound_kind,
            "certificate": self.certificate,
            "search": self.search_strategy,
            "seed": self.seed,
            "round1_up_bits": list(self.round1_up_bits),
            "round1_down_bits": list(self.round1_down_bits),
            "measured_rates": list(self.measured_rates),
            "delta": self.delta,
        }


def two_pass_selection(entries: np.ndarray, keep1: int, keep2: int) -> tuple[np.ndarray, np.ndarray]:
    """Keep the ``keep1`` rows with smallest sums, then the ``keep2`` columns with
    smallest sums over the kept rows.  Ties go to the lower index; the kept
    indices are returned in increasing order.
    """
    rows = np.sort(np.argsort(entries.sum(axis=1), kind="stable")[:keep1])
    cols = np.sort(np.argsort(entries[rows].sum(axis=0), kind="stable")[:keep2])
    return rows, cols


def _sizes_for(k_star: int, r: float, n: int, m: int) -> tuple[int, int]:
    base = partition_size(r, n, m)[0] if m > 1 else 1
    # K_i = min(K* floor(2^{n r}), M_i); partition_size already caps floor(2^{nr}) at M_i
    k = min(k_star * base, m)
    return k, m // k


def _measured_k_star(n: int, rates: tuple[float, float]) -> int:
    return max(1, math.ceil(n * (rates[0] + rates[1]) - 1e-9))


def _structure(entries, k_star, r, n, ms):
    (k1, l1), (k2, l2) = (_sizes_for(k_star, r[i], n, ms[i]) for i in range(2))
    kept1, kept2 = two_pass_selection(entries, k1 * l1, k2 * l2)
    sub = entries[np.ix_(kept1, kept2)]
    eps = float(sub.mean())
    threshold = l1 * l2 * E3 * eps
    sums = sub.reshape(k1, l1, k2, l2).sum(axis=(1, 3))
    a = (sums > threshold).astype(np.int8)
    return ((k1, l1), (k2, l2)), kept1, kept2, eps, threshold, a


def _bound_for(a: np.ndarray, k_star: int) -> tuple[float, str]:
    k1, k2 = a.shape
    if k1 == k_star or k2 == k_star:
        vec = _reduced_vector(a, k_star)
        return vector_existence_bound(vec.size, k_star, int(vec.sum())), "vector"
    return existence_bound(k1, k2, k_star, int(a.sum())), "matrix"


def _reduced_vector(a: np.ndarray, k_star: int) -> np.ndarray:
    """With a single block row (column), a block has a zero iff one of its
    columns (rows) is not all ones, so the search reduces to a vector."""
    if a.shape[0] == k_star:
        return a.min(axis=0)
    return a.min(axis=1)


def plan_theorem1(
    code: CooperationCode,
    mac: DiscreteMAC,
    r1: float,
    r2: float,
    delta: float,
    *,
    k_star: str | int = "adaptive",
    budget: int = 10_000,
    seed: int = 0,
    error: ErrorMatrix | None = None,
    max_log_size: float = DEFAULT_MAX_LOG_SIZE,
    workers: int | None = 1,
) -> TransformPlan:
    """Plan the extra-round transformation of an average-error code.

    ``k_star`` selects the block side: ``"measured"`` uses
    ``ceil(n (R1 + R2))`` with ``R_i = log2(M_i)/n``; ``"adaptive"`` uses the
    smallest block side whose existence bound is below one; an integer is
    used as given.
    """
    if r1 < 0 or r2 < 0:
        raise ValueError("target rates must be nonnegative")
    if delta <= 0:
        raise ValueError("delta must be positive")
    if code.n < 1:
        raise ValueError("the code must have positive blocklength")
    em = error if error is not None else error_matrix(code, mac, max_log_size=max_log_size, workers=workers)
    entries = em.entries
    ms = code.messages
    n = code.n
    r = (float(r1), float(r2))
    rates = code.rates()
    measured = _measured_k_star(n, rates)

    if k_star == "measured":
        ks, mode = measured, "measured"
    elif k_star == "adaptive":
        mode = "adaptive"
        ks = None
        for cand in range(1, min(ms) + 1):
            a = _structure(entries, cand, r, n, ms)[5]
            if _bound_for(a, cand)[0] < 1:
                ks = cand
                break
        if ks is None:
            ks = min(measured, min(ms))
    elif isinstance(k_star, (int, np.integer)) and not isinstance(k_star, bool):
        ks, mode = int(k_star), "fixed"
    else:
        raise ValueError(f"unknown k_star option {k_star!r}")

    if ks > min(ms):
        raise ValueError(
            f"block side K*={ks} exceeds a message count {ms}; the code is too small to transform"
        )
    sizes, kept1, kept2, eps, threshold, a = _structure(entries, ks, r, n, ms)
    bound, bound_kind = _bound_for(a, ks)
    k1, k2 = sizes[0][0], sizes[1][0]

    if bound_kind == "vector":
        vec = _reduced_vector(a, ks)
        res = find_permutation_vector(vec, ks)
        ident1, ident2 = np.arange(k1), np.arange(k2)
        if a.shape[0] == ks:
            perm1, perm2 = ident1, res.perm
        else:
            perm1, perm2 = res.perm, ident2
        found, strategy = res.found, "vector"
        violations = res.violations
    else:
        res = find_permutations(a, ks, budget=budget, seed=seed)
        perm1, perm2, found, strategy = res.perm1, res.perm2, res.found, res.strategy
        violations = res.violations
    if not found:
        raise UncertifiedPlanError(
            f"no permutation pair with a zero in every {ks}x{ks} block "
            f"(best attempt leaves {violations}; existence bound {bound:.4g})",
            {"perm1": np.asarray(perm1).tolist(), "perm2": np.asarray(perm2).tolist(),
             "violations": violations, "bound": bound},
        )
    perm1, perm2 = np.asarray(perm1, dtype=np.int64), np.asarray(perm2, dtype=np.int64)
    good = _good_entries(a, ks, perm1, perm2)
    return TransformPlan(
        n=n, r=r, delta=float(delta), k_star=ks, k_star_mode=mode, k_star_measured=measured,
        sizes=sizes, kept1=kept1, kept2=kept2, a_matrix=ZeroOneMatrix(a), epsilon=eps,
        threshold=threshold, perm1=perm1, perm2=perm2, good_entries=good, bound=bound,
        bound_kind=bound_kind, search_strategy=strategy, seed=seed, measured_rates=rates, error=em,
    )


def _good_entries(a: np.ndarray, ks: int, perm1: np.ndarray, perm2: np.ndarray) -> np.ndarray:
    """Lowest-index zero (in row-major position order) of every full K* x K* block."""
    s, t = a.shape[0] // ks, a.shape[1] // ks
    pa = a[np.ix_(perm1, perm2)]
    good = np.empty((s, t, 2), dtype=np.int64)
    for bs in range(s):
        for bt in range(t):
            blk = pa[bs * ks : (bs + 1) * ks, bt * ks : (bt + 1) * ks]
            zeros = np.argwhere(blk == 0)
            if zeros.size == 0:
                raise RuntimeError("permutation pair leaves an all-ones block")
            good[bs, bt] = zeros[0] + (bs * ks, bt * ks)
    return good


def _expand_cf(table: np.ndarray, j: int, extra: tuple[int, int]) -> np.ndarray:
    """Prepend a new round-1 axis per user to a facilitator table of round j."""
    t = np.asarray(table)
    t = np.expand_dims(t, j)  # user 2's block starts after user 1's j symbols
    t = np.expand_dims(t, 0)
    shape = list(t.shape)
    shape[0], shape[j + 1] = extra
    return np.broadcast_to(t, shape).copy()


def apply_theorem1(
    plan: TransformPlan,
    code: CooperationCode,
    *,
    single_round: bool | None = None,
) -> CooperationCode:
    """Build the transformed code.

    User i's new message ``s * L_i + l`` names block ``s < K_i^*`` and
    in-block index ``l``.  In the added first round the encoder sends its
    block's first position ``s K*``; the facilitator replies with the offset
    of the good entry inside the pair's K* x K* block (mod K*).  The encoders
    then run the original code on the original message at that position.

    With ``single_round`` (default: automatic when the code has no rounds, or
    when its attached input capacities already cover the message rates) the
    encoders send their whole new message up and the facilitator also
    returns the original code's facilitator output, so one round suffices.
    """
    if plan.error.shape != code.messages or plan.n != code.n:
        raise ValueError("plan was made for a different code")
    ks = plan.k_star
    blocks = plan.blocks
    new_m = plan.new_messages
    (k1, l1), (k2, l2) = plan.sizes
    ks_sizes, ls = (k1, k2), (l1, l2)
    kept = (plan.kept1, plan.kept2)
    perms = (plan.perm1, plan.perm2)
    J = code.rounds
    if single_round is None:
        caps = code.capacities
        single_round = J == 0 or (
            caps is not None and all(caps.c_in[i] * code.n >= math.log2(code.messages[i]) for i in range(2))
        )

    # original message transmitted for new message (s, l) and good position p
    def original(i: int, pos: int, ell: int) -> int:
        return int(kept[i][perms[i][pos] * ls[i] + ell])

    # decoder back-map: original index -> new index (fallback 0)
    back = []
    for i in range(2):
        inv_perm = np.argsort(perms[i])
        b = np.zeros(code.messages[i], dtype=np.int64)
        for q, m in enumerate(kept[i]):
            k, ell = divmod(q, ls[i])
            s = inv_perm[k] // ks
            if s < blocks[i]:
                b[m] = s * ls[i] + ell
        back.append(b)
    decoder = np.stack([back[0][code.decoder[:, 0]], back[1][code.decoder[:, 1]]], axis=1)

    good = plan.good_entries
    if single_round:
        # facilitator knows both new messages; reply = offset * |V^J| + simulated original replies
        vj = [int(np.prod(code.down_sizes[i], dtype=np.int64)) for i in range(2)]
        cf = [np.empty(new_m, dtype=np.int64) for _ in range(2)]
        from .code import transcript  # local to keep module import order simple

        for a in range(new_m[0]):
            s1, e1 = divmod(a, l1)
            for b in range(new_m[1]):
                s2, e2 = divmod(b, l2)
                p = good[s1, s2]
                mstar = (original(0, p[0], e1), original(1, p[1], e2))
                tr = transcript(code, *mstar)
                for i, s in enumerate((s1, s2)):
                    v_idx = int(np.ravel_multi_index(tr.v[i], code.down_sizes[i])) if J else 0
                    cf[i][a, b] = (p[i] - s * ks) * vj[i] + v_idx
        up_maps = tuple((np.arange(new_m[i]),) for i in range(2))
        channel_maps = []
        for i in range(2):
            f = np.empty((new_m[i], ks * vj[i], code.n), dtype=np.int64)
            for m in range(new_m[i]):
                s, ell = divmod(m, ls[i])
                for reply in range(ks * vj[i]):
                    off, v_idx = divmod(reply, vj[i])
                    pos = min(s * ks + off, ks_sizes[i] - 1)
                    v = np.unravel_index(v_idx, code.down_sizes[i]) if J else ()
                    f[(m, reply)] = code.channel_maps[i][(original(i, pos, ell), *v)]
            channel_maps.append(f)
        new = CooperationCode(
            n=code.n, m1=new_m[0], m2=new_m[1], x_sizes=code.x_sizes, y_size=code.y_size,
            up_sizes=((new_m[0],), (new_m[1],)), down_sizes=((ks * vj[0],), (ks * vj[1],)),
            up_maps=up_maps, cf_maps=(tuple(cf[:1]), tuple(cf[1:])),
            channel_maps=tuple(channel_maps), decoder=decoder,
        )
    else:
        up_sizes = tuple((ks_sizes[i],) + code.up_sizes[i] for i in range(2))
        down_sizes = tuple((ks,) + code.down_sizes[i] for i in range(2))
        # round 1
        up1 = tuple(np.arange(new_m[i]) // ls[i] * ks for i in range(2))
        cf1 = []
        for i in range(2):
            t = np.zeros((k1, k2), dtype=np.int64)
            for s1 in range(blocks[0]):
                for s2 in range(blocks[1]):
                    p = good[s1, s2]
                    t[s1 * ks, s2 * ks] = (p[i] - (s1, s2)[i] * ks) % ks
            cf1.append(t)
        # position reached by encoder i given its new message and offset
        def pos_of(i, m, off):
            s = m // ls[i]
            return min(s * ks + off, ks_sizes[i] - 1)

        up_maps, cf_maps, channel_maps = [], [], []
        for i in range(2):
            ups = [up1[i]]
            for j in range(J):
                shape = (new_m[i], ks) + code.down_sizes[i][:j]
                t = np.empty(shape, dtype=np.int64)
                for m in range(new_m[i]):
                    ell = m % ls[i]
                    for off in range(ks):
                        t[m, off] = code.up_maps[i][j][original(i, pos_of(i, m, off), ell)]
                ups.append(t)
            up_maps.append(tuple(ups))
            cfs = [cf1[i]]
            for j in range(J):
                cfs.append(_expand_cf(code.cf_maps[i][j], j + 1, (k1, k2)))
            cf_maps.append(tuple(cfs))
            f = np.empty((new_m[i], ks) + code.down_sizes[i] + (code.n,), dtype=np.int64)
            for m in range(new_m[i]):
                ell = m % ls[i]
                for off in range(ks):
                    f[m, off] = code.channel_maps[i][original(i, pos_of(i, m, off), ell)]
            channel_maps.append(f)
        new = CooperationCode(
            n=code.n, m1=new_m[0], m2=new_m[1], x_sizes=code.x_sizes, y_size=code.y_size,
            up_sizes=up_sizes, down_sizes=down_sizes, up_maps=tuple(up_maps),
            cf_maps=tuple(cf_maps), channel_maps=tuple(channel_maps), decoder=decoder,
        )
    return new.with_capacities(_inflated_capacities(plan, code))


def _inflated_capacities(plan: TransformPlan, code: CooperationCode) -> LinkCapacities:
    n = code.n
    slack = math.log2(1 + n * (sum(plan.measured_rates) + 2 * plan.delta)) / n
    if code.capacities is not None:
        c_in, c_out = code.capacities.c_in, code.capacities.c_out
    else:
        up, down = code.link_usage()
        c_in, c_out = tuple(u / n for u in up), tuple(d / n for d in down)
    return LinkCapacities(
        tuple(c_in[i] + plan.r[i] + slack for i in range(2)),
        tuple(c_out[i] + slack for i in range(2)),
    )


@dataclass(frozen=True, eq=False)
class Prop3Plan:
    n: int
    c12: float
    c21: float
    sizes: tuple[tuple[int, int], tuple[int, int]]  # (K_i, L_i) of the input code
    block_avgs: np.ndarray  # K1 x K2
    quarter: np.ndarray  # (K1 K2 / 4, 2) chosen block pairs, phi in row-major order
    epsilon: float
    error: ErrorMatrix = field(repr=False)

    @property
    def new_sizes(self) -> tuple[int, int]:
        return self.sizes[0][0] // 2, self.sizes[1][0] // 2

    def to_dict(self) -> dict:
        return {
            "c12": self.c12,
            "c21": self.c21,
            "K": [self.sizes[0][0], self.sizes[1][0]],
            "L": [self.sizes[0][1], self.sizes[1][1]],
            "K_new": list(self.new_sizes),
            "epsilon": self.epsilon,
            "block_averages": self.block_avgs.tolist(),
            "quarter": self.quarter.tolist(),
            "quarter_max": float(self.block_avgs[tuple(self.quarter.T)].max()),
        }


def conferencing_sizes(n: int, c12: float, c21: float) -> tuple[int, int]:
    """``K_i = 2 floor(2^{n C})`` for the two conferencing directions."""
    return tuple(2 * int(math.floor(2.0 ** (n * c) * (1 + 1e-9))) for c in (c12, c21))


def conferencing_code(
    n: int,
    k_sizes: tuple[int, int],
    l_sizes: tuple[int, int],
    encoders: tuple[np.ndarray, np.ndarray],
    decoder: np.ndarray,
    x_sizes: tuple[int, int],
    y_size: int,
    capacities: LinkCapacities | None = None,
) -> CooperationCode:
    """A one-round conferencing code as a forwarding facilitator code.

    ``encoders[i]`` has shape ``(K1, K2, L_i, n)``: user i's codeword for
    block pair ``(k1, k2)`` and in-block index ``l``.  User i's message is
    ``k_i * L_i + l``; it sends ``k_i`` and learns the other user's block.
    """
    k1, k2 = k_sizes
    ms = (k1 * l_sizes[0], k2 * l_sizes[1])
    up_maps = tuple((np.arange(ms[i]) // l_sizes[i],) for i in range(2))
    g1, g2 = np.meshgrid(np.arange(k1), np.arange(k2), indexing="ij")
    cf_maps = ((g2,), (g1,))
    channel_maps = []
    for i in range(2):
        enc = np.asarray(encoders[i])
        if enc.shape != (k1, k2, l_sizes[i], n):
            raise ValueError(f"encoder {i + 1} has shape {enc.shape}, expected {(k1, k2, l_sizes[i], n)}")
        f = np.empty((ms[i], k_sizes[1 - i], n), dtype=np.int64)
        for m in range(ms[i]):
            k, ell = divmod(m, l_sizes[i])
            for other in range(k_sizes[1 - i]):
                f[m, other] = enc[k, other, ell] if i == 0 else enc[other, k, ell]
        channel_maps.append(f)
    return CooperationCode(
        n=n, m1=ms[0], m2=ms[1], x_sizes=x_sizes, y_size=y_size,
        up_sizes=((k1,), (k2,)), down_sizes=((k2,), (k1,)), up_maps=up_maps, cf_maps=cf_maps,
        channel_maps=tuple(channel_maps), decoder=decoder, capacities=capacities,
    )


def plan_prop3(
    code: CooperationCode,
    mac: DiscreteMAC,
    c12: float,
    c21: float,
    *,
    error: ErrorMatrix | None = None,
    max_log_size: float = DEFAULT_MAX_LOG_SIZE,
    workers: int | None = 1,
) -> Prop3Plan:
    """Choose the quarter of block pairs with the smallest block-average error."""
    k = conferencing_sizes(code.n, c12, c21)
    ms = code.messages
    if code.rounds != 1:
        raise ValueError("expected a single-round conferencing code")
    for i in range(2):
        if ms[i] % k[i]:
            raise ValueError(f"M_{i + 1}={ms[i]} does not factor as K_{i + 1}={k[i]} times L")
        if code.up_sizes[i][0] != k[i]:
            raise ValueError(f"user {i + 1} must send its block index (alphabet {k[i]})")
        l = ms[i] // k[i]
        if not np.array_equal(code.up_maps[i][0], np.arange(ms[i]) // l):
            raise ValueError(f"user {i + 1} must send k = m // L in its conferencing round")
    ls = (ms[0] // k[0], ms[1] // k[1])
    em = error if error is not None else error_matrix(code, mac, max_log_size=max_log_size, workers=workers)
    avgs = block_averages(em, k[0], ls[0], k[1], ls[1])
    q = k[0] * k[1] // 4
    order = np.argsort(avgs.ravel(), kind="stable")[:q]
    chosen = np.sort(order)
    quarter = np.stack(np.unravel_index(chosen, avgs.shape), axis=1)
    return Prop3Plan(
        n=code.n, c12=float(c12), c21=float(c21), sizes=((k[0], ls[0]), (k[1], ls[1])),
        block_avgs=avgs, quarter=quarter, epsilon=avg_error(em), error=em,
    )


def apply_prop3(plan: Prop3Plan, code: CooperationCode) -> CooperationCode:
    """Re-index the code onto the chosen quarter.

    ``phi(k1', k2')`` is the ``(k1' K2' + k2')``-th chosen block pair.  New
    users send ``k_i'`` (``log2 floor(2^{nC})`` bits) and the facilitator
    forwards it, so the result is a conferencing code within the link limits.
    Decoded block pairs outside the quarter fall back to ``(0, 0)``.
    """
    if plan.error.shape != code.messages or plan.n != code.n:
        raise ValueError("plan was made for a different code")
    (k1, l1), (k2, l2) = plan.sizes
    kn1, kn2 = plan.new_sizes
    ls = (l1, l2)
    phi = plan.quarter[: kn1 * kn2].reshape(kn1, kn2, 2)
    inv = np.full((k1, k2, 2), -1, dtype=np.int64)
    for a in range(kn1):
        for b in range(kn2):
            inv[tuple(phi[a, b])] = (a, b)
    new_m = (kn1 * l1, kn2 * l2)
    up_maps = tuple((np.arange(new_m[i]) // ls[i],) for i in range(2))
    g1, g2 = np.meshgrid(np.arange(kn1), np.arange(kn2), indexing="ij")
    cf_maps = ((g2,), (g1,))
    channel_maps = []
    for i in range(2):
        kn_other = (kn2, kn1)[i]
        f = np.empty((new_m[i], kn_other, code.n), dtype=np.int64)
        for m in range(new_m[i]):
            kn, ell = divmod(m, ls[i])
            for other in range(kn_other):
                kk = phi[kn, other] if i == 0 else phi[other, kn]
                orig_m = kk[i] * ls[i] + ell
                # original facilitator output for the original blocks
                v = code.cf_maps[i][0][kk[0], kk[1]]
                f[m, other] = code.channel_maps[i][orig_m, v]
        channel_maps.append(f)
    kd1, ld1 = np.divmod(code.decoder[:, 0], l1)
    kd2, ld2 = np.divmod(code.decoder[:, 1], l2)
    pair = inv[kd1, kd2]
    ok = pair[:, 0] >= 0
    dec = np.stack([
        np.where(ok, pair[:, 0], 0) * l1 + ld1,
        np.where(ok, pair[:, 1], 0) * l2 + ld2,
    ], axis=1)
    new = CooperationCode(
        n=code.n, m1=new_m[0], m2=new_m[1], x_sizes=code.x_sizes, y_size=code.y_size,
        up_sizes=((kn1,), (kn2,)), down_sizes=((kn2,), (kn1,)), up_maps=up_maps, cf_maps=cf_maps,
        channel_maps=tuple(channel_maps), decoder=dec,
    )
    return new.with_capacities(LinkCapacities.conferencing(plan.c12, plan.c21))


def _blockwise_summary(em, r, n, *, witness_sizes=None):
    out = {}
    try:
        res = blockwise_error(em, r[0], r[1], n, mode="exact")
    except ExactBudgetError:
        res = blockwise_error(em, r[0], r[1], n, mode="heuristic", budget=50)
    out["value"] = res.value
    out["bound_kind"] = res.bound_kind
    if witness_sizes is not None:
        out["natural_blocks_max"] = float(block_averages(em, *witness_sizes).max())
    return out


def verify_transform(
    original: CooperationCode,
    transformed: CooperationCode,
    mac: DiscreteMAC,
    r1: float,
    r2: float,
    *,
    plan: TransformPlan | Prop3Plan | None = None,
    delta: float | None = None,
    max_log_size: float = DEFAULT_MAX_LOG_SIZE,
    workers: int | None = 1,
) -> dict:
    """Re-evaluate both codes exactly and check the transformation's guarantees.

    The certificate compares the transformed code's maximal block average on
    its natural message blocks (``s * L + l`` grouped by ``s``) with
    ``e^3 eps`` (extra-round plans) or ``4 eps / 3`` (quarter plans).
    """
    n = original.n
    em_o = plan.error if plan is not None else error_matrix(original, mac, max_log_size=max_log_size, workers=workers)
    em_t = error_matrix(transformed, mac, max_log_size=max_log_size, workers=workers)
    before = original.rates()
    after = transformed.rates()
    loss = [before[i] - after[i] for i in range(2)]
    up, down = transformed.link_usage()
    caps = transformed.capacities
    report = {
        "rates_before": list(before),
        "rates_after": list(after),
        "rate_loss": loss,
        "messages_before": list(original.messages),
        "messages_after": list(transformed.messages),
        "rounds_before": original.rounds,
        "rounds_after": transformed.rounds,
        "link_bits": {"up": list(up), "down": list(down)},
        "before": {"avg": avg_error(em_o), "max": max_error(em_o)},
        "after": {"avg": avg_error(em_t), "max": max_error(em_t)},
    }
    if caps is not None:
        report["link_budget_bits"] = {
            "up": [n * c for c in caps.c_in],
            "down": [n * c for c in caps.c_out],
        }
        report["links_within_budget"] = bool(
            all(up[i] <= n * caps.c_in[i] + 1e-9 and down[i] <= n * caps.c_out[i] + 1e-9 for i in range(2))
        )
    if delta is not None:
        report["delta"] = delta
        report["rate_loss_within_2delta"] = bool(all(x <= 2 * delta + 1e-12 for x in loss))

    witness = None
    if isinstance(plan, TransformPlan):
        witness = (plan.blocks[0], plan.sizes[0][1], plan.blocks[1], plan.sizes[1][1])
        limit, kind = E3 * plan.epsilon, "e^3 eps"
        eps = plan.epsilon
    elif isinstance(plan, Prop3Plan):
        witness = (plan.new_sizes[0], plan.sizes[0][1], plan.new_sizes[1], plan.sizes[1][1])
        limit, kind = 4 * plan.epsilon / 3, "4 eps / 3"
        eps = plan.epsilon
    report["before"]["blockwise"] = _blockwise_summary(em_o, (r1, r2), n)
    report["after"]["blockwise"] = _blockwise_summary(em_t, (r1, r2), n, witness_sizes=witness)
    if plan is not None:
        value = report["after"]["blockwise"]["natural_blocks_max"]
        report["certificate"] = {
            "kind": kind,
            "epsilon": eps,
            "limit": limit,
            "value": value,
            "status": "pass" if value <= limit + 1e-12 else "fail",
        }
    return report
