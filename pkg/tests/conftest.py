"""Shared toy channels, code builders and brute-force oracles.

The oracles here are deliberately naive (explicit loops over every output
sequence or every permutation) so they share no code paths with the
vectorized library routines they check.
"""
import itertools

import numpy as np
import pytest

from maccoop.channel import DiscreteMAC
from maccoop.code import CooperationCode


def random_mac(rng, a=2, b=2, c=3, sparse=False):
    p = rng.random((a, b, c)) + (0 if sparse else 0.05)
    if sparse:
        p[p < 0.5] = 0
        p[..., 0] += 1e-3
    p /= p.sum(axis=2, keepdims=True)
    return DiscreteMAC([str(i) for i in range(a)], [str(i) for i in range(b)], [str(i) for i in range(c)], p)


def identity_mac(q=4):
    """Deterministic channel revealing both inputs: y = q*x1 + x2."""
    p = np.zeros((q, q, q * q))
    for a in range(q):
        for b in range(q):
            p[a, b, q * a + b] = 1.0
    return DiscreteMAC([str(i) for i in range(q)], [str(i) for i in range(q)], [str(i) for i in range(q * q)], p)


def bsc_mac(eps=0.1):
    """Binary inputs, output is x1 XOR x2 passed through a BSC, plus a clean copy of x1."""
    p = np.zeros((2, 2, 4))
    for a in range(2):
        for b in range(2):
            s = a ^ b
            p[a, b, 2 * a + s] = 1 - eps
            p[a, b, 2 * a + (1 - s)] = eps
    return DiscreteMAC(["0", "1"], ["0", "1"], ["00", "01", "10", "11"], p)


def seq_prob(mac, x1, x2, y):
    """p(y^n | x1^n, x2^n) by an explicit product over channel uses."""
    prob = 1.0
    for a, b, c in zip(x1, x2, y):
        prob *= mac.transition[a, b, c]
    return prob


def oracle_error_matrix(code, mac, codewords):
    """Brute force over every output sequence.  ``codewords(m1, m2) -> (x1, x2)``."""
    ny = mac.shape[2]
    em = np.zeros((code.m1, code.m2))
    for m1 in range(code.m1):
        for m2 in range(code.m2):
            x1, x2 = codewords(m1, m2)
            for idx, y in enumerate(itertools.product(range(ny), repeat=code.n)):
                if tuple(code.decoder[idx]) != (m1, m2):
                    em[m1, m2] += seq_prob(mac, x1, x2, y)
    return em


def ml_decoder(mac, n, m1, m2, codewords):
    """Maximum-likelihood decoder table, ties to the lowest (m1, m2)."""
    ny = mac.shape[2]
    dec = np.zeros((ny**n, 2), dtype=np.int64)
    words = {(a, b): codewords(a, b) for a in range(m1) for b in range(m2)}
    for idx, y in enumerate(itertools.product(range(ny), repeat=n)):
        best, arg = -1.0, (0, 0)
        for (a, b), (x1, x2) in words.items():
            pr = seq_prob(mac, x1, x2, y)
            if pr > best + 1e-15:
                best, arg = pr, (a, b)
        dec[idx] = arg
    return dec


def brute_blockwise(e, k1, l1, k2, l2):
    """min over all row/column permutations of the max block average."""
    best = np.inf
    m1, m2 = e.shape
    for p1 in itertools.permutations(range(m1)):
        rows = e[list(p1[: k1 * l1])]
        # block sums over rows for this row order, then try every column order
        rs = rows.reshape(k1, l1, m2).sum(axis=1)
        for p2 in itertools.permutations(range(m2)):
            blk = rs[:, list(p2[: k2 * l2])].reshape(k1, k2, l2).sum(axis=2)
            best = min(best, blk.max() / (l1 * l2))
    return best


def oracle_blocks_ok(bits, k, p1, p2):
    """Loop-based check that every full k x k block has a zero."""
    m, n = bits.shape
    for s in range(m // k):
        for t in range(n // k):
            if all(bits[p1[s * k + i], p2[t * k + j]] == 1 for i in range(k) for j in range(k)):
                return False
    return True


def _set_partitions(items, size):
    if not items:
        yield []
        return
    first = items[0]
    for mates in itertools.combinations(items[1:], size - 1):
        rest = [x for x in items[1:] if x not in mates]
        for tail in _set_partitions(rest, size):
            yield [(first, *mates)] + tail


def oracle_exists(bits, k):
    """Independent existence check: choose row groups, then backtrack over column groups."""
    m, n = bits.shape
    s, t = m // k, n // k
    for kept_rows in itertools.combinations(range(m), s * k):
        for groups in _set_partitions(list(kept_rows), k):
            zero_cols = [set(np.nonzero((bits[list(g)] == 0).any(axis=0))[0]) for g in groups]
            if _cols_feasible(zero_cols, list(range(n)), t, k):
                return True
    return False


def _cols_feasible(zero_cols, cols, t, k):
    if t == 0:
        return True
    for group in itertools.combinations(cols, k):
        if all(zc & set(group) for zc in zero_cols):
            rest = [c for c in cols if c not in group]
            if _cols_feasible(zero_cols, rest, t - 1, k):
                return True
        # columns are interchangeable only through their zero patterns; keep it simple
    return False


def j0_code(mac, cb1, cb2, decoder, capacities=None):
    return CooperationCode.without_cooperation(cb1, cb2, decoder, mac.shape[:2], mac.shape[2], capacities)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def planted_code():
    """Perfect code on the 4x4 identity channel with one corrupted 2x2 message block.

    n = 3, M1 = M2 = 16, message m is sent as its three base-4 digits.  Pairs in
    {4, 5} x {8, 9} decode to (0, 0), so they err with probability one.
    """
    from maccoop.code import inverse_decoder

    mac = identity_mac(4)
    cb = np.array([[(m // 16) % 4, (m // 4) % 4, m % 4] for m in range(16)])
    dec = inverse_decoder(mac, cb, cb).copy()
    weights = 16 ** np.arange(2, -1, -1)
    out = mac.output_map()
    for m1 in (4, 5):
        for m2 in (8, 9):
            dec[int((out[cb[m1], cb[m2]] * weights).sum())] = (0, 0)
    return mac, CooperationCode.without_cooperation(cb, cb, dec, (4, 4), 16)


def conferencing_toy(seed=0, n=2, c=0.5, l=2, q=4, noise=0.2):
    """Random one-round conferencing code with an ML decoder on a noisy q-ary identity MAC.

    The output equals the input pair with probability ``1 - noise`` and is
    uniform over all q^2 pairs otherwise.
    """
    from maccoop.code import LinkCapacities, transcript
    from maccoop.transform import conferencing_code, conferencing_sizes

    rng = np.random.default_rng(seed)
    base = identity_mac(q)
    mac = DiscreteMAC(base.x1, base.x2, base.y, (1 - noise) * base.transition + noise / q**2)
    k1, k2 = conferencing_sizes(n, c, c)
    enc = tuple(rng.integers(0, q, (k1, k2, l, n)) for _ in range(2))
    dummy = np.zeros((q ** (2 * n), 2), dtype=np.int64)
    code = conferencing_code(n, (k1, k2), (l, l), enc, dummy, (q, q), q * q)

    def words(a, b):
        t = transcript(code, a, b)
        return t.x1, t.x2

    dec = ml_decoder(mac, n, code.m1, code.m2, words)
    code = conferencing_code(n, (k1, k2), (l, l), enc, dec, (q, q), q * q)
    # the input code spends one more bit per direction than the output code may
    caps = LinkCapacities.conferencing(np.log2(k1) / n, np.log2(k2) / n)
    return mac, code.with_capacities(caps)


# acceptance criteria record their outcome here; the summary hook prints one line each
ACCEPTANCE_RESULTS: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE_RESULTS):
        ok, title, seconds, detail = ACCEPTANCE_RESULTS[num]
        line = f"criterion {num:>2}: {'PASS' if ok else 'FAIL'}  {title}  ({seconds:.2f} s)"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)
