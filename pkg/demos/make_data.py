"""
Build the sample inputs used by the demos and the README
========================================================

Writes JSON files into ``demos/data``:

* ``identity4.json``: 4x4 identity channel, the output reveals both inputs.
* ``planted_code.json``: a perfect n = 3 code on it with one corrupted 2x2 message block.
* ``noisy4.json`` / ``conferencing_code.json``: a one-round conferencing code
  with K1 = K2 = 4 blocks of 2 messages on a noisy version of the same channel.
* ``ones_block.json``: a 6x6 0/1 matrix whose top-left 3x3 block is all ones.
"""
from pathlib import Path

import numpy as np

from maccoop.channel import DiscreteMAC
from maccoop.cli import dumps
from maccoop.code import CooperationCode, LinkCapacities, inverse_decoder, transcript
from maccoop.transform import conferencing_code, conferencing_sizes

DATA = Path(__file__).parent / "data"


def identity_mac(q=4, noise=0.0):
    p = np.zeros((q, q, q * q))
    for a in range(q):
        for b in range(q):
            p[a, b, q * a + b] = 1.0
    p = (1 - noise) * p + noise / q**2
    labels = [str(i) for i in range(q)]
    return DiscreteMAC(labels, labels, [str(i) for i in range(q * q)], p)


def planted_code():
    mac = identity_mac(4)
    cb = np.array([[(m // 16) % 4, (m // 4) % 4, m % 4] for m in range(16)])
    dec = inverse_decoder(mac, cb, cb).copy()
    weights = 16 ** np.arange(2, -1, -1)
    out = mac.output_map()
    # every output of the pairs {4, 5} x {8, 9} decodes to (0, 0)
    for m1 in (4, 5):
        for m2 in (8, 9):
            dec[int((out[cb[m1], cb[m2]] * weights).sum())] = (0, 0)
    return mac, CooperationCode.without_cooperation(cb, cb, dec, (4, 4), 16)


def ml_decoder(mac, code):
    """Maximum-likelihood table over all output sequences, ties to the lowest pair."""
    ny = mac.shape[2]
    logp = np.full((code.m1, code.m2, ny**code.n), 0.0)
    for a in range(code.m1):
        for b in range(code.m2):
            t = transcript(code, a, b)
            rows = [mac.transition[x1, x2] for x1, x2 in zip(t.x1, t.x2)]
            joint = rows[0]
            for r in rows[1:]:
                joint = np.outer(joint, r).ravel()
            logp[a, b] = joint
    flat = logp.reshape(code.m1 * code.m2, -1)
    best = flat.argmax(axis=0)
    return np.stack(np.divmod(best, code.m2), axis=1)


def conferencing_example(seed=0, n=2, c=0.5, l=2):
    rng = np.random.default_rng(seed)
    mac = identity_mac(4, noise=0.2)
    k1, k2 = conferencing_sizes(n, c, c)
    enc = tuple(rng.integers(0, 4, (k1, k2, l, n)) for _ in range(2))
    dummy = np.zeros((16**n, 2), dtype=np.int64)
    code = conferencing_code(n, (k1, k2), (l, l), enc, dummy, (4, 4), 16)
    code = conferencing_code(n, (k1, k2), (l, l), enc, ml_decoder(mac, code), (4, 4), 16)
    caps = LinkCapacities.conferencing(np.log2(k1) / n, np.log2(k2) / n)
    return mac, code.with_capacities(caps)


def main():
    DATA.mkdir(exist_ok=True)
    mac, code = planted_code()
    (DATA / "identity4.json").write_text(dumps(mac.to_dict()))
    (DATA / "planted_code.json").write_text(dumps(code.to_dict()))
    mac, code = conferencing_example()
    (DATA / "noisy4.json").write_text(dumps(mac.to_dict()))
    (DATA / "conferencing_code.json").write_text(dumps(code.to_dict()))
    bits = np.zeros((6, 6), dtype=int)
    bits[:3, :3] = 1
    (DATA / "ones_block.json").write_text(dumps(bits.tolist()))
    print("wrote", ", ".join(sorted(p.name for p in DATA.glob("*.json"))))


if __name__ == "__main__":
    main()
