"""
Conferencing codes: keep the best quarter of the block pairs
============================================================

With conferencing links of capacity C each user can tell the other which
of 2 floor(2^{nC}) blocks its message is in.  Dropping one bit per
direction and keeping the quarter of block pairs with the smallest
average error gives a code whose every block is at most 4/3 of the
original average error.
"""
import json
from pathlib import Path

import numpy as np

from maccoop.channel import DiscreteMAC
from maccoop.code import CooperationCode
from maccoop.transform import apply_prop3, plan_prop3, verify_transform

DATA = Path(__file__).parent / "data"
mac = DiscreteMAC.from_dict(json.loads((DATA / "noisy4.json").read_text()))
code = CooperationCode.from_dict(json.loads((DATA / "conferencing_code.json").read_text()))

plan = plan_prop3(code, mac, 0.5, 0.5)
print("block sizes (K, L):", plan.sizes)
print("block averages:")
print(np.round(plan.block_avgs, 3))
print("kept pairs:", plan.quarter.tolist())

new = apply_prop3(plan, code)
rep = verify_transform(code, new, mac, 0.5, 0.5, plan=plan)
cert = rep["certificate"]
print(f"eps = {cert['epsilon']:.4f}, worst kept block = {cert['value']:.4f}, 4 eps / 3 = {cert['limit']:.4f}")
print("links within C = 1/2:", rep["links_within_budget"])
