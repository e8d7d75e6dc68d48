"""
Maximal-error codes from average-error codes with one extra round
=================================================================

A cooperation facilitator that talks to both encoders once more can steer
every block of messages onto a good original message pair.  The planted
code below is perfect except for one 2x2 message block that always fails.
"""
import json
from pathlib import Path

from maccoop.channel import DiscreteMAC
from maccoop.code import CooperationCode, transcript
from maccoop.transform import E3, apply_theorem1, plan_theorem1, verify_transform

DATA = Path(__file__).parent / "data"
mac = DiscreteMAC.from_dict(json.loads((DATA / "identity4.json").read_text()))
code = CooperationCode.from_dict(json.loads((DATA / "planted_code.json").read_text()))
r = 4 / 3

plan = plan_theorem1(code, mac, r, r, delta=0.2)
print("epsilon", plan.epsilon, " threshold", round(plan.threshold, 4), " K*", plan.k_star)
print("A matrix ones:", plan.a_matrix.ones_count, " bound", round(plan.bound, 4), plan.certificate)

new = apply_theorem1(plan, code)
print("rounds", code.rounds, "->", new.rounds, " messages", code.messages, "->", new.messages)

# user 1 with new message 2 and user 2 with new message 5
t = transcript(new, 2, 5)
print("facilitator replies:", t.v, " codewords:", t.x1, t.x2)

rep = verify_transform(code, new, mac, r, r, plan=plan, delta=0.2)
print("max error", rep["before"]["max"], "->", rep["after"]["max"])
print("rate loss", [round(x, 4) for x in rep["rate_loss"]], "within 2 delta:", rep["rate_loss_within_2delta"])
print("certificate", rep["certificate"]["status"], f"(limit e^3 eps = {E3 * plan.epsilon:.4f})")
print("link bits", rep["link_bits"], "budget", rep["link_budget_bits"])
