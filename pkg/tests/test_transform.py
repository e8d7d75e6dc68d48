import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import conferencing_toy, identity_mac, j0_code, planted_code
from maccoop.code import LinkCapacities, error_matrix, inverse_decoder, transcript
from maccoop.transform import (
    E3,
    UncertifiedPlanError,
    apply_prop3,
    apply_theorem1,
    conferencing_code,
    conferencing_sizes,
    plan_prop3,
    plan_theorem1,
    two_pass_selection,
    verify_transform,
)


def mapped_pair(plan, a, b):
    """Original message pair the transformed code actually sends for new pair (a, b)."""
    (_, l1), (_, l2) = plan.sizes
    s1, e1 = divmod(a, l1)
    s2, e2 = divmod(b, l2)
    p = plan.good_entries[s1, s2]
    return (int(plan.kept1[plan.perm1[p[0]] * l1 + e1]), int(plan.kept2[plan.perm2[p[1]] * l2 + e2]))


def planted_one_round():
    """The planted codebook wrapped in a forwarding round (J = 1)."""
    mac, base = planted_code()
    cb = base.channel_maps[0]
    enc = np.empty((2, 2, 8, 3), dtype=np.int64)
    for k1, k2, ell in itertools.product(range(2), range(2), range(8)):
        enc[k1, k2, ell] = cb[k1 * 8 + ell]
    enc2 = np.empty_like(enc)
    for k1, k2, ell in itertools.product(range(2), range(2), range(8)):
        enc2[k1, k2, ell] = cb[k2 * 8 + ell]
    return mac, conferencing_code(3, (2, 2), (8, 8), (enc, enc2), base.decoder, (4, 4), 16)


def test_two_pass_selection_example():
    rows, cols = two_pass_selection(np.array([[0, 0], [1, 1]]), 1, 1)
    assert rows.tolist() == [0] and cols.tolist() == [0]
    rows, cols = two_pass_selection(np.array([[0.5, 0.1, 0.2], [0.0, 0.9, 0.0], [0.25, 0.25, 0.5]]), 2, 2)
    assert rows.tolist() == [0, 1]
    assert cols.tolist() == [0, 2]


def test_perfect_code_gives_identity_transform():
    mac = identity_mac(2)
    cb = np.array([[0, 0], [0, 1], [1, 0], [1, 1]])
    code = j0_code(mac, cb, cb, inverse_decoder(mac, cb, cb))
    plan = plan_theorem1(code, mac, 1.0, 1.0, 0.1)
    assert plan.epsilon == 0 and plan.a_matrix.ones_count == 0
    assert plan.k_star == 1 and plan.certificate == "certified"
    new = apply_theorem1(plan, code)
    assert new.messages == code.messages
    assert np.all(error_matrix(new, mac).entries == 0)
    for a, b in itertools.product(range(4), repeat=2):
        assert mapped_pair(plan, a, b) == (a, b)


def test_planted_toy_plan():
    mac, code = planted_code()
    plan = plan_theorem1(code, mac, 4 / 3, 4 / 3, 0.2)
    assert plan.epsilon == pytest.approx(4 / 256)
    assert plan.threshold == pytest.approx(E3 * 4 / 256)
    assert plan.k_star == 2 and plan.k_star_measured == 8
    assert plan.sizes == ((16, 1), (16, 1))
    assert plan.a_matrix.ones_count == 4
    assert plan.bound == pytest.approx(0.8531, abs=1e-4)
    assert plan.new_messages == (8, 8)


def test_planted_toy_transform_is_clean():
    mac, code = planted_code()
    plan = plan_theorem1(code, mac, 4 / 3, 4 / 3, 0.2)
    new = apply_theorem1(plan, code)
    rep = verify_transform(code, new, mac, 4 / 3, 4 / 3, plan=plan, delta=0.2)
    assert rep["before"]["max"] == 1.0
    assert rep["after"]["max"] == 0.0
    assert rep["certificate"]["status"] == "pass"
    assert rep["links_within_budget"]
    assert rep["rate_loss"] == pytest.approx([1 / 3, 1 / 3])
    assert rep["rate_loss_within_2delta"]


def test_measured_block_side_loses_too_much_rate():
    mac, code = planted_code()
    plan = plan_theorem1(code, mac, 4 / 3, 4 / 3, 0.2, k_star="measured")
    new = apply_theorem1(plan, code)
    rep = verify_transform(code, new, mac, 4 / 3, 4 / 3, plan=plan, delta=0.2)
    assert plan.k_star == 8 and new.messages == (2, 2)
    assert not rep["rate_loss_within_2delta"]


def test_multi_round_path_replays_original_code():
    mac, code = planted_one_round()
    assert code.rounds == 1
    plan = plan_theorem1(code, mac, 4 / 3, 4 / 3, 0.2)
    assert plan.a_matrix.ones_count > 0
    new = apply_theorem1(plan, code)
    assert new.rounds == 2
    e_old = error_matrix(code, mac).entries
    e_new = error_matrix(new, mac).entries
    for a, b in itertools.product(range(new.m1), range(new.m2)):
        m1, m2 = mapped_pair(plan, a, b)
        t_new, t_old = transcript(new, a, b), transcript(code, m1, m2)
        assert (t_new.x1, t_new.x2) == (t_old.x1, t_old.x2)
        assert e_new[a, b] <= e_old[m1, m2] + 1e-12
    rep = verify_transform(code, new, mac, 4 / 3, 4 / 3, plan=plan, delta=0.2)
    assert rep["certificate"]["status"] == "pass"
    assert rep["links_within_budget"]


def test_single_round_matches_multi_round():
    mac, code = planted_one_round()
    plan = plan_theorem1(code, mac, 4 / 3, 4 / 3, 0.2)
    one = apply_theorem1(plan, code, single_round=True)
    two = apply_theorem1(plan, code, single_round=False)
    assert one.rounds == 1 and two.rounds == 2
    for a, b in itertools.product(range(one.m1), range(one.m2)):
        t1, t2 = transcript(one, a, b), transcript(two, a, b)
        assert (t1.x1, t1.x2) == (t2.x1, t2.x2)
    np.testing.assert_allclose(error_matrix(one, mac).entries, error_matrix(two, mac).entries)


def test_failed_search_raises_with_best_attempt(monkeypatch):
    # the threshold keeps A sparse, so a failure has to be simulated
    import maccoop.transform as tr
    from maccoop.blockperm import PermutationSearch

    def give_up(a, k, budget, seed):
        ident = (np.arange(a.shape[0]), np.arange(a.shape[1]))
        return PermutationSearch(False, *ident, 3, "random+repair", seed, 2.0, budget)

    monkeypatch.setattr(tr, "find_permutations", give_up)
    mac, code = planted_code()
    with pytest.raises(UncertifiedPlanError) as info:
        plan_theorem1(code, mac, 4 / 3, 4 / 3, 0.2, k_star=4)
    assert info.value.attempt["violations"] == 3
    assert info.value.attempt["perm1"] == list(range(16))


def test_plan_argument_checks():
    mac, code = planted_code()
    with pytest.raises(ValueError):
        plan_theorem1(code, mac, -1, 0, 0.2)
    with pytest.raises(ValueError):
        plan_theorem1(code, mac, 1, 1, 0)
    with pytest.raises(ValueError):
        plan_theorem1(code, mac, 1, 1, 0.2, k_star="huge")
    with pytest.raises(ValueError):
        plan_theorem1(code, mac, 1, 1, 0.2, k_star=17)


def test_plan_json_fields():
    mac, code = planted_code()
    d = plan_theorem1(code, mac, 4 / 3, 4 / 3, 0.2).to_dict()
    assert d["k_star"] == 2 and d["certificate"] == "certified"
    assert d["bound_kind"] in ("matrix", "vector")


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6))
def test_transform_never_worse_than_mapped_pair(seed):
    mac, code = planted_code()
    rng = np.random.default_rng(seed)
    dec = code.decoder.copy()
    hits = rng.choice(dec.shape[0], 40, replace=False)
    dec[hits] = rng.integers(0, 16, (40, 2))
    noisy = code.__class__(**{**code._fields(), "decoder": dec})
    try:
        plan = plan_theorem1(noisy, mac, 1.0, 1.0, 0.3, budget=500, seed=seed)
    except UncertifiedPlanError:
        return
    new = apply_theorem1(plan, noisy)
    e_old = error_matrix(noisy, mac).entries
    e_new = error_matrix(new, mac).entries
    for a, b in itertools.product(range(new.m1), range(new.m2)):
        assert e_new[a, b] <= e_old[mapped_pair(plan, a, b)] + 1e-12
    (l1, l2) = plan.sizes[0][1], plan.sizes[1][1]
    blocks = e_new[: plan.blocks[0] * l1, : plan.blocks[1] * l2]
    avgs = blocks.reshape(plan.blocks[0], l1, plan.blocks[1], l2).mean(axis=(1, 3))
    assert avgs.max() <= E3 * plan.epsilon + 1e-12


def test_conferencing_sizes():
    assert conferencing_sizes(2, 0.5, 0.5) == (4, 4)
    assert conferencing_sizes(3, 1 / 3, 0) == (4, 2)


def test_quarter_blocks_plan_and_apply():
    mac, code = conferencing_toy(0)
    plan = plan_prop3(code, mac, 0.5, 0.5)
    assert plan.sizes == ((4, 2), (4, 2))
    assert plan.new_sizes == (2, 2)
    assert len(plan.quarter) == 4
    chosen = plan.block_avgs[tuple(plan.quarter.T)]
    rest = np.delete(plan.block_avgs.ravel(), np.ravel_multi_index(tuple(plan.quarter.T), (4, 4)))
    assert chosen.max() <= rest.min() + 1e-15
    # a quarter of the blocks with the smallest averages cannot average above the mean
    assert chosen.mean() <= plan.epsilon + 1e-12
    new = apply_prop3(plan, code)
    assert new.messages == (4, 4)
    assert new.capacities == LinkCapacities.conferencing(0.5, 0.5)
    up, down = new.link_usage()
    assert up == (1.0, 1.0) and down == (1.0, 1.0)
    rep = verify_transform(code, new, mac, 0.5, 0.5, plan=plan)
    assert rep["links_within_budget"]
    assert rep["certificate"]["status"] == "pass"
    assert rep["certificate"]["value"] <= 4 * plan.epsilon / 3 + 1e-12


def test_quarter_blocks_rejects_non_conferencing_codes():
    mac, code = planted_code()
    with pytest.raises(ValueError, match="single-round"):
        plan_prop3(code, mac, 0.5, 0.5)


def test_verify_transform_identity():
    mac, code = planted_code()
    rep = verify_transform(code, code, mac, 1.0, 1.0)
    assert rep["rate_loss"] == [0.0, 0.0]
    assert rep["before"] == rep["after"]
    assert "certificate" not in rep


def test_inflated_budget_covers_added_round():
    mac, code = planted_code()
    code = code.with_capacities(LinkCapacities((0, 0), (0, 0)))
    plan = plan_theorem1(code, mac, 4 / 3, 4 / 3, 0.2)
    new = apply_theorem1(plan, code, single_round=False)
    slack = math.log2(1 + 3 * (sum(plan.measured_rates) + 0.4)) / 3
    assert new.capacities.c_in[0] == pytest.approx(4 / 3 + slack)
    assert new.capacities.c_out[0] == pytest.approx(slack)
    up, down = new.link_usage()
    assert all(up[i] <= 3 * new.capacities.c_in[i] + 1e-9 for i in range(2))
    assert all(down[i] <= 3 * new.capacities.c_out[i] + 1e-9 for i in range(2))
