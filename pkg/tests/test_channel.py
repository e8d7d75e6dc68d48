import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_mac
from maccoop.channel import (
    DiscreteMAC,
    ProductInput,
    SizeLimitError,
    binary_adder_mac,
    binary_entropy,
    contraction_mac,
    entropy,
    extend,
    mutual_info,
)


def test_contraction_lookups():
    mac = contraction_mac()
    assert mac.shape == (4, 2, 12)
    assert mac.prob("(c,0)", "a", "0") == 1.0
    assert mac.prob("(c,0)", "b", "0") == 1.0
    assert mac.prob("(C,1)", "B", "1") == 1.0
    assert mac.prob("(C,1)", "A", "1") == 1.0
    assert mac.prob("(A,0)", "A", "0") == 1.0
    assert mac.prob("(a,1)", "a", "1") == 1.0
    assert mac.is_deterministic


def test_contraction_merges_exactly_two_pairs_each():
    out = contraction_mac().output_map()
    values, counts = np.unique(out, return_counts=True)
    assert sorted(counts.tolist()) == [1, 1, 1, 1, 2, 2]
    assert len(values) == 6


def test_validation_errors():
    with pytest.raises(ValueError):
        DiscreteMAC(["0"], ["0"], ["0", "1"], [[[0.5, 0.6]]])
    with pytest.raises(ValueError):
        DiscreteMAC(["0"], ["0"], ["0", "1"], [[[1.5, -0.5]]])
    with pytest.raises(ValueError):
        DiscreteMAC(["0", "0"], ["0"], ["0"], [[[1.0]], [[1.0]]])
    with pytest.raises(ValueError):
        DiscreteMAC(["0"], ["0"], ["0", "1"], [[[1.0]]])


def test_deterministic_flag():
    assert binary_adder_mac().is_deterministic
    assert not random_mac(np.random.default_rng(0)).is_deterministic


def test_json_round_trip():
    mac = contraction_mac()
    back = DiscreteMAC.from_dict(mac.to_dict())
    assert back.y == mac.y
    np.testing.assert_array_equal(back.transition, mac.transition)
    with pytest.raises(ValueError, match="missing"):
        DiscreteMAC.from_dict({"x1": ["0"]})


def test_extend_identity_case():
    mac = random_mac(np.random.default_rng(1))
    e1 = extend(mac, 1)
    np.testing.assert_array_equal(e1.transition, mac.transition)
    assert e1.x1 == tuple((v,) for v in mac.x1)


def test_extend_contraction_pair():
    e2 = extend(contraction_mac(), 2)
    # (a,0) -> (c,0) and (A,1) -> (C,1)
    assert e2.prob(("(c,0)", "(C,1)"), ("a", "A"), ("0", "1")) == 1.0
    assert e2.prob(("(c,0)", "(A,1)"), ("a", "A"), ("0", "1")) == 0.0
    assert e2.prob(("(c,0)", "(A,0)"), ("a", "A"), ("0", "0")) == 1.0
    assert e2.is_deterministic


def test_extend_matches_product_of_lookups():
    mac = random_mac(np.random.default_rng(2), 2, 3, 2)
    e = extend(mac, 3)
    for x1 in itertools.product(range(2), repeat=3):
        for x2 in itertools.product(range(3), repeat=3):
            for y in itertools.product(range(2), repeat=3):
                want = np.prod([mac.transition[a, b, c] for a, b, c in zip(x1, x2, y)])
                got = e.prob(tuple(mac.y[c] for c in y), tuple(mac.x1[a] for a in x1), tuple(mac.x2[b] for b in x2))
                assert got == pytest.approx(want, abs=1e-15)


def test_extend_guard_names_dimension():
    with pytest.raises(SizeLimitError) as info:
        extend(contraction_mac(), 7)
    assert "Y^n" in str(info.value)
    assert info.value.log_size == pytest.approx(7 * math.log2(12))
    extend(contraction_mac(), 2, max_log_size=10)
    with pytest.raises(SizeLimitError, match="Y\\^n"):
        extend(contraction_mac(), 3, max_log_size=10)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 3))
def test_extension_rows_normalized(seed, n):
    mac = random_mac(np.random.default_rng(seed), 2, 2, 3)
    e = extend(mac, n)
    assert np.all(np.abs(e.transition.sum(axis=2) - 1) <= n * 1e-9)


def test_binary_entropy_values():
    assert binary_entropy(0.5) == 1.0
    assert binary_entropy(0.0) == 0.0
    assert binary_entropy(1 / 3) == pytest.approx(math.log2(3) - 2 / 3, abs=1e-12)
    assert binary_entropy(1 / 3) == pytest.approx(0.918296, abs=1e-6)
    with pytest.raises(ValueError):
        binary_entropy(1.2)


def test_entropy_rejects_unnormalized():
    with pytest.raises(ValueError):
        entropy([0.5, 0.6])
    with pytest.raises(ValueError):
        mutual_info(np.full((2, 2, 2), 0.2), "X1;Y")


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.0, 1.0), min_size=2, max_size=8).filter(lambda v: sum(v) > 1e-3), st.randoms())
def test_entropy_permutation_invariant(vals, rnd):
    p = np.array(vals) / sum(vals)
    q = p.copy()
    rnd.shuffle(q)
    assert entropy(p) == pytest.approx(entropy(q), abs=1e-12)


GROUPINGS = ["X1,X2;Y", "X1;Y", "X2;Y|X1", "X1;Y|U,X2", "X2;Y|U,X1", "X1,X2;Y|U", "X1;X2"]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000))
def test_mutual_info_nonnegative(seed):
    rng = np.random.default_rng(seed)
    joint = rng.random((2, 3, 2, 3)) ** 3
    joint /= joint.sum()
    for g in GROUPINGS:
        assert mutual_info(joint, g) >= -1e-9


def test_mutual_info_matches_direct_formula():
    rng = np.random.default_rng(7)
    joint = rng.random((3, 2, 4))
    joint /= joint.sum()
    pxy = joint.reshape(6, 4)
    px, py = pxy.sum(1), pxy.sum(0)
    direct = sum(
        pxy[i, j] * math.log2(pxy[i, j] / (px[i] * py[j])) for i in range(6) for j in range(4)
    )
    assert mutual_info(joint, "X1,X2;Y") == pytest.approx(direct, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 100_000))
def test_deterministic_mi_equals_output_entropy(seed):
    rng = np.random.default_rng(seed)
    mac = contraction_mac()
    u = int(rng.integers(1, 4))
    inp = ProductInput.with_auxiliary(
        rng.dirichlet(np.ones(u)), rng.dirichlet(np.ones(4), size=u), rng.dirichlet(np.ones(2), size=u)
    )
    joint = inp.joint(mac)
    py = joint.sum(axis=(0, 1, 2))
    assert mutual_info(joint, "X1,X2;Y") == pytest.approx(entropy(py), abs=1e-9)


def test_product_input_validation_and_marginals():
    inp = ProductInput.independent([0.25, 0.75], [1.0, 0.0])
    assert inp.u_cardinality == 1
    np.testing.assert_allclose(inp.p1, [0.25, 0.75])
    with pytest.raises(ValueError):
        ProductInput.independent([0.5, 0.6], [1.0])
    with pytest.raises(ValueError):
        ProductInput.with_auxiliary([0.5, 0.5], [[1, 0]], [[1, 0], [0, 1]])


def test_mutual_info_parse_errors():
    joint = np.full((2, 2, 2), 1 / 8)
    with pytest.raises(ValueError):
        mutual_info(joint, "X1 Y")
    with pytest.raises(ValueError):
        mutual_info(joint, "X3;Y")
