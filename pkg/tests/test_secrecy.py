import time

import numpy as np
import pytest

from seclab.corpus import (
    bi_only,
    corpus,
    erasure_half,
    nonbi_mix,
    perfect_bit,
    spoiled_bit,
    xor_triple,
)
from seclab.dist import Channel
from seclab.entropy import mutual_information
from seclab.errors import PreconditionError, SizeCapError
from seclab.oracles import oracle_intrinsic_exhaustive
from seclab.secrecy import (
    check_blacktriangleleft,
    decide_reversibility,
    intrinsic_information,
    proposition1_scan,
    winter_key_cost,
)

# frozen from the brute-force oracle and closed forms
SPOILED_INTRINSIC = 0.12255624891826566  # 2 h(1/4) - 3/2
BI_ONLY_INTRINSIC = 0.18872187554086717  # 1 - h(1/4)


def test_intrinsic_examples():
    assert intrinsic_information(xor_triple()).value == pytest.approx(0.0, abs=1e-9)
    assert intrinsic_information(perfect_bit()).value == pytest.approx(1.0, abs=1e-9)
    res = intrinsic_information(erasure_half())
    assert res.value == pytest.approx(0.5, abs=1e-9)
    assert np.array_equal(res.witness_channels[0].matrix, np.eye(3))


def test_frozen_values_match_oracle():
    assert oracle_intrinsic_exhaustive(spoiled_bit()) == pytest.approx(SPOILED_INTRINSIC, abs=1e-12)
    assert oracle_intrinsic_exhaustive(bi_only()) == pytest.approx(BI_ONLY_INTRINSIC, abs=1e-12)
    assert intrinsic_information(spoiled_bit()).value == pytest.approx(SPOILED_INTRINSIC, abs=1e-9)


def test_merging_the_revealing_symbols_of_the_erasure_table():
    # {0,1} -> k, e -> e: Eve learns only whether she saw the bit, so I(X:Y|Zbar) = 1
    t = erasure_half()
    ch = Channel(t.labels("Z"), ["k", "e"], [[1, 0], [1, 0], [0, 1]])
    assert mutual_information(t.extend_with_channel("Z", ch, "Zbar"), "X", "Y", "Zbar") == pytest.approx(1.0)


@pytest.mark.parametrize("name", ["ERASURE_HALF", "SPOILED_BIT", "MIXED_2X3", "BI_ONLY", "FLAGGED_OVERLAP"])
def test_intrinsic_never_above_oracle_or_simple_bounds(name):
    t = corpus(name)
    v = intrinsic_information(t, restarts=8).value
    assert v <= oracle_intrinsic_exhaustive(t) + 1e-9
    assert v <= min(mutual_information(t, "X", "Y", "Z"), mutual_information(t, "X", "Y")) + 1e-9


def test_witness_reproduces_value():
    t = spoiled_bit()
    res = intrinsic_information(t, restarts=8)
    for ch in res.witness_channels:
        ext = t.extend_with_channel("Z", ch, "Zbar")
        assert mutual_information(ext, "X", "Y", "Zbar") == pytest.approx(res.value, abs=1e-9)


def test_intrinsic_is_seed_deterministic():
    a = intrinsic_information(bi_only(), restarts=6, seed=11).to_dict()
    b = intrinsic_information(bi_only(), restarts=6, seed=11).to_dict()
    assert a == b


def test_exhaustive_cap():
    from seclab.dist import JointTable

    m = np.full((1, 1, 9), 1 / 9)
    t = JointTable.from_array(("X", "Y", "Z"), {"X": ["0"], "Y": ["0"], "Z": [str(i) for i in range(9)]}, m)
    with pytest.raises(SizeCapError):
        intrinsic_information(t)
    assert intrinsic_information(t, local_only=True, restarts=1).value == pytest.approx(0.0, abs=1e-12)


def test_key_cost_examples():
    assert winter_key_cost(perfect_bit()).value == pytest.approx(1.0, abs=1e-9)
    kc = winter_key_cost(erasure_half())
    assert kc.value == pytest.approx(0.5, abs=1e-9)
    assert winter_key_cost(spoiled_bit()).value > SPOILED_INTRINSIC + 1e-3


def test_blacktriangleleft_examples():
    perfect = np.array([[0.5, 0.0], [0.0, 0.5]])
    point = np.array([[0.0, 1.0], [0.0, 0.0]])
    assert check_blacktriangleleft(point, perfect) == (True, "uncorrelated", "x-first")
    assert check_blacktriangleleft(perfect, perfect)[:2] == (True, "support-contained")
    p = np.zeros((3, 3))
    p[0, 0] = 1.0
    q = np.zeros((3, 3))
    q[1, 1] = q[2, 2] = 0.5
    assert check_blacktriangleleft(q, p) == (False, None, None)
    with pytest.raises(PreconditionError):
        check_blacktriangleleft(np.ones((2, 2)) / 4, np.ones((2, 3)) / 6)


def test_scan_examples():
    certs = proposition1_scan(spoiled_bit())
    assert [(c["x"], c["y"], c["z0"], c["z1"]) for c in certs] == [("0", "1", "0", "1")]
    assert proposition1_scan(erasure_half()) == []
    assert proposition1_scan(perfect_bit()) == []


def test_reversibility_decisions():
    v = decide_reversibility(erasure_half())
    assert v.status == "reversible" and v.key_value == pytest.approx(0.5, abs=1e-9)
    v = decide_reversibility(spoiled_bit())
    assert v.status == "not-reversible"
    assert any(c["kind"] == "proposition-1" for c in v.certificates)
    v = decide_reversibility(xor_triple())
    assert v.status == "reversible" and v.key_value == 0.0
    v = decide_reversibility(nonbi_mix())
    assert v.status == "reversible" and v.key_value == pytest.approx(1.0, abs=1e-9)
    assert decide_reversibility(bi_only()).status == "not-reversible"


def test_reversible_verdicts_close_the_sandwich():
    for name in ("ERASURE_HALF", "FLAGGED_QUAD", "MIXED_2X3", "NONBI_MIX"):
        t = corpus(name)
        v = decide_reversibility(t)
        kc = winter_key_cost(t).value
        assert v.status == "reversible"
        assert kc - v.intrinsic <= 1e-6
        assert abs(v.key_value - v.intrinsic) <= 1e-6


def test_decision_time():
    start = time.perf_counter()
    decide_reversibility(erasure_half())
    assert time.perf_counter() - start < 5.0
