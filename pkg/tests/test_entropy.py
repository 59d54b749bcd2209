import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seclab.corpus import erasure_half, perfect_bit, spoiled_bit, xor_triple
from seclab.dist import JointTable
from seclab.entropy import entropy, evaluate, is_markov, mutual_information, parse_quantity
from seclab.errors import PreconditionError


def _random(seed, shape=(2, 3, 2, 2)):
    rng = np.random.default_rng(seed)
    names = ("A", "B", "C", "D")[: len(shape)]
    m = rng.dirichlet(np.full(int(np.prod(shape)), 0.5)).reshape(shape)
    return JointTable.from_array(names, {v: [str(i) for i in range(n)] for v, n in zip(names, shape)}, m)


def test_known_values():
    assert entropy(perfect_bit(), "X") == pytest.approx(1.0)
    assert mutual_information(perfect_bit(), "X", "Y") == pytest.approx(1.0)
    assert mutual_information(xor_triple(), "X", "Y") == pytest.approx(0.0, abs=1e-12)
    assert mutual_information(xor_triple(), "X", "Y", "Z") == pytest.approx(1.0)
    assert mutual_information(erasure_half(), "X", "Y", "Z") == pytest.approx(0.5)
    assert mutual_information(spoiled_bit(), "X", "Y", "Z") == pytest.approx(0.5)


def test_constant_channel_value_on_spoiled_bit():
    # p_XY = (1/4, 1/2, 0, 1/4): both marginals (3/4, 1/4)
    h = -(0.75 * math.log2(0.75) + 0.25 * math.log2(0.25))
    expected = 2 * h - 1.5
    assert mutual_information(spoiled_bit(), "X", "Y") == pytest.approx(expected, abs=1e-12)
    assert expected == pytest.approx(0.12255624891826566, abs=1e-15)


def test_parse_and_evaluate():
    t = erasure_half()
    assert str(parse_quantity("I(X:Y|Z)")) == "I(X:Y|Z)"
    assert evaluate(t, parse_quantity("H(X|Z)")) == pytest.approx(0.5)
    assert evaluate(t, parse_quantity("I(X,Y:Z)")) == pytest.approx(0.5)  # H(Z) - H(Z|XY) = 1.5 - 1
    for bad in ("H(X:Y)", "I(X)", "K(X)", "I(X:X)"):
        with pytest.raises(PreconditionError):
            parse_quantity(bad)


def test_markov_chain_check():
    assert is_markov(erasure_half(), "Z", "X", "Y")
    assert not is_markov(xor_triple(), "X", "Z", "Y")


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_chain_rule_and_nonnegativity(seed):
    t = _random(seed)
    lhs = mutual_information(t, "A", ("B", "C"))
    rhs = mutual_information(t, "A", "B") + mutual_information(t, "A", "C", "B")
    assert lhs == pytest.approx(rhs, abs=1e-10)
    assert mutual_information(t, "A", "B", ("C", "D")) >= 0
    assert entropy(t, "A", "B") <= entropy(t, "A") + 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_symmetry_of_mutual_information(seed):
    t = _random(seed)
    assert mutual_information(t, "A", "B", "C") == pytest.approx(mutual_information(t, "B", "A", "C"), abs=1e-12)
