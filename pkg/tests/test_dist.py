import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seclab.corpus import erasure_half, perfect_bit
from seclab.dist import Channel, JointTable, load_table, table_from_dict, validate
from seclab.errors import InvalidTableError, PreconditionError


def _random_table(seed, shape=(2, 3, 2)):
    rng = np.random.default_rng(seed)
    m = rng.dirichlet(np.ones(int(np.prod(shape)))).reshape(shape)
    names = ("X", "Y", "Z")
    return JointTable.from_array(names, {v: [str(i) for i in range(n)] for v, n in zip(names, shape)}, m)


def test_json_roundtrip_preserves_mass():
    t = erasure_half()
    back = table_from_dict(json.loads(t.to_json()))
    assert back.variables == t.variables
    assert np.allclose(back.mass, t.mass)


def test_load_table_from_file(tmp_path):
    path = tmp_path / "d.json"
    path.write_text(perfect_bit().to_json())
    assert load_table(path).prob(X="1", Y="1", Z="0") == pytest.approx(0.5)


@pytest.mark.parametrize(
    "doc",
    [
        {"variables": ["X"], "alphabets": {"X": ["0"]}, "mass": [{"X": "0", "p": 0.5}]},
        {"variables": ["X"], "alphabets": {"X": ["0", "1"]}, "mass": [{"X": "0", "p": 1.5}, {"X": "1", "p": -0.5}]},
        {"variables": ["X"], "alphabets": {"X": ["0"]}, "mass": [{"X": "0", "p": 0.5}, {"X": "0", "p": 0.5}]},
        {"variables": ["X"], "alphabets": {"X": ["0"]}, "mass": [{"X": "7", "p": 1.0}]},
        {"variables": ["X"], "alphabets": {"X": ["0"]}, "mass": [{"X": "0", "Q": "1", "p": 1.0}]},
        {"variables": ["X"], "alphabets": {"X": []}, "mass": []},
        {"variables": ["X"], "mass": []},
        {"variables": ["X"], "alphabets": {"X": ["0"]}, "mass": [{"X": "0", "p": "nan"}]},
    ],
)
def test_invalid_documents_are_rejected(doc):
    with pytest.raises(InvalidTableError):
        table_from_dict(doc)


def test_validate_reports_issues_without_raising():
    t = JointTable.from_array(("X",), {"X": ["0", "1"]}, np.array([0.7, 0.7]), check=False)
    report = validate(t)
    assert not report.ok
    assert any("total mass" in issue for issue in report.issues)


def test_marginal_and_condition():
    t = erasure_half()
    assert np.allclose(t.marginalize(("Z",)).mass, [0.25, 0.25, 0.5])
    c = t.condition("Z", "e")
    assert c.prob(X="0", Y="0") == pytest.approx(0.5)
    with pytest.raises(PreconditionError):
        t.with_support_eps(1e-12).extend_independent("W", ["a"], [1.0]).condition("W", "missing")


def test_condition_on_null_event_fails():
    t = JointTable.from_array(("X", "Z"), {"X": ["0"], "Z": ["a", "b"]}, np.array([[1.0, 0.0]]))
    with pytest.raises(PreconditionError):
        t.condition("Z", "b")


def test_channel_rows_must_be_stochastic():
    with pytest.raises(PreconditionError):
        Channel(["0", "1"], ["a"], [[1.0], [0.5]])
    assert Channel.deterministic(["0", "1", "2"], [0, 0, 1]).is_deterministic


def test_extend_with_channel_keeps_marginal():
    t = erasure_half()
    ch = Channel(t.labels("Z"), ["u", "v"], [[0.3, 0.7], [1.0, 0.0], [0.5, 0.5]])
    ext = t.extend_with_channel("Z", ch, "Zbar")
    assert np.allclose(ext.marginal_array(("X", "Y", "Z")), t.mass)
    assert ext.prob(Z="e", Zbar="u") == pytest.approx(0.25)


def test_fuse_concatenates_labels():
    t = erasure_half().fuse(("X", "Y"), "XY")
    assert t.variables == ("XY", "Z")
    assert t.prob(XY="1,1", Z="1") == pytest.approx(0.25)


def test_permute_labels_moves_mass():
    t = perfect_bit()
    flipped = t.permute_labels("Y", [1, 0])
    assert flipped.prob(X="0", Y="1") == pytest.approx(0.5)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_marginalize_then_sum_is_one(seed):
    t = _random_table(seed)
    for keep in (("X",), ("Y", "Z"), ("Z", "X")):
        assert t.marginal_array(keep).sum() == pytest.approx(1.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_dict_roundtrip_property(seed):
    t = _random_table(seed)
    back = table_from_dict(t.to_dict())
    assert np.allclose(back.mass, t.mass, atol=0, rtol=0)
