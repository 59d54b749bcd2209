import json
import subprocess
import sys

import pytest

from seclab.cli import main
from seclab.corpus import corpus
from seclab.protocol import Round, protocol_to_dict


@pytest.fixture
def erasure_file(tmp_path):
    path = tmp_path / "erasure.json"
    path.write_text(json.dumps(corpus("ERASURE_HALF").to_dict()))
    return path


def _run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_corpus_list_and_emit(capsys):
    code, out, _ = _run(capsys, "corpus", "list", "--json")
    assert code == 0
    names = [e["name"] for e in json.loads(out)["entries"]]
    assert "SPOILED_BIT" in names
    code, out, _ = _run(capsys, "corpus", "emit", "PERFECT_BIT")
    assert json.loads(out)["variables"] == ["X", "Y", "Z"]


def test_entropy_and_partition(capsys, erasure_file):
    code, out, _ = _run(capsys, "entropy", erasure_file, "I(X:Y|Z)", "H(X)", "--json")
    vals = json.loads(out)
    assert code == 0
    assert vals["I(X:Y|Z)"] == pytest.approx(0.5) and vals["H(X)"] == pytest.approx(1.0)
    code, out, _ = _run(capsys, "partition", erasure_file, "--given", "Z")
    assert json.loads(out)["H(J|Z)"] == pytest.approx(0.5)


def test_reversible_and_embed(capsys, erasure_file):
    code, out, _ = _run(capsys, "reversible", erasure_file)
    doc = json.loads(out)
    assert doc["status"] == "reversible" and doc["key_value"] == pytest.approx(0.5)
    code, out, _ = _run(capsys, "embed", erasure_file, "--report", "theorem3")
    doc = json.loads(out)
    assert doc["concurrence"] == pytest.approx(0.5)
    assert doc["theorem3"]["key_closed_form"] == pytest.approx(0.5)


def test_protocol_command(capsys, erasure_file, tmp_path):
    proto = tmp_path / "p.json"
    proto.write_text(json.dumps(protocol_to_dict([Round("alice", {("0", ""): "m0", ("1", ""): "m1"})])))
    code, out, _ = _run(capsys, "protocol", erasure_file, proto, "--verify-eq7")
    assert code == 0
    assert json.loads(out)["message_identity"]["passed"] is True


def test_exit_codes(capsys, tmp_path, erasure_file):
    bad = tmp_path / "bad.json"
    bad.write_text('{"variables": ["X"], "alphabets": {"X": ["0"]}, "mass": [{"X": "0", "p": 0.5}]}')
    code, _, err = _run(capsys, "entropy", bad, "H(X)")
    assert code == 2 and err.startswith("seclab:")
    code, _, _ = _run(capsys, "entropy", tmp_path / "missing.json", "H(X)")
    assert code == 2
    code, _, _ = _run(capsys, "entropy", erasure_file, "I(X:X)")
    assert code == 2
    big = corpus("PERFECT_BIT").extend_independent("W", [str(i) for i in range(9)], [1 / 9] * 9)
    doc = big.to_dict()
    path = tmp_path / "big.json"
    path.write_text(json.dumps(doc))
    code, _, _ = _run(capsys, "intrinsic", path, "--z", "W")
    assert code == 3


def test_module_entry_point(erasure_file):
    res = subprocess.run([sys.executable, "-m", "seclab.cli", "entropy", str(erasure_file), "H(Z)", "--json"],
                         capture_output=True, text=True, check=True)
    assert json.loads(res.stdout)["H(Z)"] == pytest.approx(1.5)
