import numpy as np
import pytest

from seclab.classes import (
    CLASSES,
    ClassReport,
    check_hierarchy,
    classify,
    flag_protocol,
    is_bi,
    is_lopc_flagged,
    is_ubi,
    is_ubi_pd,
    is_ubi_pd_down,
    replay_witnesses,
)
from seclab.corpus import MANIFEST, NAMED, corpus, flagged_overlap, generate, nonbi_mix, xor_triple
from seclab.dist import Channel
from seclab.errors import InternalConsistencyError


@pytest.mark.parametrize("name", sorted(NAMED))
def test_corpus_verdicts_match_manifest(name):
    report = classify(corpus(name))
    assert report.verdicts == MANIFEST[name].classes


@pytest.mark.parametrize("name", sorted(NAMED))
def test_witnesses_replay(name):
    t = corpus(name)
    report = classify(t)
    replay = replay_witnesses(t, report)
    assert set(replay) == set(report.witnesses)
    assert all(replay.values())


def test_tampered_witness_is_caught():
    t = corpus("ERASURE_HALF")
    report = classify(t)
    report.witnesses["UBI"] = {"K_X": {"0": 0, "1": 1}, "K_Y": {"0": 1, "1": 0}}
    assert replay_witnesses(t, report)["UBI"] is False


def test_xor_conflict_is_reported():
    det = is_ubi(xor_triple())
    assert det.verdict == "no"
    assert det.detail["reason"].startswith("blocks of one z")


def test_nonbi_mix_needs_the_constant_channel():
    t = nonbi_mix()
    assert is_bi(t).verdict == "no"
    det = is_ubi_pd_down(t, hints=[(Channel.constant(t.labels("Z")), None)], use_optimizer=False)
    assert det.verdict == "yes"
    assert det.witness["channel"]["output_alphabet"] == ["0"]
    assert det.witness["H(J|Z M)"] == pytest.approx(1.0)


def test_flagged_overlap_is_pd_but_not_ubi():
    t = flagged_overlap()
    assert is_ubi(t).verdict == "no"
    pd = is_ubi_pd(t)
    assert pd.verdict == "yes"
    flagged = is_lopc_flagged(t)
    assert flagged.witness["flag_cells"] == [["a"], ["b"]]


def test_flag_protocol_rejects_crossing_flags():
    # flag equals x xor y: no party can announce it alone
    pxy = np.full((2, 2), 0.25)
    flag = np.array([[0, 1], [1, 0]])
    assert flag_protocol(pxy, flag, ["0", "1"], ["0", "1"], 1e-12) is None
    rounds = flag_protocol(pxy, np.array([[0, 0], [1, 1]]), ["0", "1"], ["0", "1"], 1e-12)
    assert [r.speaker for r in rounds] == ["alice"]


def test_hierarchy_check_flags_violations():
    verdicts = {c: "no" for c in CLASSES}
    verdicts["SBI"] = "yes"
    assert check_hierarchy(verdicts)
    verdicts.update({c: "yes" for c in ("BI", "UBI", "UBI-PD", "UBI-PD-down")})
    assert check_hierarchy(verdicts) == []


def test_two_symbol_regime_gives_definite_answers():
    for name in ("SPOILED_BIT", "BI_ONLY"):
        report = classify(corpus(name))
        assert report.verdicts["UBI-PD"] == "no"
        assert report.verdicts["UBI-PD-down"] == "no"


@pytest.mark.parametrize("cls", ["SBI", "UBI", "UBI-PD", "UBI-PD-down", "LOPC-flagged"])
def test_generated_members_pass_their_detector(cls):
    for seed in range(15):
        report = classify(generate(cls, seed))
        assert report.verdicts[cls] == "yes", (cls, seed)


def test_bi_generator_members_are_bi():
    for seed in range(5):
        assert is_bi(generate("BI", seed)).verdict == "yes"


def test_report_serializes():
    rep = classify(corpus("FLAGGED_QUAD"))
    assert isinstance(rep, ClassReport)
    d = rep.to_dict()
    assert set(d["verdicts"]) == set(CLASSES)
    assert all(c["value"] <= c["tol"] or c["class"] for c in d["certificates_checked"])


@pytest.mark.parametrize("name", ["ERASURE_HALF", "FLAGGED_OVERLAP", "XOR_TRIPLE", "SPOILED_BIT"])
def test_verdicts_invariant_under_relabeling(name):
    t = corpus(name)
    rng = np.random.default_rng(len(name))
    moved = t
    for v in ("X", "Y", "Z"):
        moved = moved.permute_labels(v, list(rng.permutation(len(t.labels(v)))))
    assert classify(moved).verdicts == classify(t).verdicts
