"""End-to-end acceptance checks; each test prints one PASS/FAIL line."""

import json
import subprocess
import sys
import time
from itertools import product

import numpy as np
import pytest

from seclab.classes import (
    check_hierarchy,
    classify,
    is_lopc_flagged,
    is_sbi,
    is_ubi,
    is_ubi_pd,
    is_ubi_pd_down,
)
from seclab.common import check_double_markov, conditional_block_labels, maximal_common_partition
from seclab.corpus import NAMED, bi_random, corpus, erasure_half, generate
from seclab.dist import JointTable
from seclab.errors import InternalConsistencyError
from seclab.oracles import oracle_common_partition
from seclab.protocol import apply_protocol, enumerate_protocols, verify_message_identity
from seclab.quantum import E, closed_form_concurrence, concurrence_2q, embed, reduce_ab, theorem3_report
from seclab.secrecy import decide_reversibility, intrinsic_information, winter_key_cost


@pytest.fixture
def report(capsys):
    def emit(number: int, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\nCRITERION {number}: {'PASS' if ok else 'FAIL'} - {detail}")
        assert ok, detail

    return emit


def _labels(n):
    return [str(i) for i in range(n)]


def _table(names, m):
    return JointTable.from_array(names, {v: _labels(k) for v, k in zip(names, m.shape)}, m)


def test_criterion_1_partition_oracle(report):
    start = time.perf_counter()
    mismatches = []
    for bits in range(1, 2**9):
        pattern = np.array([(bits >> k) & 1 for k in range(9)], float).reshape(3, 3)
        t = _table(("X", "Y"), pattern / pattern.sum())
        if maximal_common_partition(t).canonical() != oracle_common_partition(t).canonical():
            mismatches.append(bits)
    elapsed = time.perf_counter() - start
    report(1, not mismatches and elapsed < 10.0, f"511 patterns, {len(mismatches)} mismatches, {elapsed:.2f} s")


def test_criterion_2_message_identity(report):
    start = time.perf_counter()
    tables = [erasure_half()] + [bi_random(seed) for seed in range(50)]
    checked, failures = 0, []
    for i, t in enumerate(tables):
        pxy = t.marginal_array(("X", "Y"))
        for proto in enumerate_protocols(pxy, t.labels("X"), t.labels("Y"), t.support_eps, max_rounds=2):
            rep = verify_message_identity(apply_protocol(t, proto.rounds))
            checked += 1
            if not (rep.applicable and rep.passed):
                failures.append((i, rep.gap))
    elapsed = time.perf_counter() - start
    report(2, not failures and elapsed < 60.0,
           f"{checked} protocols on 51 tables, {len(failures)} failures, {elapsed:.1f} s")


def _double_markov_instances(rng):
    for bits in range(1, 2**8):
        support = np.array([(bits >> k) & 1 for k in range(8)], float).reshape(2, 2, 2)
        for variant in range(4):
            p3 = support * rng.dirichlet(np.ones(8)).reshape(2, 2, 2)
            p3 /= p3.sum()
            if variant == 0:
                q = rng.dirichlet(np.ones(2), size=(2, 2, 2))  # W from XYZ
                p4 = p3[..., None] * q
            elif variant == 1:
                j, _ = conditional_block_labels(p3, 1e-15)
                q = rng.dirichlet(np.ones(2), size=(2, 2))  # W from (J, Z)
                p4 = p3[..., None] * q[j, np.arange(2)[None, None, :]]
            elif variant == 2:
                q = rng.dirichlet(np.ones(2), size=(2, 2))  # W from (X, Z)
                p4 = p3[..., None] * q[:, None, :, :]
            else:
                p4 = p3[..., None] * rng.dirichlet(np.ones(2), size=(2, 2, 2))
                p4[rng.random(p4.shape) < 0.3] = 0.0
                p4 /= p4.sum()
            yield p4


def test_criterion_3_double_markov(report):
    rng = np.random.default_rng(2024)
    count, holds, errors = 0, 0, []
    for p4 in _double_markov_instances(rng):
        t = _table(("X", "Y", "Z", "W"), p4)
        try:
            holds += check_double_markov(t, "W").holds
        except InternalConsistencyError as exc:
            errors.append(str(exc))
        count += 1
    ok = count >= 1000 and not errors and 0 < holds < count
    report(3, ok, f"{count} instances, chains hold on {holds}, {len(errors)} counterexamples")


def test_criterion_4_sandwich(report):
    problems = []
    for name in sorted(NAMED):
        t = corpus(name)
        down = is_ubi_pd_down(t)
        achievable = down.witness["H(J|Zbar M)"] if down.verdict == "yes" else 0.0
        intrinsic = intrinsic_information(t).value
        cost = winter_key_cost(t).value
        if not (achievable <= intrinsic + 1e-6 and intrinsic <= cost + 1e-6):
            problems.append(f"{name}: {achievable:.6f} {intrinsic:.6f} {cost:.6f}")
        anchors = {"ERASURE_HALF": (0.5, 1e-6), "PERFECT_BIT": (1.0, 1e-9), "XOR_TRIPLE": (0.0, 1e-9)}
        if name in anchors:
            target, tol = anchors[name]
            if max(abs(v - target) for v in (achievable, intrinsic, cost)) > tol:
                problems.append(f"{name}: anchor {target} missed")
    report(4, not problems, "all corpus entries ordered" if not problems else "; ".join(problems))


def test_criterion_5_reversibility(report):
    problems, times = [], {}
    for name in ("ERASURE_HALF", "SPOILED_BIT", "NONBI_MIX"):
        start = time.perf_counter()
        v = decide_reversibility(corpus(name))
        times[name] = time.perf_counter() - start
        if times[name] >= 5.0:
            problems.append(f"{name} took {times[name]:.2f} s")
        if name == "ERASURE_HALF" and not (v.status == "reversible" and abs(v.key_value - 0.5) <= 1e-6):
            problems.append(f"{name}: {v.status} {v.key_value}")
        if name == "SPOILED_BIT" and not (
            v.status == "not-reversible" and any(c["kind"] == "proposition-1" for c in v.certificates)
        ):
            problems.append(f"{name}: {v.status}")
        if name == "NONBI_MIX":
            wit = [c["witness"] for c in v.certificates if c["kind"] == "ubi-pd-down-witness"]
            constant = bool(wit) and len(wit[0]["channel"]["output_alphabet"]) == 1
            if not (v.status == "reversible" and abs(v.key_value - 1.0) <= 1e-6 and constant):
                problems.append(f"{name}: {v.status} {v.key_value}")
    timing = ", ".join(f"{k} {s:.2f} s" for k, s in times.items())
    report(5, not problems, timing if not problems else "; ".join(problems))


def _diag(pz, p0):
    m = np.zeros((2, 2, len(pz)))
    m[0, 0] = pz * p0
    m[1, 1] = pz * (1 - p0)
    return _table(("X", "Y", "Z"), m)


def test_criterion_6_quantum(report):
    rng = np.random.default_rng(6)
    conc_err, order_bad = 0.0, 0
    for _ in range(1000):
        nz = int(rng.integers(1, 5))
        pz, p0 = rng.dirichlet(np.ones(nz)), rng.uniform(0.01, 0.99, nz)
        t = _diag(pz, p0)
        rho = reduce_ab(embed(t), (2, 2, nz))
        conc_err = max(conc_err, abs(concurrence_2q(rho) - closed_form_concurrence(pz, p0)))
        rep = theorem3_report(t)
        order_bad += rep.key_closed_form < rep.eof - 1e-12
    equal = 0
    for _ in range(100):
        nz = int(rng.integers(1, 5))
        a = rng.uniform(0.02, 0.48)
        p0 = np.where(rng.random(nz) < 0.5, a, 1 - a)
        rep = theorem3_report(_diag(rng.dirichlet(np.ones(nz)), p0))
        equal += abs(rep.key_closed_form - rep.eof) <= 1e-9 and rep.constant_conditional_entropy
    strict = 0
    for _ in range(100):
        a, d = rng.uniform(0.05, 0.3), rng.uniform(0.1, 0.3)
        pz = rng.dirichlet(np.ones(2)) * 0.8 + 0.1
        rep = theorem3_report(_diag(pz, np.array([a, a + d])))
        strict += rep.key_closed_form - rep.eof > 1e-6
    ok = conc_err <= 1e-9 and order_bad == 0 and equal == 100 and strict == 100
    report(6, ok, f"max concurrence error {conc_err:.1e}, K<E on {order_bad}, equality {equal}/100, gap {strict}/100")


ANCESTORS = {
    "SBI": (is_sbi, is_ubi, is_ubi_pd, is_ubi_pd_down),
    "UBI": (is_ubi, is_ubi_pd, is_ubi_pd_down),
    "UBI-PD": (is_ubi_pd, is_ubi_pd_down),
    "UBI-PD-down": (is_ubi_pd_down,),
    "LOPC-flagged": (is_lopc_flagged, is_ubi_pd),
}


def test_criterion_7_hierarchy(report):
    failures = []
    for cls, detectors in ANCESTORS.items():
        for seed in range(100):
            t = generate(cls, seed)
            for det in detectors:
                if det(t).verdict != "yes":
                    failures.append(f"{cls}[{seed}] {det.__name__}")
    inconsistent = []
    for cls in ANCESTORS:
        for seed in range(5):
            rep = classify(generate(cls, seed))
            if check_hierarchy(rep.verdicts):
                inconsistent.append(f"{cls}[{seed}]")
    ok = not failures and not inconsistent
    report(7, ok, f"500 members, {len(failures)} detector failures, {len(inconsistent)} inconsistent reports")


def test_criterion_8_cli_determinism(report, tmp_path):
    dist = tmp_path / "d.json"
    dist.write_text(json.dumps(corpus("MIXED_2X3").to_dict()))
    proto = tmp_path / "p.json"
    proto.write_text(json.dumps({"rounds": [{"speaker": "bob", "map": {"('0','')": "m0", "('1','')": "m0", "('2','')": "m1"}}]}))
    commands = [
        ["corpus", "list"],
        ["corpus", "emit", "ERASURE_HALF"],
        ["classify", dist],
        ["intrinsic", dist, "--restarts", "8"],
        ["intrinsic", dist, "--local-only", "--restarts", "4"],
        ["keycost", dist],
        ["reversible", dist],
        ["embed", dist],
        ["partition", dist],
        ["partition", dist, "--given", "Z"],
        ["protocol", dist, proto, "--verify-eq7"],
        ["entropy", dist, "I(X:Y|Z)", "H(X,Y)"],
    ]
    differing = []
    for cmd in commands:
        argv = [sys.executable, "-m", "seclab.cli", *map(str, cmd), "--seed", "3", "--json"]
        outs = [subprocess.run(argv, capture_output=True, check=True).stdout for _ in range(2)]
        if outs[0] != outs[1] or not outs[0]:
            differing.append(cmd[0])
    report(8, not differing, f"{len(commands)} commands byte-identical" if not differing else f"differ: {differing}")
