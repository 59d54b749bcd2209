"""Membership detectors for the distribution classes, with witnesses.

Every detector returns a :class:`Detection`.  A ``yes`` always carries a
witness that :func:`replay_witnesses` can re-check from scratch.  ``unknown``
means a bounded search ran out without a proof either way.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

from .combinatorics import set_partitions
from .common import (
    UnionFind,
    add_common_function,
    bi_gap_array,
    conditional_block_labels,
    conditional_common_function,
    maximal_common_partition,
    partition_indices,
)
from .dist import Channel, JointTable
from .entropy import cmi_array, entropy, mutual_information
from .errors import InternalConsistencyError, PreconditionError, SizeCapError
from .protocol import (
    Round,
    apply_protocol,
    enumerate_protocols,
    fuse_messages,
    message_block_dependence,
    protocol_to_dict,
    transcript_array,
    two_by_n_message,
    with_transcript,
)

YES, NO, UNKNOWN = "yes", "no", "unknown"
CLASSES = ("SBI", "BI", "UBI", "UBI-PD", "UBI-PD-down", "LOPC-flagged", "bi-disjoint")
TOL = 1e-9
MAX_Z_CHANNELS = 8
MAX_PROTOCOLS = 20000


@dataclass
class Detection:
    verdict: str
    witness: dict | None = None
    detail: dict = field(default_factory=dict)

    def __bool__(self):
        return self.verdict == YES

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "witness": self.witness, "detail": self.detail}


def _xyz(table: JointTable, x: str, y: str, z: str) -> np.ndarray:
    if len({x, y, z}) != 3:
        raise PreconditionError("roles x, y, z must be distinct variables")
    return table.marginal_array((x, y, z))


def support_sizes(table: JointTable, x: str = "X", y: str = "Y") -> tuple[int, int]:
    return len(table.support(x)), len(table.support(y))


# -- SBI / BI / UBI ---------------------------------------------------------


def is_sbi(table: JointTable, x="X", y="Y", z="Z", tol=TOL) -> Detection:
    eps = table.support_eps
    p3 = _xyz(table, x, y, z)
    leak = cmi_array(p3, [0, 1], [2], [], eps)
    gap = bi_gap_array(p3.sum(axis=2)[:, :, None], eps)
    detail = {"I(XY:Z)": leak, "I(X:Y|J_XY)": gap}
    if leak > tol:
        return Detection(NO, None, {**detail, "violated": "I(XY:Z)"})
    if gap > tol:
        return Detection(NO, None, {**detail, "violated": "I(X:Y|J_XY)"})
    return Detection(YES, {"partition": maximal_common_partition(table, x, y).to_dict()}, detail)


def is_bi(table: JointTable, x="X", y="Y", z="Z", tol=TOL) -> Detection:
    eps = table.support_eps
    p3 = _xyz(table, x, y, z)
    gap = bi_gap_array(p3, eps)
    detail = {"I(X:Y|J_XY|Z Z)": gap}
    if gap > tol:
        worst = _worst_z(p3, eps)
        return Detection(NO, None, {**detail, "z": table.labels(z)[worst]})
    return Detection(YES, {"conditional_partition": conditional_common_function(table, x, y, z).to_dict()}, detail)


def _worst_z(p3, eps) -> int:
    gaps = [bi_gap_array(p3[:, :, [k]], eps) * p3[:, :, k].sum() for k in range(p3.shape[2])]
    return int(np.argmax(gaps))


def ubi_labeling(p3: np.ndarray, eps: float):
    """Cross-z consistent labeling of the per-z blocks, if one exists.

    Blocks at different z are glued when they share an x or a y symbol.  A
    labeling exists iff no glued component holds two blocks of the same z.
    Returns ``(kx, ky, None)`` with ``-1`` for unused symbols, or
    ``(None, None, conflict)``.
    """
    _, per_z = conditional_block_labels(p3, eps)
    nodes = [(z, b) for z, blocks in enumerate(per_z) if blocks for b in range(len(blocks))]
    ids = {n: i for i, n in enumerate(nodes)}
    uf = UnionFind(len(nodes))
    seen_x: dict[int, int] = {}
    seen_y: dict[int, int] = {}
    for (z, b), i in ids.items():
        xs, ys = per_z[z][b]
        for s in xs:
            uf.union(seen_x.setdefault(s, i), i)
        for s in ys:
            uf.union(seen_y.setdefault(s, i), i)
    comp: dict[int, int] = {}
    for z, blocks in enumerate(per_z):
        if not blocks:
            continue
        roots = {}
        for b in range(len(blocks)):
            r = uf.find(ids[(z, b)])
            if r in roots:
                return None, None, {"z": z, "blocks": [roots[r], b]}
            roots[r] = b
    for n in nodes:
        comp.setdefault(uf.find(ids[n]), len(comp))
    kx = np.full(p3.shape[0], -1, dtype=int)
    ky = np.full(p3.shape[1], -1, dtype=int)
    for s, i in seen_x.items():
        kx[s] = comp[uf.find(i)]
    for s, i in seen_y.items():
        ky[s] = comp[uf.find(i)]
    return kx, ky, None


def _kmap(labels, k) -> dict:
    return {lab: int(max(v, 0)) for lab, v in zip(labels, k)}


def is_ubi(table: JointTable, x="X", y="Y", z="Z", tol=TOL) -> Detection:
    bi = is_bi(table, x, y, z, tol)
    if not bi:
        return Detection(NO, None, {"reason": "not BI", **bi.detail})
    p3 = _xyz(table, x, y, z)
    kx, ky, conflict = ubi_labeling(p3, table.support_eps)
    if conflict is not None:
        part = conditional_common_function(table, x, y, z).per_z
        zlab = table.labels(z)[conflict["z"]]
        blocks = [part[zlab].blocks[b] for b in conflict["blocks"]]
        return Detection(NO, None, {"reason": "blocks of one z glued by shared symbols", "z": zlab,
                                    "blocks": [{"x": list(b[0]), "y": list(b[1])} for b in blocks]})
    return Detection(YES, {"K_X": _kmap(table.labels(x), kx), "K_Y": _kmap(table.labels(y), ky)}, bi.detail)


# -- UBI-PD -----------------------------------------------------------------


def check_pd_transcript(p3: np.ndarray, t: np.ndarray, n_t: int, eps: float, tol: float) -> dict | None:
    """UBI of the message-extended table and I(M:J|Z) <= tol, or None."""
    p4 = with_transcript(p3, t, n_t)
    dep = message_block_dependence(p4, eps)
    if dep > tol:
        return None
    q, a_keys, b_keys, _ = fuse_messages(p4, eps)
    if bi_gap_array(q, eps) > tol:
        return None
    kx, ky, conflict = ubi_labeling(q, eps)
    if conflict is not None:
        return None
    return {"kx": {k: int(v) for k, v in zip(a_keys, kx)}, "ky": {k: int(v) for k, v in zip(b_keys, ky)}, "I(M:J|Z)": dep}


def _pd_witness(rounds, info, xlabels, ylabels, source) -> dict:
    # K maps keyed by "label|transcript-id" so they stay JSON friendly
    return {
        "protocol": protocol_to_dict(rounds),
        "source": source,
        "K_X": {f"{xlabels[a]}|{t}": v for (a, t), v in info["kx"].items()},
        "K_Y": {f"{ylabels[b]}|{t}": v for (b, t), v in info["ky"].items()},
    }


def pd_candidates(table, x, y, z, max_rounds=2, hints: Iterable[Sequence[Round]] = (), max_protocols=MAX_PROTOCOLS):
    """Candidate protocols in search order, as ``(source, rounds, t, n_t)``.

    Yields ``("exhausted", ...)`` last when every protocol in the search
    space was produced (``None`` fields), or stops silently at the cap.
    """
    eps = table.support_eps
    pxy = table.marginal_array((x, y))
    xl, yl = table.labels(x), table.labels(y)
    yield "empty", (), np.zeros(pxy.shape, dtype=int), 1
    for rounds in hints:
        rounds = tuple(rounds)
        t, n_t = transcript_array(rounds, xl, yl, pxy, eps)
        yield "hint", rounds, t, n_t
    sx, sy = support_sizes(table, x, y)
    if min(sx, sy) == 2:
        for speaker in (("bob", "alice") if sx == 2 and sy == 2 else (None,)):
            rnd = two_by_n_message(table, x, y) if speaker is None else _two_by_n_oriented(table, x, y, speaker)
            t, n_t = transcript_array((rnd,), xl, yl, pxy, eps)
            yield "two-symbol-announcement", (rnd,), t, n_t
        yield "exhausted", None, None, None
        return
    count = 0
    for proto in enumerate_protocols(pxy, xl, yl, eps, max_rounds):
        count += 1
        if count > max_protocols:
            return
        yield "search", proto.rounds, proto.transcript, proto.n_transcripts
    yield "exhausted", None, None, None


def _two_by_n_oriented(table, x, y, speaker):
    if speaker == "bob":
        return two_by_n_message(table, x, y)
    rnd = two_by_n_message(table.rename({x: "__a__", y: "__b__"}).rename({"__a__": y, "__b__": x}), y, x)
    return Round("alice", rnd.mapping)


def is_ubi_pd(table: JointTable, x="X", y="Y", z="Z", tol=TOL, max_rounds=2, hints=(), max_protocols=MAX_PROTOCOLS) -> Detection:
    """Search deterministic protocols; exact when one party has two symbols."""
    bi = is_bi(table, x, y, z, tol)
    if not bi:
        return Detection(NO, None, {"reason": "not BI", **bi.detail})
    p3 = _xyz(table, x, y, z)
    eps = table.support_eps
    xl, yl = table.labels(x), table.labels(y)
    searched = 0
    for source, rounds, t, n_t in pd_candidates(table, x, y, z, max_rounds, hints, max_protocols):
        if source == "exhausted":
            sx, sy = support_sizes(table, x, y)
            if min(sx, sy) == 2:
                return Detection(NO, None, {"reason": "two-symbol regime: the separating announcement fails, so no protocol works"})
            return Detection(UNKNOWN, None, {"reason": f"no witness among all protocols with <= {max_rounds} rounds"})
        searched += 1
        info = check_pd_transcript(p3, t, n_t, eps, tol)
        if info is not None:
            return Detection(YES, _pd_witness(rounds, info, xl, yl, source), {"protocols_checked": searched})
    return Detection(UNKNOWN, None, {"reason": f"protocol search capped at {max_protocols}", "protocols_checked": searched})


# -- UBI-PD-down ------------------------------------------------------------


def coarse_grainings(table: JointTable, z: str = "Z", max_size: int = MAX_Z_CHANNELS):
    """Deterministic channels Z -> Zbar from set partitions of supp(Z), coarsest first.

    Symbols outside the support go to output 0.
    """
    labels = table.labels(z)
    supp = [i for i, lab in enumerate(labels) if lab in set(table.support(z))]
    if len(supp) > max_size:
        raise SizeCapError(f"|supp Z| = {len(supp)} exceeds the coarse-graining cap {max_size}")
    for rgs in set_partitions(len(supp)):
        outputs = [0] * len(labels)
        for i, b in zip(supp, rgs):
            outputs[i] = b
        yield Channel.deterministic(labels, outputs)


def eve_condition(p3: np.ndarray, channel: np.ndarray, t: np.ndarray, n_t: int, eps: float) -> float:
    """I(Z : J_{XY|Zbar} | M Zbar) for channel ``Zbar|Z`` and transcript ``t(x, y)``."""
    full = p3[:, :, :, None] * channel[None, None, :, :]  # x y z zb
    bar = full.sum(axis=2)
    j, per_z = conditional_block_labels(bar, eps)
    nj = max((len(b) for b in per_z if b is not None), default=1)
    r = np.zeros((p3.shape[2], channel.shape[1], n_t, nj))
    xs, ys, zs, zbs = np.nonzero(full > eps)
    np.add.at(r, (zs, zbs, t[xs, ys], j[xs, ys, zbs]), full[xs, ys, zs, zbs])
    return cmi_array(r, [0], [3], [1, 2], eps)


def key_rate(p3: np.ndarray, channel: np.ndarray, t: np.ndarray, n_t: int, eps: float) -> dict:
    """Rates for a channel/transcript pair: H(J|Zbar) and the secured H(J|Z M)."""
    full = p3[:, :, :, None] * channel[None, None, :, :]
    bar = full.sum(axis=2)
    j, per_z = conditional_block_labels(bar, eps)
    nj = max((len(b) for b in per_z if b is not None), default=1)
    r = np.zeros((p3.shape[2], channel.shape[1], n_t, nj))
    xs, ys, zs, zbs = np.nonzero(full > eps)
    np.add.at(r, (zs, zbs, t[xs, ys], j[xs, ys, zbs]), full[xs, ys, zs, zbs])
    from .entropy import entropy_of

    def h(axes_keep):
        drop = tuple(i for i in range(4) if i not in axes_keep)
        return entropy_of(r.sum(axis=drop), eps)

    return {
        "H(J|Zbar)": max(h((1, 3)) - h((1,)), 0.0),
        "H(J|Zbar M)": max(h((1, 2, 3)) - h((1, 2)), 0.0),
        "H(J|Z M)": max(h((0, 2, 3)) - h((0, 2)), 0.0),
    }


def is_ubi_pd_down(
    table: JointTable,
    x="X",
    y="Y",
    z="Z",
    tol=TOL,
    max_rounds=2,
    hints: Sequence[tuple[Channel, Sequence[Round] | None]] = (),
    use_optimizer: bool = True,
    refute: bool = True,
    max_protocols: int = 2000,
    seed: int = 0,
) -> Detection:
    """Search channels Zbar|Z and protocols M for the UBI-PD-down conditions.

    ``hints`` are tried first; then every deterministic coarse-graining of Z;
    then the intrinsic-information minimizer's channel.  In the two-symbol
    regime an exhausted search defers to the reversibility decision, which
    can refute membership.
    """
    eps = table.support_eps
    p3 = _xyz(table, x, y, z)
    xl, yl = table.labels(x), table.labels(y)
    checked = 0

    def attempt(channel: Channel, rounds_hint):
        nonlocal checked
        bar = table.marginalize((x, y, z)).extend_with_channel(z, channel, "__Zbar__").marginalize((x, y, "__Zbar__"))
        bar3 = bar.marginal_array((x, y, "__Zbar__"))
        if bi_gap_array(bar3, eps) > tol:
            return None
        hint_list = [rounds_hint] if rounds_hint is not None else []
        for source, rounds, t, n_t in pd_candidates(bar, x, y, "__Zbar__", max_rounds, hint_list, max_protocols):
            if source == "exhausted":
                return None
            checked += 1
            info = check_pd_transcript(bar3, t, n_t, eps, tol)
            if info is None:
                continue
            leak = eve_condition(p3, channel.matrix, t, n_t, eps)
            if leak <= tol:
                rates = key_rate(p3, channel.matrix, t, n_t, eps)
                return Detection(
                    YES,
                    {"channel": channel.to_dict(), **_pd_witness(rounds, info, xl, yl, source), **rates},
                    {"I(Z:J|M Zbar)": leak, "candidates_checked": checked},
                )
        return None

    for channel, rounds in hints:
        found = attempt(channel, rounds)
        if found:
            return found
    for channel in coarse_grainings(table, z):
        found = attempt(channel, None)
        if found:
            return found
    opt = None
    if use_optimizer:
        from .secrecy import intrinsic_information

        opt = intrinsic_information(table, x, y, z, seed=seed)
        for ch in opt.witness_channels:
            found = attempt(ch, None)
            if found:
                return found
    sx, sy = support_sizes(table, x, y)
    if refute and min(sx, sy) == 2:
        from .secrecy import decide_reversibility

        verdict = decide_reversibility(table, x, y, z, tol=tol, seed=seed, opt=opt)
        if verdict.status == "not-reversible":
            return Detection(NO, None, {"reason": "two-symbol regime: distribution is not secrecy reversible",
                                        "certificates": verdict.certificates})
        wit = [c for c in verdict.certificates if c.get("kind") == "ubi-pd-down-witness"]
        if wit:
            return Detection(YES, wit[0]["witness"], {"source": "reversibility decision"})
    return Detection(UNKNOWN, None, {"reason": "no channel/protocol witness found", "candidates_checked": checked})


# -- LOPC-flagged -----------------------------------------------------------


def flag_protocol(pxy: np.ndarray, flag: np.ndarray, xlabels, ylabels, eps: float) -> list[Round] | None:
    """Alternating protocol whose transcript equals ``flag(x, y)`` on the support.

    Each round the speaker splits every open cell as finely as allowed:
    symbols whose rows share a flag value must stay together.  Returns None
    when neither party can make progress on a cell that still mixes flags.
    """
    pairs = [(int(a), int(b)) for a, b in zip(*np.nonzero(pxy > eps))]
    cell_of = {p: () for p in pairs}
    rounds: list[Round] = []
    speaker, idle = "alice", 0
    while True:
        cells: dict[tuple, list] = {}
        for p, prior in cell_of.items():
            cells.setdefault(prior, []).append(p)
        open_cells = {k: v for k, v in cells.items() if len({flag[p] for p in v}) > 1}
        if not open_cells:
            return rounds
        mapping = {}
        progressed = False
        names = xlabels if speaker == "alice" else ylabels
        for prior, members in sorted(cells.items()):
            own_syms = sorted({p[0] if speaker == "alice" else p[1] for p in members})
            uf = UnionFind(len(own_syms))
            pos = {s: i for i, s in enumerate(own_syms)}
            by_flag: dict[int, int] = {}
            for p in members:
                s = pos[p[0] if speaker == "alice" else p[1]]
                uf.union(by_flag.setdefault(flag[p], s), s)
            comp: dict[int, int] = {}
            for s in own_syms:
                comp.setdefault(uf.find(pos[s]), len(comp))
            if len(comp) > 1:
                progressed = True
            prior_key = ",".join(prior)
            for s in own_syms:
                mapping[(names[s], prior_key)] = f"m{comp[uf.find(pos[s])]}"
        if progressed:
            rounds.append(Round(speaker, mapping))
            for p in cell_of:
                s = p[0] if speaker == "alice" else p[1]
                cell_of[p] = cell_of[p] + (mapping[(names[s], ",".join(cell_of[p]))],)
            idle = 0
        else:
            idle += 1
            if idle >= 2:
                return None
        speaker = "bob" if speaker == "alice" else "alice"


def is_lopc_flagged(table: JointTable, x="X", y="Y", z="Z", tol=TOL, max_size=MAX_Z_CHANNELS) -> Detection:
    """Find a flag M (a partition of supp Z) with SBI branches and a protocol announcing it.

    Within each flag cell (X, Y) must be independent of Z and block
    independent given the flag; the flag must be a function of (X, Y) that an
    alternating deterministic protocol can announce exactly.
    """
    eps = table.support_eps
    p3 = _xyz(table, x, y, z)
    zl = table.labels(z)
    supp = [i for i in range(len(zl)) if p3[:, :, i].sum() > eps]
    if len(supp) > max_size:
        raise SizeCapError(f"|supp Z| = {len(supp)} exceeds the flag-search cap {max_size}")
    pxy = p3.sum(axis=2)
    tried = 0
    for rgs in set_partitions(len(supp)):
        tried += 1
        k = max(rgs) + 1
        cell = np.zeros(len(zl), dtype=int)
        cell[supp] = rgs
        pm = np.zeros(p3.shape[:2] + (len(zl), k))  # x y z m
        for zi in supp:
            pm[:, :, zi, cell[zi]] = p3[:, :, zi]
        if cmi_array(pm, [0, 1], [2], [3], eps) > tol:
            continue
        pxym = pm.sum(axis=2)
        # flag must be a function of (x, y)
        if np.any((pxym > eps).sum(axis=2) > 1):
            continue
        if bi_gap_array(pxym, eps) > tol:
            continue
        flag = np.argmax(pxym, axis=2)
        rounds = flag_protocol(pxy, flag, table.labels(x), table.labels(y), eps)
        if rounds is None:
            continue
        cells = [[zl[i] for i in supp if cell[i] == m] for m in range(k)]
        return Detection(YES, {"flag_cells": cells, "protocol": protocol_to_dict(rounds)},
                         {"partitions_tried": tried, "interpretation": "deterministic flag announced by a public protocol"})
    return Detection(NO, None, {"partitions_tried": tried})


# -- bi-disjoint ------------------------------------------------------------


def is_bidisjoint(table: JointTable, x="X", y="Y", z="Z", tol=TOL) -> Detection:
    """I(XY:Z | J_{(XY)Z}) <= tol, J being the common function of (X,Y) jointly and Z."""
    eps = table.support_eps
    p3 = _xyz(table, x, y, z)
    pab = p3.reshape(-1, p3.shape[2])
    blocks, _, _ = partition_indices(pab, eps)
    j = np.zeros(pab.shape, dtype=int)
    for i, (xs, zs) in enumerate(blocks):
        j[np.ix_(xs, zs)] = i
    q = np.zeros(pab.shape + (max(len(blocks), 1),))
    np.put_along_axis(q, j[..., None], pab[..., None], axis=-1)
    value = cmi_array(q, [0], [1], [2], eps)
    detail = {"I(XY:Z|J_(XY)Z)": value, "blocks": len(blocks)}
    return Detection(YES if value <= tol else NO, {"blocks": len(blocks)} if value <= tol else None, detail)


# -- report -----------------------------------------------------------------


@dataclass
class ClassReport:
    verdicts: dict
    witnesses: dict
    certificates_checked: list
    details: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "verdicts": self.verdicts,
            "witnesses": self.witnesses,
            "certificates_checked": self.certificates_checked,
            "details": self.details,
            "notes": self.notes,
        }


def _rounds_from_witness(w: dict | None) -> list[Round] | None:
    if not w or "protocol" not in w:
        return None
    from .protocol import protocol_from_dict

    return protocol_from_dict(w["protocol"])


def check_hierarchy(verdicts: dict) -> list[str]:
    """Violations of the proven inclusions among the verdicts."""
    v = verdicts
    bad = []
    chain = ["SBI", "UBI", "UBI-PD", "UBI-PD-down"]
    for lo, hi in zip(chain, chain[1:]):
        if v[lo] == YES and v[hi] != YES:
            bad.append(f"{lo}=yes but {hi}={v[hi]}")
    if v["LOPC-flagged"] == YES and v["UBI-PD"] != YES:
        bad.append(f"LOPC-flagged=yes but UBI-PD={v['UBI-PD']}")
    for c in ("SBI", "UBI", "UBI-PD"):
        if v["BI"] == NO and v[c] == YES:
            bad.append(f"BI=no but {c}=yes")
    return bad


def classify(table: JointTable, x="X", y="Y", z="Z", tol=TOL, max_rounds=2, seed: int = 0) -> ClassReport:
    """Run every detector, feeding witnesses down the hierarchy, then cross-check."""
    det: dict[str, Detection] = {}
    det["SBI"] = is_sbi(table, x, y, z, tol)
    det["BI"] = is_bi(table, x, y, z, tol)
    det["UBI"] = is_ubi(table, x, y, z, tol)
    det["LOPC-flagged"] = is_lopc_flagged(table, x, y, z, tol)
    hints = []
    flag_rounds = _rounds_from_witness(det["LOPC-flagged"].witness)
    if flag_rounds is not None:
        hints.append(flag_rounds)
    det["UBI-PD"] = is_ubi_pd(table, x, y, z, tol, max_rounds, hints=hints)
    down_hints = []
    pd_rounds = _rounds_from_witness(det["UBI-PD"].witness)
    if pd_rounds is not None:
        down_hints.append((Channel.identity(table.labels(z)), pd_rounds))
    det["UBI-PD-down"] = is_ubi_pd_down(table, x, y, z, tol, max_rounds, hints=down_hints, seed=seed)
    det["bi-disjoint"] = is_bidisjoint(table, x, y, z, tol)

    verdicts = {c: det[c].verdict for c in CLASSES}
    bad = check_hierarchy(verdicts)
    if bad:
        raise InternalConsistencyError("hierarchy violated: " + "; ".join(bad))
    certs = []
    for c in CLASSES:
        for key, val in det[c].detail.items():
            if key.startswith(("I(", "H(")):
                certs.append({"class": c, "quantity": key, "value": val, "tol": tol})
    notes = []
    if verdicts["LOPC-flagged"] == NO:
        notes.append("LOPC-flagged search covers deterministic flags only")
    return ClassReport(
        verdicts,
        {c: det[c].witness for c in CLASSES if det[c].verdict == YES and det[c].witness is not None},
        certs,
        {c: det[c].detail for c in CLASSES},
        notes,
    )


# -- independent witness replay --------------------------------------------


def replay_witnesses(table: JointTable, report: ClassReport, x="X", y="Y", z="Z", tol=TOL) -> dict[str, bool]:
    """Re-derive each yes-verdict from its witness using table-level operations only."""
    out: dict[str, bool] = {}
    w = report.witnesses
    base = table.marginalize((x, y, z))
    if "SBI" in w:
        ext = add_common_function(base, x, y, (), "J")
        out["SBI"] = mutual_information(base, (x, y), z) <= tol and mutual_information(ext, x, y, "J") <= tol
    if "BI" in w:
        ext = add_common_function(base, x, y, (z,), "J")
        out["BI"] = mutual_information(ext, x, y, ("J", z)) <= tol
    if "UBI" in w:
        out["UBI"] = _replay_ubi(base, w["UBI"]["K_X"], w["UBI"]["K_Y"], x, y, z, tol)
    if "UBI-PD" in w:
        out["UBI-PD"] = _replay_pd(base, w["UBI-PD"], x, y, z, None, tol)
    if "UBI-PD-down" in w:
        ch = w["UBI-PD-down"]["channel"]
        channel = Channel(ch["input_alphabet"], ch["output_alphabet"], ch["matrix"])
        out["UBI-PD-down"] = _replay_pd(base, w["UBI-PD-down"], x, y, z, channel, tol)
    if "LOPC-flagged" in w:
        cells = w["LOPC-flagged"]["flag_cells"]
        cell_of = {lab: str(i) for i, c in enumerate(cells) for lab in c}
        ext = base.extend_with_function(z, lambda lab: cell_of.get(lab, "0"), "F", [str(i) for i in range(len(cells))])
        tr = apply_protocol(ext, _rounds_from_witness(w["LOPC-flagged"]), x, y)
        ext2 = add_common_function(tr.extended, x, y, ("F",), "J")
        m = tr.message_vars
        # the public transcript and the flag determine each other
        same = entropy(tr.extended, "F", m) <= tol and (not m or entropy(tr.extended, m, "F") <= tol)
        out["LOPC-flagged"] = (
            mutual_information(ext, (x, y), z, "F") <= tol
            and same
            and mutual_information(ext2, x, y, ("J", "F")) <= tol
        )
    if "bi-disjoint" in w:
        out["bi-disjoint"] = is_bidisjoint(base, x, y, z, tol).verdict == YES
    return out


def _replay_ubi(table, kx: dict, ky: dict, x, y, z, tol) -> bool:
    ext = table.extend_with_function(x, lambda a: str(kx.get(a, 0)), "KX")
    ext = ext.extend_with_function(y, lambda b: str(ky.get(b, 0)), "KY")
    ext = add_common_function(ext, x, y, (z,), "J")
    # K_X = K_Y almost surely, and K determines the block given z (and vice versa)
    agree = sum(
        p for labels, p in ext.entries() if labels[ext.axis("KX")] != labels[ext.axis("KY")]
    ) <= tol
    return (
        agree
        and entropy(ext, "J", ("KX", z)) <= tol
        and entropy(ext, "KX", ("J", z)) <= tol
        and mutual_information(ext, x, y, ("J", z)) <= tol
    )


def _replay_pd(table, witness, x, y, z, channel, tol) -> bool:
    rounds = _rounds_from_witness(witness)
    tr = apply_protocol(table, rounds, x, y)
    ext = tr.extended
    eve = z
    if channel is not None:
        ext = ext.extend_with_channel(z, channel, "Zbar")
        eve = "Zbar"
    m = tr.message_vars
    work = add_common_function(ext, x, y, (eve,), "J")
    ok = not m or mutual_information(work, m, "J", eve) <= tol
    # keys are functions of (own symbol, transcript); replay via fused variables
    if m:
        fused = ext.fuse(m, "M")
        fused = fused.extend_with_function("M", lambda a: a, "MA").extend_with_function("M", lambda a: a, "MB")
        fused = fused.fuse((x, "MA"), "XM").fuse((y, "MB"), "YM").fuse((eve, "M"), "EM")
        a, b, e = "XM", "YM", "EM"
    else:
        fused, a, b, e = ext, x, y, eve
    q = fused.marginal_array((a, b, e))
    ok = ok and bi_gap_array(q, fused.support_eps) <= tol
    kx, ky, conflict = ubi_labeling(q, fused.support_eps)
    ok = ok and conflict is None
    if channel is not None:
        work2 = add_common_function(ext, x, y, ("Zbar",), "J")
        cond = ("Zbar",) + tuple(m)
        ok = ok and mutual_information(work2, z, "J", cond) <= tol
    return bool(ok)
