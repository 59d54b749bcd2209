"""Public-discussion protocols as alternating deterministic message functions.

Round ``k`` maps ``(own symbol, earlier messages)`` to a message label.  The
earlier messages are keyed as one comma-joined string (empty for round 1).
"""

from __future__ import annotations

import ast
import itertools
import json
from dataclasses import dataclass
from typing import Iterator, Mapping, Sequence

import numpy as np

from .combinatorics import set_partitions
from .common import bi_gap_array, conditional_block_labels
from .dist import JointTable
from .entropy import cmi_array
from .errors import InvalidTableError, PreconditionError

SPEAKERS = ("alice", "bob")


@dataclass(frozen=True)
class Round:
    speaker: str
    mapping: Mapping[tuple[str, str], str]

    def __post_init__(self):
        if self.speaker not in SPEAKERS:
            raise PreconditionError(f"speaker must be one of {SPEAKERS}, got {self.speaker!r}")
        object.__setattr__(self, "mapping", {(str(a), str(b)): str(m) for (a, b), m in self.mapping.items()})

    def to_dict(self) -> dict:
        return {"speaker": self.speaker, "map": {f"({own!r},{prior!r})": m for (own, prior), m in self.mapping.items()}}

    @classmethod
    def from_dict(cls, data: Mapping) -> Round:
        mapping = {}
        for key, msg in data["map"].items():
            try:
                own, prior = ast.literal_eval(key)
            except (ValueError, SyntaxError, TypeError):
                raise InvalidTableError(f"bad message-map key {key!r}; expected \"('label','prior')\"") from None
            mapping[(str(own), str(prior))] = str(msg)
        return cls(data["speaker"], mapping)


@dataclass(frozen=True, eq=False)
class ProtocolTranscript:
    rounds: tuple[Round, ...]
    extended: JointTable
    message_vars: tuple[str, ...]
    alice: str = "X"
    bob: str = "Y"

    def to_dict(self) -> dict:
        return {"rounds": [r.to_dict() for r in self.rounds], "message_vars": list(self.message_vars)}


def protocol_to_dict(rounds: Sequence[Round]) -> dict:
    return {"rounds": [r.to_dict() for r in rounds]}


def protocol_from_dict(data: Mapping) -> list[Round]:
    try:
        return [Round.from_dict(r) for r in data["rounds"]]
    except (KeyError, TypeError) as exc:
        raise InvalidTableError(f"malformed protocol document: {exc}") from None


def load_protocol(path) -> list[Round]:
    try:
        with open(path) as fh:
            return protocol_from_dict(json.load(fh))
    except json.JSONDecodeError as exc:
        raise InvalidTableError(f"{path}: invalid JSON ({exc})") from None


def apply_protocol(
    table: JointTable, rounds: Sequence[Round], alice: str = "X", bob: str = "Y", prefix: str = "M"
) -> ProtocolTranscript:
    """Extend ``table`` with one message variable per round (``M1``, ``M2``, ...)."""
    speakers = {"alice": alice, "bob": bob}
    ext = table
    mvars: list[str] = []
    eps = table.support_eps
    for k, rnd in enumerate(rounds, start=1):
        own_var = speakers[rnd.speaker]
        sources = (own_var, *mvars)
        grids = [ext.labels(s) for s in sources]
        marg = ext.marginal_array(sources)
        labels = list(dict.fromkeys(rnd.mapping.values())) or ["m0"]
        pos = {lab: i for i, lab in enumerate(labels)}
        index = np.zeros(marg.shape, dtype=int)
        for combo in itertools.product(*(range(len(g)) for g in grids)):
            own = grids[0][combo[0]]
            prior = ",".join(grids[i][c] for i, c in enumerate(combo) if i > 0)
            msg = rnd.mapping.get((own, prior))
            if msg is None:
                if marg[combo] > eps:
                    raise PreconditionError(
                        f"round {k} ({rnd.speaker}) has no message for symbol {own!r} after messages {prior!r}"
                    )
                continue
            index[combo] = pos[msg]
        name = f"{prefix}{k}"
        ext = ext.extend_with_index(sources, index, name, labels)
        mvars.append(name)
    return ProtocolTranscript(tuple(rounds), ext, tuple(mvars), alice, bob)


# -- array-level machinery shared with the class detectors ----------------


def transcript_array(rounds: Sequence[Round], xlabels, ylabels, pxy: np.ndarray, eps: float) -> tuple[np.ndarray, int]:
    """Final transcript id for every (x, y) pair on the support of ``pxy``."""
    nx, ny = pxy.shape
    t = np.zeros((nx, ny), dtype=int)
    ids: dict[tuple[str, ...], int] = {}
    for x, y in zip(*np.nonzero(pxy > eps)):
        msgs: list[str] = []
        for k, rnd in enumerate(rounds, start=1):
            own = xlabels[x] if rnd.speaker == "alice" else ylabels[y]
            key = (own, ",".join(msgs))
            if key not in rnd.mapping:
                raise PreconditionError(f"round {k} ({rnd.speaker}) has no message for {key}")
            msgs.append(rnd.mapping[key])
        t[x, y] = ids.setdefault(tuple(msgs), len(ids))
    return t, max(len(ids), 1)


def with_transcript(p3: np.ndarray, t: np.ndarray, n_t: int) -> np.ndarray:
    """``p(x, y, z, t)`` for a deterministic transcript ``t(x, y)``."""
    p4 = np.zeros(p3.shape + (n_t,))
    np.put_along_axis(p4, np.broadcast_to(t[:, :, None, None], p3.shape + (1,)), p3[..., None], axis=-1)
    return p4


def fuse_messages(p4: np.ndarray, eps: float):
    """Compact ``((x,t), (y,t), (z,t))`` array from ``p(x, y, z, t)``.

    Returns the array and the used ``(x, t)``, ``(y, t)``, ``(z, t)`` pairs.
    """
    nz_idx = np.nonzero(p4 > eps)
    xs, ys, zs, ts = nz_idx
    a_keys = sorted(set(zip(xs.tolist(), ts.tolist())))
    b_keys = sorted(set(zip(ys.tolist(), ts.tolist())))
    e_keys = sorted(set(zip(zs.tolist(), ts.tolist())))
    ai = {k: i for i, k in enumerate(a_keys)}
    bi = {k: i for i, k in enumerate(b_keys)}
    ei = {k: i for i, k in enumerate(e_keys)}
    q = np.zeros((len(a_keys), len(b_keys), len(e_keys)))
    for x, y, z, t in zip(xs.tolist(), ys.tolist(), zs.tolist(), ts.tolist()):
        q[ai[(x, t)], bi[(y, t)], ei[(z, t)]] += p4[x, y, z, t]
    return q, a_keys, b_keys, e_keys


def message_block_dependence(p4: np.ndarray, eps: float) -> float:
    """I(M : J_{XY|Z} | Z) with J computed on the message-free marginal."""
    p3 = p4.sum(axis=3)
    j, per_z = conditional_block_labels(p3, eps)
    nj = max((len(b) for b in per_z if b is not None), default=1)
    r = np.zeros((p3.shape[2], nj, p4.shape[3]))
    xs, ys, zs, ts = np.nonzero(p4 > eps)
    np.add.at(r, (zs, j[xs, ys, zs], ts), p4[xs, ys, zs, ts])
    return cmi_array(r, [2], [1], [0], eps)


@dataclass(frozen=True)
class EnumeratedProtocol:
    rounds: tuple[Round, ...]
    transcript: np.ndarray  # t[x, y]
    n_transcripts: int


def enumerate_protocols(
    pxy: np.ndarray, xlabels, ylabels, eps: float, max_rounds: int = 2, start: Sequence[str] = SPEAKERS
) -> Iterator[EnumeratedProtocol]:
    """Every deterministic protocol of 1..max_rounds alternating rounds, up to message relabeling.

    A round lets the speaker partition its symbols separately inside each
    current transcript cell; rounds that reveal nothing are skipped.  Shorter
    protocols come first.
    """
    pairs = [(int(x), int(y)) for x, y in zip(*np.nonzero(pxy > eps))]
    nx, ny = pxy.shape

    def rounds_of(history):
        out = []
        for speaker, cells, choice in history:
            mapping = {}
            for (prior, labels), rgs in zip(cells, choice):
                names = xlabels if speaker == "alice" else ylabels
                for lab, b in zip(labels, rgs):
                    mapping[(names[lab], ",".join(f"m{i}" for i in prior))] = f"m{b}"
            out.append(Round(speaker, mapping))
        return tuple(out)

    def grow(cell_of, speaker, depth, history):
        # cell_of: pair -> prior message tuple
        cells: dict[tuple, list[int]] = {}
        for (x, y), prior in cell_of.items():
            own = x if speaker == "alice" else y
            cells.setdefault(prior, [])
            if own not in cells[prior]:
                cells[prior].append(own)
        cell_list = [(prior, sorted(labels)) for prior, labels in sorted(cells.items())]
        options = [set_partitions(len(labels)) for _, labels in cell_list]
        for choice in itertools.product(*options):
            if all(max(r, default=0) == 0 for r in choice):
                continue
            msg = {}
            for (prior, labels), rgs in zip(cell_list, choice):
                for lab, b in zip(labels, rgs):
                    msg[(prior, lab)] = b
            new_cells = {}
            for pair, prior in cell_of.items():
                own = pair[0] if speaker == "alice" else pair[1]
                new_cells[pair] = prior + (msg[(prior, own)],)
            hist = history + [(speaker, cell_list, choice)]
            ids: dict[tuple, int] = {}
            t = np.zeros((nx, ny), dtype=int)
            for (x, y), prior in new_cells.items():
                t[x, y] = ids.setdefault(prior, len(ids))
            yield depth, EnumeratedProtocol(rounds_of(hist), t, len(ids)), new_cells, hist

    # breadth-first by number of rounds
    frontier = [({p: () for p in pairs}, s, []) for s in start]
    for depth in range(1, max_rounds + 1):
        nxt = []
        for cell_of, speaker, history in frontier:
            other = "bob" if speaker == "alice" else "alice"
            for _, proto, new_cells, hist in grow(cell_of, speaker, depth, history):
                yield proto
                if depth < max_rounds:
                    nxt.append((new_cells, other, hist))
        frontier = nxt


@dataclass(frozen=True)
class MessageIdentityReport:
    applicable: bool
    lhs: float | None = None  # I(X:Y|ZM)
    rhs: float | None = None  # I(X:Y|Z) - I(M:J_{XY|Z}|Z)
    gap: float | None = None
    extended_bi: bool | None = None
    passed: bool | None = None
    note: str = ""

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def verify_message_identity(
    transcript: ProtocolTranscript, z: str = "Z", tol: float = 1e-9
) -> MessageIdentityReport:
    """Check I(X:Y|ZM) = I(X:Y|Z) - I(M:J_{XY|Z}|Z) and that BI survives the messages."""
    ext = transcript.extended
    x, y = transcript.alice, transcript.bob
    eps = ext.support_eps
    names = (x, y, z) + transcript.message_vars
    arr = ext.marginal_array(names)
    p4 = arr.reshape(arr.shape[:3] + (-1,))
    p3 = p4.sum(axis=3)
    if bi_gap_array(p3, eps) > tol:
        return MessageIdentityReport(False, note="not applicable: input distribution is not block independent")
    lhs = cmi_array(p4, [0], [1], [2, 3], eps)
    rhs = cmi_array(p3, [0], [1], [2], eps) - message_block_dependence(p4, eps)
    gap = abs(lhs - rhs)
    q, *_ = fuse_messages(p4, eps)
    extended_bi = bi_gap_array(q, eps) <= tol
    return MessageIdentityReport(True, lhs, rhs, gap, extended_bi, gap <= tol and extended_bi)


def two_by_n_message(table: JointTable, x: str = "X", y: str = "Y") -> Round:
    """Announcement that separates correlated from uncorrelated rows.

    With a binary ``x`` Bob announces ``m1`` when H(X|Y=y) = 0 and ``m0``
    otherwise; with a binary ``y`` (and larger ``x``) the roles swap.
    """
    eps = table.support_eps
    pxy = table.marginal_array((x, y))
    sx = int(np.sum(pxy.sum(axis=1) > eps))
    sy = int(np.sum(pxy.sum(axis=0) > eps))
    if sx <= 2:
        speaker, names, rows = "bob", table.labels(y), pxy.T
    elif sy <= 2:
        speaker, names, rows = "alice", table.labels(x), pxy
    else:
        raise PreconditionError("the two-symbol announcement needs a party with at most two symbols")
    mapping = {}
    for lab, row in zip(names, rows):
        determined = np.sum(row > eps) <= 1
        mapping[(lab, "")] = "m1" if determined else "m0"
    return Round(speaker, mapping)
