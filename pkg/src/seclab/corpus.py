"""Named example distributions, seeded class generators and the corpus manifest."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .dist import JointTable
from .errors import PreconditionError

ROLES = ("X", "Y", "Z")


def _table(xl, yl, zl, entries: dict) -> JointTable:
    """Build an (X, Y, Z) table from ``{(x, y, z): p}`` with string labels."""
    m = np.zeros((len(xl), len(yl), len(zl)))
    for (a, b, c), p in entries.items():
        m[xl.index(a), yl.index(b), zl.index(c)] += float(p)
    return JointTable.from_array(ROLES, {"X": list(xl), "Y": list(yl), "Z": list(zl)}, m)


def perfect_bit() -> JointTable:
    return _table(["0", "1"], ["0", "1"], ["0"], {("0", "0", "0"): 0.5, ("1", "1", "0"): 0.5})


def product_unif() -> JointTable:
    return _table(["0", "1"], ["0", "1"], ["0"], {(a, b, "0"): 0.25 for a in "01" for b in "01"})


def xor_triple() -> JointTable:
    return _table(["0", "1"], ["0", "1"], ["0", "1"],
                  {(a, b, str(int(a) ^ int(b))): 0.25 for a in "01" for b in "01"})


def erasure_half() -> JointTable:
    """Shared uniform bit; Eve sees it with probability 1/2, else an erasure."""
    e = {}
    for a in "01":
        e[(a, a, a)] = 0.25
        e[(a, a, "e")] = 0.25
    return _table(["0", "1"], ["0", "1"], ["0", "1", "e"], e)


def flagged_quad() -> JointTable:
    e = {(a, a, "a"): 0.25 for a in "01"}
    e.update({(a, b, "b"): 0.125 for a in "23" for b in "23"})
    labels = ["0", "1", "2", "3"]
    return _table(labels, labels, ["a", "b"], e)


def flagged_overlap() -> JointTable:
    """Bob's symbol reveals the flag, Alice's does not; not UBI."""
    e = {(a, a, "a"): 0.25 for a in "01"}
    e.update({(a, b, "b"): 0.125 for a in "01" for b in "23"})
    return _table(["0", "1"], ["0", "1", "2", "3"], ["a", "b"], e)


def spoiled_bit() -> JointTable:
    e = {("0", "0", "0"): 0.25, ("1", "1", "0"): 0.25, ("0", "1", "1"): 0.5}
    return _table(["0", "1"], ["0", "1"], ["0", "1"], e)


def nonbi_mix() -> JointTable:
    """Two locally identifiable blocks; Eve's symbol skews the in-block law only."""
    pz = {"0": Fraction(1, 5), "1": Fraction(4, 5)}
    inblock = {
        "0": [Fraction(1, 2), Fraction(1, 4), Fraction(0), Fraction(1, 4)],
        "1": [Fraction(3, 16), Fraction(1, 4), Fraction(5, 16), Fraction(1, 4)],
    }
    e = {}
    for z, w in pz.items():
        for b in range(2):
            for k, (xb, yb) in enumerate([(0, 0), (0, 1), (1, 0), (1, 1)]):
                p = w * Fraction(1, 2) * inblock[z][k]
                if p:
                    e[(str(2 * b + xb), str(2 * b + yb), z)] = p
    labels = ["0", "1", "2", "3"]
    return _table(labels, labels, ["0", "1"], e)


def mixed_2x3() -> JointTable:
    e = {("0", "0", "0"): 0.25, ("1", "1", "0"): 0.25, ("0", "2", "1"): 0.25, ("1", "2", "1"): 0.25}
    return _table(["0", "1"], ["0", "1", "2"], ["0", "1"], e)


def bi_only() -> JointTable:
    """Half perfect bit, half independent bits, Eve knows which; BI yet irreversible."""
    e = {("0", "0", "0"): 0.25, ("1", "1", "0"): 0.25}
    e.update({(a, b, "1"): 0.125 for a in "01" for b in "01"})
    return _table(["0", "1"], ["0", "1"], ["0", "1"], e)


NAMED: dict[str, Callable[[], JointTable]] = {
    "PERFECT_BIT": perfect_bit,
    "PRODUCT_UNIF": product_unif,
    "XOR_TRIPLE": xor_triple,
    "ERASURE_HALF": erasure_half,
    "FLAGGED_QUAD": flagged_quad,
    "FLAGGED_OVERLAP": flagged_overlap,
    "SPOILED_BIT": spoiled_bit,
    "NONBI_MIX": nonbi_mix,
    "MIXED_2X3": mixed_2x3,
    "BI_ONLY": bi_only,
}


def corpus(name: str) -> JointTable:
    try:
        return NAMED[name]()
    except KeyError:
        raise PreconditionError(f"unknown corpus entry {name!r}; known: {', '.join(sorted(NAMED))}") from None


# -- manifest ---------------------------------------------------------------


@dataclass(frozen=True)
class Expected:
    value: float
    tag: str  # TRIVIAL | DERIVED | PAPER | OURS


@dataclass
class CorpusEntry:
    name: str
    params: dict
    expected: dict[str, Expected]
    classes: dict[str, str]
    reversibility: str | None = None
    notes: list = field(default_factory=list)

    def table(self) -> JointTable:
        return corpus(self.name)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "params": self.params,
            "expected": {k: {"value": v.value, "tag": v.tag} for k, v in self.expected.items()},
            "classes": self.classes,
            "reversibility": self.reversibility,
            "notes": self.notes,
        }


def _cls(sbi, bi, ubi, pd, down, flagged, bid="no") -> dict:
    return {"SBI": sbi, "BI": bi, "UBI": ubi, "UBI-PD": pd, "UBI-PD-down": down,
            "LOPC-flagged": flagged, "bi-disjoint": bid}


def _spoiled_intrinsic() -> float:
    # constant channel: p_XY = (1/4, 1/2, 0, 1/4); both marginals are (3/4, 1/4)
    h = lambda *ps: -sum(p * np.log2(p) for p in ps if p > 0)  # noqa: E731
    return 2 * h(0.75, 0.25) - h(0.25, 0.5, 0.25)


MANIFEST: dict[str, CorpusEntry] = {
    "PERFECT_BIT": CorpusEntry(
        "PERFECT_BIT", {}, {"I(X:Y|Z)": Expected(1.0, "TRIVIAL"), "intrinsic": Expected(1.0, "TRIVIAL"),
                            "key_cost": Expected(1.0, "TRIVIAL"), "H(J_XY)": Expected(1.0, "TRIVIAL")},
        _cls("yes", "yes", "yes", "yes", "yes", "yes", "yes"), "reversible"),
    "PRODUCT_UNIF": CorpusEntry(
        "PRODUCT_UNIF", {}, {"I(X:Y|Z)": Expected(0.0, "TRIVIAL"), "intrinsic": Expected(0.0, "TRIVIAL"),
                             "H(J_XY)": Expected(0.0, "TRIVIAL")},
        _cls("yes", "yes", "yes", "yes", "yes", "yes", "yes"), "reversible"),
    "XOR_TRIPLE": CorpusEntry(
        "XOR_TRIPLE", {}, {"I(X:Y|Z)": Expected(1.0, "DERIVED"), "I(X:Y)": Expected(0.0, "TRIVIAL"),
                           "intrinsic": Expected(0.0, "TRIVIAL"), "H(J|Z)": Expected(1.0, "DERIVED")},
        _cls("no", "yes", "no", "no", "yes", "no", "yes"), "reversible",
        ["BI but not UBI: per-z blocks glue across z"]),
    "ERASURE_HALF": CorpusEntry(
        "ERASURE_HALF", {}, {"I(X:Y|Z)": Expected(0.5, "DERIVED"), "intrinsic": Expected(0.5, "DERIVED"),
                             "key_cost": Expected(0.5, "DERIVED"), "concurrence": Expected(0.5, "DERIVED")},
        _cls("no", "yes", "yes", "yes", "yes", "no"), "reversible"),
    "FLAGGED_QUAD": CorpusEntry(
        "FLAGGED_QUAD", {}, {"H(J|Z)": Expected(0.5, "DERIVED"), "intrinsic": Expected(0.5, "DERIVED")},
        _cls("no", "yes", "yes", "yes", "yes", "yes", "yes"), "reversible"),
    "FLAGGED_OVERLAP": CorpusEntry(
        "FLAGGED_OVERLAP", {"origin": "ours"}, {"intrinsic": Expected(0.5, "OURS")},
        _cls("no", "yes", "no", "yes", "yes", "yes", "yes"), "reversible",
        ["numbers are ours: a flagged table that is not UBI"]),
    "SPOILED_BIT": CorpusEntry(
        "SPOILED_BIT", {}, {"I(X:Y|Z)": Expected(0.5, "DERIVED"), "intrinsic": Expected(_spoiled_intrinsic(), "DERIVED")},
        _cls("no", "yes", "no", "no", "no", "no", "yes"), "not-reversible"),
    "NONBI_MIX": CorpusEntry(
        "NONBI_MIX", {"p_Z": [0.2, 0.8]}, {"p_Z(0)": Expected(0.2, "PAPER"), "intrinsic": Expected(1.0, "DERIVED"),
                                           "H(J_XY)": Expected(1.0, "DERIVED")},
        _cls("no", "no", "no", "no", "yes", "no"), "reversible"),
    "MIXED_2X3": CorpusEntry(
        "MIXED_2X3", {"origin": "ours"}, {"I(X:Y|Z)": Expected(0.5, "OURS")},
        _cls("no", "yes", "no", "yes", "yes", "yes", "yes"), "reversible"),
    "BI_ONLY": CorpusEntry(
        "BI_ONLY", {"origin": "ours"}, {"I(X:Y|Z)": Expected(0.5, "OURS")},
        _cls("no", "yes", "no", "no", "no", "no"), "not-reversible"),
}


def manifest() -> list[dict]:
    return [MANIFEST[n].to_dict() for n in sorted(MANIFEST)]


# -- seeded class generators -------------------------------------------------


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _split(rng, n: int, k: int) -> list[list[int]]:
    """Random partition of range(n) into k nonempty groups."""
    perm = rng.permutation(n)
    cuts = np.sort(rng.choice(np.arange(1, n), size=k - 1, replace=False)) if k > 1 else []
    return [sorted(int(v) for v in g) for g in np.split(perm, cuts)]


def _labels(n):
    return [str(i) for i in range(n)]


def _from_array(m) -> JointTable:
    m = m / m.sum()
    return JointTable.from_array(ROLES, {v: _labels(s) for v, s in zip(ROLES, m.shape)}, m)


def _block_product(rng, xs, ys, nx, ny) -> np.ndarray:
    out = np.zeros((nx, ny))
    out[np.ix_(xs, ys)] = np.outer(rng.dirichlet(np.ones(len(xs))), rng.dirichlet(np.ones(len(ys))))
    return out


def sbi_random(seed=0, nx=None, ny=None, nz=None) -> JointTable:
    """p(z) * sum_j p(j) p(x|j) p(y|j) with disjoint per-block alphabets."""
    rng = _rng(seed)
    nx = nx or int(rng.integers(1, 5))
    ny = ny or int(rng.integers(1, 5))
    nz = nz or int(rng.integers(1, 4))
    k = int(rng.integers(1, min(nx, ny) + 1))
    bx, by = _split(rng, nx, k), _split(rng, ny, k)
    pj = rng.dirichlet(np.ones(k))
    pxy = sum(pj[j] * _block_product(rng, bx[j], by[j], nx, ny) for j in range(k))
    return _from_array(pxy[:, :, None] * rng.dirichlet(np.ones(nz))[None, None, :])


def bi_random(seed=0, nx=None, ny=None, nz=None) -> JointTable:
    """Each Eve symbol carries its own block-product law."""
    rng = _rng(seed)
    nx = nx or int(rng.integers(2, 4))
    ny = ny or int(rng.integers(2, 4))
    nz = nz or int(rng.integers(1, 4))
    m = np.zeros((nx, ny, nz))
    pz = rng.dirichlet(np.ones(nz))
    for z in range(nz):
        k = int(rng.integers(1, min(nx, ny) + 1))
        bx, by = _split(rng, nx, k), _split(rng, ny, k)
        pj = rng.dirichlet(np.ones(k))
        for j in range(k):
            m[:, :, z] += pz[z] * pj[j] * _block_product(rng, bx[j], by[j], nx, ny)
    return _from_array(m)


def _nonempty_subset(rng, items: list[int]) -> list[int]:
    mask = rng.random(len(items)) < 0.6
    if not mask.any():
        mask[rng.integers(len(items))] = True
    return [v for v, keep in zip(items, mask) if keep]


def ubi_random(seed=0, nx=None, ny=None, nz=None) -> JointTable:
    """Global block labels K_X, K_Y; each z mixes a subset of blocks, each a product."""
    rng = _rng(seed)
    nx = nx or int(rng.integers(2, 5))
    ny = ny or int(rng.integers(2, 5))
    nz = nz or int(rng.integers(1, 4))
    k = int(rng.integers(1, min(nx, ny) + 1))
    bx, by = _split(rng, nx, k), _split(rng, ny, k)
    m = np.zeros((nx, ny, nz))
    pz = rng.dirichlet(np.ones(nz))
    for z in range(nz):
        active = _nonempty_subset(rng, list(range(k)))
        pj = rng.dirichlet(np.ones(len(active)))
        for w, j in zip(pj, active):
            m[:, :, z] += pz[z] * w * _block_product(rng, _nonempty_subset(rng, bx[j]), _nonempty_subset(rng, by[j]), nx, ny)
    return _from_array(m)


def ubi_pd_random(seed=0, ny=None, nz=None) -> JointTable:
    """Binary X; Bob's symbols split into a correlated part (y fixes x) and an uncorrelated part.

    Eve's symbol selects the regime; Bob announcing the part makes the block
    label public-computable.
    """
    rng = _rng(seed)
    ny = ny or int(rng.integers(3, 6))
    nz = nz or int(rng.integers(2, 4))
    yc = sorted(int(v) for v in rng.choice(ny, size=2 + int(rng.integers(0, ny - 2)), replace=False))
    yu = [v for v in range(ny) if v not in yc]
    if not yu:
        yu, yc = [yc[-1]], yc[:-1]
    g = {yc[0]: 0, yc[1]: 1, **{v: int(rng.integers(2)) for v in yc[2:]}}
    m = np.zeros((2, ny, nz))
    pz = rng.dirichlet(np.ones(nz))
    kinds = [z % 2 for z in range(nz)]  # both regimes occur
    rng.shuffle(kinds)
    for z in range(nz):
        if kinds[z]:
            py = rng.dirichlet(np.ones(len(yc)))
            for w, v in zip(py, yc):
                m[g[v], v, z] += pz[z] * w
        else:
            ys = _nonempty_subset(rng, yu)
            m[:, :, z] += pz[z] * _block_product(rng, [0, 1], ys, 2, ny)
    return _from_array(m)


def ubi_pd_down_random(seed=0, nx=None, ny=None, nzbar=None) -> JointTable:
    """A UBI table whose Eve symbols are each split in two.

    The split perturbs laws inside each block but leaves the block weights
    alone, so merging the halves back is a valid degrading channel.
    """
    rng = _rng(seed)
    nzbar = nzbar or int(rng.integers(1, 4))
    base = ubi_random(rng, nx, ny, nzbar).mass
    nx, ny = base.shape[:2]
    m = np.zeros((nx, ny, 2 * nzbar))
    for zb in range(nzbar):
        w1 = float(rng.uniform(0.2, 0.8))
        sl = base[:, :, zb]
        j, nj = _blocks(sl)
        q1 = sl.copy()
        for b in range(nj):
            cells = np.argwhere((j == b) & (sl > 0))
            if len(cells) < 2:
                continue
            d = rng.normal(size=len(cells))
            d -= d.mean()
            vals = sl[tuple(cells.T)]
            # keep both halves nonnegative: q1 = T + t d, q2 = T - t (w1/w2) d
            lim = min(np.min(vals / np.maximum(np.abs(d), 1e-300)), np.min(vals / np.maximum(np.abs(d) * w1 / (1 - w1), 1e-300)))
            q1[tuple(cells.T)] = vals + 0.9 * lim * d
        q2 = (sl - w1 * q1) / (1 - w1)
        m[:, :, 2 * zb] = w1 * q1
        m[:, :, 2 * zb + 1] = (1 - w1) * np.clip(q2, 0, None)
    return _from_array(m)


def _blocks(sl):
    from .common import block_label_array

    return block_label_array(sl, 1e-12)


def flagged_random(seed=0, branches=None) -> JointTable:
    """Mixture of SBI branches on disjoint Eve symbols; one party's alphabet reveals the branch."""
    rng = _rng(seed)
    f = branches or int(rng.integers(2, 4))
    revealer = "Y" if rng.random() < 0.5 else "X"
    parts = [sbi_random(rng, nx=int(rng.integers(1, 3)), ny=int(rng.integers(1, 3)), nz=int(rng.integers(1, 3))).mass
             for _ in range(f)]
    pf = rng.dirichlet(np.ones(f))
    shared = max(p.shape[0] if revealer == "Y" else p.shape[1] for p in parts)
    own = [p.shape[1] if revealer == "Y" else p.shape[0] for p in parts]
    nz = sum(p.shape[2] for p in parts)
    off_own = np.concatenate([[0], np.cumsum(own)])
    off_z = np.concatenate([[0], np.cumsum([p.shape[2] for p in parts])])
    if revealer == "Y":
        m = np.zeros((shared, off_own[-1], nz))
        for i, p in enumerate(parts):
            m[: p.shape[0], off_own[i]: off_own[i + 1], off_z[i]: off_z[i + 1]] = pf[i] * p
    else:
        m = np.zeros((off_own[-1], shared, nz))
        for i, p in enumerate(parts):
            m[off_own[i]: off_own[i + 1], : p.shape[1], off_z[i]: off_z[i + 1]] = pf[i] * p
    return _from_array(m)


GENERATORS: dict[str, Callable[..., JointTable]] = {
    "SBI": sbi_random,
    "BI": bi_random,
    "UBI": ubi_random,
    "UBI-PD": ubi_pd_random,
    "UBI-PD-down": ubi_pd_down_random,
    "LOPC-flagged": flagged_random,
}


def generate(cls: str, seed: int) -> JointTable:
    if cls not in GENERATORS:
        raise PreconditionError(f"no generator for class {cls!r}")
    return GENERATORS[cls](seed)
