"""Brute-force reference computations used to cross-check the fast algorithms."""

from __future__ import annotations

import itertools
import math

from .combinatorics import set_partitions
from .common import CommonPartition
from .dist import JointTable
from .errors import SizeCapError


def _plain_entropy(masses) -> float:
    return -sum(p * math.log2(p) for p in masses if p > 0)


def oracle_common_partition(table: JointTable, x: str = "X", y: str = "Y", cap: int = 4) -> CommonPartition:
    """max H(K) over K = f(X) = g(Y) almost surely, by enumerating label coarsenings.

    f ranges over set partitions of supp X; g is read off f and must be
    consistent.  The maximizer's blocks are returned ordered like the graph
    algorithm (by smallest x index).
    """
    pxy = table.marginal_array((x, y))
    eps = table.support_eps
    xl, yl = table.labels(x), table.labels(y)
    if len(xl) > cap or len(yl) > cap:
        raise SizeCapError(f"oracle limited to alphabets of size <= {cap}")
    sx = [i for i in range(len(xl)) if pxy[i].sum() > eps]
    sy = [j for j in range(len(yl)) if pxy[:, j].sum() > eps]
    pairs = [(i, j) for i in sx for j in sy if pxy[i, j] > eps]
    best = None
    for f in set_partitions(len(sx)):
        fx = dict(zip(sx, f))
        for gvals in itertools.product(range(max(f) + 1), repeat=len(sy)):
            gy = dict(zip(sy, gvals))
            if any(fx[i] != gy[j] for i, j in pairs):
                continue
            if set(gvals) != set(f):  # every label must be used on both sides
                continue
            masses = [sum(pxy[i, j] for i, j in pairs if fx[i] == k) for k in range(max(f) + 1)]
            h = _plain_entropy([m / sum(masses) for m in masses])
            if best is None or h > best[0] + 1e-12:
                best = (h, fx, gy, masses)
    _, fx, gy, masses = best
    k = max(fx.values()) + 1
    blocks = []
    for b in range(k):
        xs = tuple(xl[i] for i in sx if fx[i] == b)
        ys = tuple(yl[j] for j in sy if gy[j] == b)
        blocks.append((xs, ys, float(masses[b] / sum(masses)), min(i for i in sx if fx[i] == b)))
    blocks.sort(key=lambda b: b[3])
    return CommonPartition(
        blocks=tuple((b[0], b[1]) for b in blocks),
        masses=tuple(b[2] for b in blocks),
        residual_x=tuple(xl[i] for i in range(len(xl)) if i not in sx),
        residual_y=tuple(yl[j] for j in range(len(yl)) if j not in sy),
    )


def _cmi_plain(p: dict) -> float:
    """I(X:Y|W) from ``{(x, y, w): p}`` using dictionaries only."""
    pw, pxw, pyw = {}, {}, {}
    for (a, b, w), v in p.items():
        pw[w] = pw.get(w, 0.0) + v
        pxw[a, w] = pxw.get((a, w), 0.0) + v
        pyw[b, w] = pyw.get((b, w), 0.0) + v
    return _plain_entropy(pxw.values()) + _plain_entropy(pyw.values()) - _plain_entropy(p.values()) - _plain_entropy(pw.values())


def oracle_intrinsic_exhaustive(table: JointTable, x: str = "X", y: str = "Y", z: str = "Z", cap: int = 6) -> float:
    """min of I(X:Y|f(Z)) over every map f: Z -> {0..|Z|-1}."""
    zl = table.labels(z)
    if len(zl) > cap:
        raise SizeCapError(f"oracle limited to |Z| <= {cap}")
    entries = [(lab[table.axis(x)], lab[table.axis(y)], lab[table.axis(z)], p) for lab, p in table.entries()]
    best = math.inf
    for f in itertools.product(range(len(zl)), repeat=len(zl)):
        fmap = dict(zip(zl, f))
        p: dict = {}
        for a, b, c, v in entries:
            key = (a, b, fmap[c])
            p[key] = p.get(key, 0.0) + v
        best = min(best, _cmi_plain(p))
    return max(best, 0.0)
