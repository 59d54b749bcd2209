"""Shannon quantities (bits) over variable groups of a JointTable."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .dist import JointTable, _names
from .errors import InternalConsistencyError, PreconditionError

CLAMP = 1e-12


def entropy_of(arr: np.ndarray, eps: float = 0.0) -> float:
    # every positive mass counts, so marginal and joint terms stay consistent;
    # ``eps`` is accepted for symmetry with the support helpers
    p = np.asarray(arr, dtype=float).ravel()
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


def clamp(value: float, what: str = "quantity") -> float:
    """Clamp float noise below zero; anything worse is a bug."""
    if value < 0:
        if value < -CLAMP:
            raise InternalConsistencyError(f"{what} evaluated to {value:.3e} < 0")
        return 0.0
    return value


def _group(table: JointTable, names) -> tuple[str, ...]:
    names = _names(names)
    for n in names:
        table.axis(n)
    return names


def entropy(table: JointTable, names, given=()) -> float:
    """H(A) or H(A|C)."""
    a, c = _group(table, names), _group(table, given)
    _disjoint(a, c)
    eps = table.support_eps
    if not a:
        return 0.0
    h = entropy_of(table.marginal_array(a + c), eps)
    if c:
        h -= entropy_of(table.marginal_array(c), eps)
    return clamp(h, f"H({','.join(a)}|{','.join(c)})")


def mutual_information(table: JointTable, a, b, given=()) -> float:
    """I(A:B|C) = H(AC) + H(BC) - H(ABC) - H(C)."""
    a, b, c = _group(table, a), _group(table, b), _group(table, given)
    _disjoint(a, b, c)
    if not a or not b:
        return 0.0
    eps = table.support_eps
    h = lambda names: entropy_of(table.marginal_array(names), eps) if names else 0.0  # noqa: E731
    value = h(a + c) + h(b + c) - h(a + b + c) - h(c)
    return clamp(value, f"I({','.join(a)}:{','.join(b)}|{','.join(c)})")


def cmi_array(p: np.ndarray, a: Iterable[int], b: Iterable[int], c: Iterable[int] = (), eps: float = 0.0) -> float:
    """I(A:B|C) straight from a probability array, groups given as axes."""
    a, b, c = tuple(a), tuple(b), tuple(c)
    allax = set(range(p.ndim))

    def h(axes):
        if not axes:
            return 0.0
        drop = tuple(sorted(allax - set(axes)))
        return entropy_of(p.sum(axis=drop) if drop else p, eps)

    return clamp(h(a + c) + h(b + c) - h(a + b + c) - h(c), "conditional mutual information")


def _disjoint(*groups):
    seen = set()
    for g in groups:
        if seen & set(g):
            raise PreconditionError(f"variable groups must be disjoint: {groups}")
        seen |= set(g)


@dataclass(frozen=True)
class EntropyQuery:
    """``kind`` is one of H, H_cond, I, I_cond; ``groups`` holds 1-3 name tuples."""

    kind: str
    groups: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        arity = {"H": 1, "H_cond": 2, "I": 2, "I_cond": 3}
        if self.kind not in arity:
            raise PreconditionError(f"unknown query kind {self.kind!r}")
        groups = tuple(_names(g) for g in self.groups)
        if len(groups) != arity[self.kind] or any(not g for g in groups):
            raise PreconditionError(f"{self.kind} needs {arity[self.kind]} nonempty groups")
        _disjoint(*groups)
        object.__setattr__(self, "groups", groups)

    def __str__(self):
        g = [",".join(x) for x in self.groups]
        return {
            "H": "H({0})",
            "H_cond": "H({0}|{1})",
            "I": "I({0}:{1})",
            "I_cond": "I({0}:{1}|{2})",
        }[self.kind].format(*g)


def evaluate(table: JointTable, query: EntropyQuery) -> float:
    g = query.groups
    if query.kind == "H":
        return entropy(table, g[0])
    if query.kind == "H_cond":
        return entropy(table, g[0], g[1])
    if query.kind == "I":
        return mutual_information(table, g[0], g[1])
    return mutual_information(table, g[0], g[1], g[2])


_QUERY = re.compile(r"^\s*([HI])\(\s*([^|:()]+?)\s*(?::\s*([^|()]+?)\s*)?(?:\|\s*([^()]+?)\s*)?\)\s*$")


def parse_quantity(text: str) -> EntropyQuery:
    """Parse ``H(X)``, ``H(X|Y)``, ``I(X:Y)`` or ``I(X:Y|Z)``; commas join variables."""
    m = _QUERY.match(text)
    if not m:
        raise PreconditionError(f"cannot parse quantity {text!r}")
    head, a, b, c = m.groups()
    split = lambda s: tuple(x.strip() for x in s.split(",") if x.strip())  # noqa: E731
    if head == "H":
        if b is not None:
            raise PreconditionError(f"entropy takes no ':' group: {text!r}")
        return EntropyQuery("H_cond", (split(a), split(c))) if c else EntropyQuery("H", (split(a),))
    if b is None:
        raise PreconditionError(f"mutual information needs two groups: {text!r}")
    if c:
        return EntropyQuery("I_cond", (split(a), split(b), split(c)))
    return EntropyQuery("I", (split(a), split(b)))


def is_markov(table: JointTable, a, b, c, tol: float = 1e-9) -> bool:
    """True iff A - B - C, tested as I(A:C|B) <= tol."""
    return mutual_information(table, a, c, given=b) <= tol
