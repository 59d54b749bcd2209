"""Finite joint distributions over named variables, and channels between alphabets.

A :class:`JointTable` stores a dense probability tensor with one axis per
variable.  Tables are immutable; every transformation returns a new table.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import InvalidTableError, PreconditionError

SUPPORT_EPS = 1e-12
NORM_TOL = 1e-9


def _names(names: str | Iterable[str]) -> tuple[str, ...]:
    if isinstance(names, str):
        return (names,)
    return tuple(names)


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.issues

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True, eq=False)
class JointTable:
    """Dense joint distribution ``p(v1, ..., vn)`` with labelled alphabets.

    The constructor does not validate; use :meth:`from_array` (or
    :func:`validate`) when the input is untrusted.
    """

    variables: tuple[str, ...]
    alphabets: Mapping[str, tuple[str, ...]]
    mass: np.ndarray
    support_eps: float = SUPPORT_EPS

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(
            self, "alphabets", {v: tuple(str(a) for a in self.alphabets[v]) for v in self.variables}
        )
        mass = np.array(self.mass, dtype=float)
        mass.setflags(write=False)
        object.__setattr__(self, "mass", mass)

    @classmethod
    def from_array(cls, variables, alphabets, mass, support_eps=SUPPORT_EPS, check=True) -> JointTable:
        variables = tuple(variables)
        if isinstance(alphabets, Mapping):
            alphabets = {v: tuple(str(a) for a in alphabets[v]) for v in variables}
        else:
            alphabets = {v: tuple(str(a) for a in labels) for v, labels in zip(variables, alphabets)}
        table = cls(variables, alphabets, np.asarray(mass, dtype=float), support_eps)
        if check:
            report = validate(table)
            if not report.ok:
                raise InvalidTableError("; ".join(report.issues))
        return table

    # -- basic queries -------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self.mass.shape

    def axis(self, name: str) -> int:
        try:
            return self.variables.index(name)
        except ValueError:
            raise PreconditionError(f"unknown variable {name!r}") from None

    def labels(self, name: str) -> tuple[str, ...]:
        self.axis(name)
        return self.alphabets[name]

    def index(self, name: str, label: str) -> int:
        labels = self.labels(name)
        try:
            return labels.index(str(label))
        except ValueError:
            raise PreconditionError(f"label {label!r} not in alphabet of {name!r}") from None

    def marginal_array(self, names: str | Iterable[str]) -> np.ndarray:
        """Marginal over ``names``, axes in the order given."""
        names = _names(names)
        axes = [self.axis(n) for n in names]
        if len(set(axes)) != len(axes):
            raise PreconditionError(f"repeated variable in {names}")
        drop = tuple(i for i in range(len(self.variables)) if i not in axes)
        m = self.mass.sum(axis=drop) if drop else self.mass
        kept = sorted(axes)
        return np.transpose(m, [kept.index(a) for a in axes]) if len(axes) > 1 else m

    def support(self, name: str) -> tuple[str, ...]:
        marg = self.marginal_array(name)
        return tuple(lab for lab, p in zip(self.alphabets[name], marg) if p > self.support_eps)

    def prob(self, **assignment: str) -> float:
        names = tuple(assignment)
        marg = self.marginal_array(names)
        return float(marg[tuple(self.index(n, assignment[n]) for n in names)])

    def entries(self) -> list[tuple[tuple[str, ...], float]]:
        """Nonzero entries in row-major order."""
        out = []
        for idx in zip(*np.nonzero(self.mass)):
            labels = tuple(self.alphabets[v][i] for v, i in zip(self.variables, idx))
            out.append((labels, float(self.mass[idx])))
        return out

    # -- transformations ----------------------------------------------

    def marginalize(self, keep: str | Iterable[str]) -> JointTable:
        keep = set(_names(keep))
        if not keep:
            raise PreconditionError("keep set must be nonempty")
        for n in keep:
            self.axis(n)
        names = tuple(v for v in self.variables if v in keep)
        return JointTable(names, {v: self.alphabets[v] for v in names}, self.marginal_array(names), self.support_eps)

    def condition(self, on: str, value: str) -> JointTable:
        ax = self.axis(on)
        i = self.index(on, value)
        sl = np.take(self.mass, i, axis=ax)
        total = sl.sum()
        if total <= self.support_eps:
            raise PreconditionError(f"cannot condition on {on}={value}: zero probability")
        names = tuple(v for v in self.variables if v != on)
        if not names:
            raise PreconditionError("conditioning would leave no variables")
        return JointTable(names, {v: self.alphabets[v] for v in names}, sl / total, self.support_eps)

    def reorder(self, variables: Sequence[str]) -> JointTable:
        variables = tuple(variables)
        if sorted(variables) != sorted(self.variables):
            raise PreconditionError("reorder must be a permutation of the variables")
        return JointTable(variables, self.alphabets, self.marginal_array(variables), self.support_eps)

    def rename(self, mapping: Mapping[str, str]) -> JointTable:
        names = tuple(mapping.get(v, v) for v in self.variables)
        if len(set(names)) != len(names):
            raise PreconditionError("rename produces duplicate variable names")
        return JointTable(names, {mapping.get(v, v): self.alphabets[v] for v in self.variables}, self.mass, self.support_eps)

    def permute_labels(self, name: str, perm: Sequence[int]) -> JointTable:
        """Relabel ``name``: mass of symbol ``i`` moves to symbol ``perm[i]``."""
        ax = self.axis(name)
        n = self.shape[ax]
        perm = list(perm)
        if sorted(perm) != list(range(n)):
            raise PreconditionError("not a permutation")
        mass = np.take(self.mass, np.argsort(perm), axis=ax)
        return JointTable(self.variables, self.alphabets, mass, self.support_eps)

    def with_support_eps(self, eps: float) -> JointTable:
        return JointTable(self.variables, self.alphabets, self.mass, eps)

    def _check_new_name(self, new_name: str):
        if new_name in self.variables:
            raise PreconditionError(f"variable name {new_name!r} already in use")

    def extend_with_channel(self, source: str, channel: Channel, new_name: str) -> JointTable:
        """Append ``new_name`` drawn from ``channel`` applied to ``source``."""
        self._check_new_name(new_name)
        ax = self.axis(source)
        if tuple(channel.input_alphabet) != self.alphabets[source]:
            raise PreconditionError(
                f"channel input alphabet {channel.input_alphabet} does not match {source} alphabet {self.alphabets[source]}"
            )
        shape = [1] * self.mass.ndim + [len(channel.output_alphabet)]
        shape[ax] = len(channel.input_alphabet)
        mass = self.mass[..., None] * channel.matrix.reshape(shape)
        alph = dict(self.alphabets)
        alph[new_name] = tuple(channel.output_alphabet)
        return JointTable(self.variables + (new_name,), alph, mass, self.support_eps)

    def extend_with_function(
        self,
        sources: str | Iterable[str],
        func: Callable[..., str],
        new_name: str,
        labels: Sequence[str] | None = None,
    ) -> JointTable:
        """Append a deterministic function of ``sources`` (called with labels)."""
        sources = _names(sources)
        grids = [self.labels(s) for s in sources]
        values = {combo: str(func(*combo)) for combo in itertools.product(*grids)}
        if labels is None:
            labels = list(dict.fromkeys(values.values()))
        labels = tuple(str(lab) for lab in labels)
        pos = {lab: i for i, lab in enumerate(labels)}
        index = np.zeros([len(g) for g in grids], dtype=int)
        for combo, val in values.items():
            if val not in pos:
                raise PreconditionError(f"function value {val!r} not among labels")
            index[tuple(grids[k].index(c) for k, c in enumerate(combo))] = pos[val]
        return self.extend_with_index(sources, index, new_name, labels)

    def extend_with_index(self, sources, index: np.ndarray, new_name: str, labels: Sequence[str]) -> JointTable:
        """Append a deterministic variable; ``index[s1, s2, ...]`` is its label index."""
        self._check_new_name(new_name)
        sources = _names(sources)
        axes = [self.axis(s) for s in sources]
        index = np.asarray(index, dtype=int)
        labels = tuple(str(lab) for lab in labels)
        onehot = np.zeros(index.shape + (len(labels),))
        np.put_along_axis(onehot, index[..., None], 1.0, axis=-1)
        order = list(np.argsort(axes))
        onehot = np.transpose(onehot, order + [len(axes)])
        shape = [1] * self.mass.ndim + [len(labels)]
        for a in axes:
            shape[a] = self.shape[a]
        alph = dict(self.alphabets)
        alph[new_name] = labels
        return JointTable(self.variables + (new_name,), alph, self.mass[..., None] * onehot.reshape(shape), self.support_eps)

    def extend_independent(self, new_name: str, labels: Sequence[str], probs: Sequence[float]) -> JointTable:
        """Product extension with an independent variable (private randomness)."""
        self._check_new_name(new_name)
        probs = np.asarray(probs, dtype=float)
        if len(probs) != len(labels) or np.any(probs < 0) or abs(probs.sum() - 1) > NORM_TOL:
            raise PreconditionError("independent extension needs a normalized distribution over the labels")
        alph = dict(self.alphabets)
        alph[new_name] = tuple(str(x) for x in labels)
        return JointTable(self.variables + (new_name,), alph, self.mass[..., None] * probs, self.support_eps)

    def fuse(self, names: Sequence[str], new_name: str) -> JointTable:
        """Merge ``names`` into one variable whose labels are comma-joined tuples.

        The fused variable takes the position of the first merged variable.
        """
        names = tuple(names)
        if len(names) < 1:
            raise PreconditionError("nothing to fuse")
        if new_name in self.variables and new_name not in names:
            raise PreconditionError(f"variable name {new_name!r} already in use")
        rest = [v for v in self.variables if v not in names]
        first = min(self.axis(n) for n in names)
        before = [v for v in self.variables[:first] if v not in names]
        after = [v for v in rest if v not in before]
        order = before + list(names) + after
        arr = self.marginal_array(order)
        sizes = [len(self.alphabets[n]) for n in names]
        new_shape = [len(self.alphabets[v]) for v in before] + [int(np.prod(sizes))] + [
            len(self.alphabets[v]) for v in after
        ]
        labels = tuple(",".join(c) for c in itertools.product(*(self.alphabets[n] for n in names)))
        alph = {v: self.alphabets[v] for v in rest}
        alph[new_name] = labels
        return JointTable(tuple(before) + (new_name,) + tuple(after), alph, arr.reshape(new_shape), self.support_eps)

    # -- serialization --------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "variables": list(self.variables),
            "alphabets": {v: list(self.alphabets[v]) for v in self.variables},
            "mass": [
                {**dict(zip(self.variables, labels)), "p": p} for labels, p in self.entries()
            ],
        }

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def validate(table: JointTable) -> ValidationReport:
    """Report normalization, negativity and shape problems; empty iff valid."""
    issues = []
    names = table.variables
    if len(set(names)) != len(names):
        issues.append("duplicate variable names")
    for v in names:
        labels = table.alphabets.get(v)
        if labels is None:
            issues.append(f"no alphabet for variable {v!r}")
            continue
        if len(labels) == 0:
            issues.append(f"empty alphabet for variable {v!r}")
        if len(set(labels)) != len(labels):
            issues.append(f"duplicate labels in alphabet of {v!r}")
    expected = tuple(len(table.alphabets.get(v, ())) for v in names)
    if table.mass.shape != expected:
        issues.append(f"mass shape {table.mass.shape} does not match alphabet sizes {expected}")
    if not np.all(np.isfinite(table.mass)):
        issues.append("non-finite mass entries")
    else:
        if np.any(table.mass < 0):
            issues.append(f"negative mass entries (min {table.mass.min():.6g})")
        total = float(table.mass.sum())
        if abs(total - 1.0) > NORM_TOL:
            issues.append(f"total mass {total:.12g} differs from 1 by more than {NORM_TOL:g}")
    return ValidationReport(tuple(issues))


@dataclass(frozen=True, eq=False)
class Channel:
    """Row-stochastic map; ``matrix[i, j] = P(output j | input i)``."""

    input_alphabet: tuple[str, ...]
    output_alphabet: tuple[str, ...]
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "input_alphabet", tuple(str(a) for a in self.input_alphabet))
        object.__setattr__(self, "output_alphabet", tuple(str(a) for a in self.output_alphabet))
        m = np.array(self.matrix, dtype=float)
        if m.shape != (len(self.input_alphabet), len(self.output_alphabet)):
            raise PreconditionError(f"channel matrix shape {m.shape} does not match alphabets")
        if np.any(m < -NORM_TOL) or np.any(np.abs(m.sum(axis=1) - 1) > NORM_TOL):
            raise PreconditionError("channel rows must be probability vectors")
        m = np.clip(m, 0.0, None)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def identity(cls, alphabet: Sequence[str]) -> Channel:
        return cls(alphabet, alphabet, np.eye(len(alphabet)))

    @classmethod
    def constant(cls, alphabet: Sequence[str], label: str = "0") -> Channel:
        return cls(alphabet, (label,), np.ones((len(alphabet), 1)))

    @classmethod
    def deterministic(cls, alphabet: Sequence[str], outputs: Sequence[int], output_alphabet=None) -> Channel:
        """Map input ``i`` to output index ``outputs[i]``."""
        k = max(outputs) + 1
        if output_alphabet is None:
            output_alphabet = tuple(str(j) for j in range(k))
        m = np.zeros((len(alphabet), len(output_alphabet)))
        m[np.arange(len(alphabet)), list(outputs)] = 1.0
        return cls(alphabet, output_alphabet, m)

    @property
    def is_deterministic(self) -> bool:
        return bool(np.all((self.matrix == 0) | (self.matrix == 1)))

    def to_dict(self) -> dict:
        return {
            "input_alphabet": list(self.input_alphabet),
            "output_alphabet": list(self.output_alphabet),
            "matrix": [[float(v) for v in row] for row in self.matrix],
        }


def table_from_dict(data: Mapping, support_eps: float = SUPPORT_EPS) -> JointTable:
    """Parse the sparse JSON distribution format; raises InvalidTableError."""
    try:
        variables = [str(v) for v in data["variables"]]
        alphabets = {v: [str(a) for a in data["alphabets"][v]] for v in variables}
        entries = data["mass"]
    except (KeyError, TypeError) as exc:
        raise InvalidTableError(f"malformed distribution document: missing {exc}") from None
    if len(set(variables)) != len(variables) or not variables:
        raise InvalidTableError("variables must be a nonempty list of distinct names")
    for v, labels in alphabets.items():
        if not labels or len(set(labels)) != len(labels):
            raise InvalidTableError(f"alphabet of {v!r} must be nonempty with distinct labels")
    index = {v: {lab: i for i, lab in enumerate(alphabets[v])} for v in variables}
    mass = np.zeros([len(alphabets[v]) for v in variables])
    seen = set()
    for k, entry in enumerate(entries):
        if not isinstance(entry, Mapping) or "p" not in entry:
            raise InvalidTableError(f"mass entry {k} must be an object with a 'p' field")
        try:
            key = tuple(index[v][str(entry[v])] for v in variables)
        except KeyError as exc:
            raise InvalidTableError(f"mass entry {k}: unknown variable or label {exc}") from None
        extra = set(entry) - set(variables) - {"p"}
        if extra:
            raise InvalidTableError(f"mass entry {k}: unexpected keys {sorted(extra)}")
        if key in seen:
            raise InvalidTableError(f"mass entry {k} repeats a tuple")
        seen.add(key)
        try:
            p = float(entry["p"])
        except (TypeError, ValueError):
            raise InvalidTableError(f"mass entry {k}: p is not a number") from None
        if not math.isfinite(p):
            raise InvalidTableError(f"mass entry {k}: p is not finite")
        mass[key] = p
    return JointTable.from_array(variables, alphabets, mass, support_eps, check=True)


def load_table(path, support_eps: float = SUPPORT_EPS) -> JointTable:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InvalidTableError(f"{path}: invalid JSON ({exc})") from None
    return table_from_dict(data, support_eps)


def marginalize(table: JointTable, keep) -> JointTable:
    return table.marginalize(keep)


def condition(table: JointTable, on: str, value: str) -> JointTable:
    return table.condition(on, value)


def extend_with_channel(table: JointTable, source: str, channel: Channel, new_name: str) -> JointTable:
    return table.extend_with_channel(source, channel, new_name)
