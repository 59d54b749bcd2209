"""Maximal common partitionings and (conditional) Gacs-Korner common functions.

The maximal common partitioning of ``p_XY`` is read off the connected
components of the bipartite support graph: x and y are joined whenever
``p(x, y) > support_eps``.  Labels of zero marginal probability belong to no
block and are reported as residual.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .dist import JointTable, _names
from .entropy import cmi_array, entropy_of, mutual_information
from .errors import InternalConsistencyError, PreconditionError


class UnionFind:
    """Disjoint sets over ``0..n-1`` with path compression and union by rank."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, a: int) -> int:
        root = a
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[a] != root:
            self.parent[a], a = root, self.parent[a]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        return True


def partition_indices(pxy: np.ndarray, eps: float):
    """Blocks of a 2-D array as ``[(x_indices, y_indices), ...]`` plus residuals.

    Blocks are ordered by their smallest x index.
    """
    nx, ny = pxy.shape
    # a symbol is in the support iff some cell above eps touches it
    edges = pxy > eps
    px, py = np.where(edges.any(axis=1), 1.0, 0.0), np.where(edges.any(axis=0), 1.0, 0.0)
    uf = UnionFind(nx + ny)
    for x, y in zip(*np.nonzero(pxy > eps)):
        uf.union(int(x), nx + int(y))
    groups: dict[int, tuple[list[int], list[int]]] = {}
    for x in range(nx):
        if px[x] > 0:
            groups.setdefault(uf.find(x), ([], []))[0].append(x)
    for y in range(ny):
        if py[y] > 0:
            groups.setdefault(uf.find(nx + y), ([], []))[1].append(y)
    blocks = sorted(((tuple(xs), tuple(ys)) for xs, ys in groups.values()), key=lambda b: b[0][0])
    res_x = tuple(x for x in range(nx) if px[x] == 0)
    res_y = tuple(y for y in range(ny) if py[y] == 0)
    return blocks, res_x, res_y


def block_label_array(pxy: np.ndarray, eps: float) -> tuple[np.ndarray, int]:
    """``J[x, y]`` = block index of the pair (0 off-block), and the block count."""
    blocks, _, _ = partition_indices(pxy, eps)
    j = np.zeros(pxy.shape, dtype=int)
    for i, (xs, ys) in enumerate(blocks):
        j[np.ix_(xs, ys)] = i
    return j, len(blocks)


def conditional_block_labels(p3: np.ndarray, eps: float) -> tuple[np.ndarray, list]:
    """Per-z block labels for an ``(x, y, z)`` array.

    Returns ``J[x, y, z]`` and the per-z block lists (``None`` where p(z) = 0).
    """
    nz = p3.shape[2]
    pz = p3.sum(axis=(0, 1))
    j = np.zeros(p3.shape, dtype=int)
    per_z = []
    for z in range(nz):
        if pz[z] <= eps:
            per_z.append(None)
            continue
        blocks, _, _ = partition_indices(p3[:, :, z], eps)
        for i, (xs, ys) in enumerate(blocks):
            j[np.ix_(xs, ys, [z])] = i
        per_z.append(blocks)
    return j, per_z


def conditional_common_entropy_array(p3: np.ndarray, eps: float) -> float:
    """H(J_{XY|Z} | Z) for an ``(x, y, z)`` array."""
    total = 0.0
    for z in range(p3.shape[2]):
        sl = p3[:, :, z]
        pz = sl.sum()
        if pz <= eps:
            continue
        blocks, _, _ = partition_indices(sl, eps)
        masses = np.array([sl[np.ix_(xs, ys)].sum() for xs, ys in blocks]) / pz
        total += pz * entropy_of(masses)
    return total


@dataclass(frozen=True)
class CommonPartition:
    """Blocks ``(x-labels, y-labels)`` of the maximal common partitioning."""

    blocks: tuple[tuple[tuple[str, ...], tuple[str, ...]], ...]
    masses: tuple[float, ...]
    residual_x: tuple[str, ...] = ()
    residual_y: tuple[str, ...] = ()

    def __len__(self):
        return len(self.blocks)

    def block_of_x(self, label: str) -> int | None:
        for i, (xs, _) in enumerate(self.blocks):
            if label in xs:
                return i
        return None

    def block_of_y(self, label: str) -> int | None:
        for i, (_, ys) in enumerate(self.blocks):
            if label in ys:
                return i
        return None

    @property
    def entropy(self) -> float:
        return entropy_of(np.array(self.masses) / sum(self.masses))

    def canonical(self) -> frozenset:
        """Order-free form, for comparing partitions up to block order."""
        return frozenset((frozenset(xs), frozenset(ys)) for xs, ys in self.blocks)

    def to_dict(self) -> dict:
        return {
            "blocks": [{"x": list(xs), "y": list(ys), "p": m} for (xs, ys), m in zip(self.blocks, self.masses)],
            "residual": {"x": list(self.residual_x), "y": list(self.residual_y)},
        }


def _partition_from_array(pxy: np.ndarray, xlabels, ylabels, eps: float) -> CommonPartition:
    blocks, rx, ry = partition_indices(pxy, eps)
    total = pxy.sum()
    return CommonPartition(
        blocks=tuple((tuple(xlabels[i] for i in xs), tuple(ylabels[i] for i in ys)) for xs, ys in blocks),
        masses=tuple(float(pxy[np.ix_(xs, ys)].sum() / total) for xs, ys in blocks),
        residual_x=tuple(xlabels[i] for i in rx),
        residual_y=tuple(ylabels[i] for i in ry),
    )


def maximal_common_partition(table: JointTable, x: str = "X", y: str = "Y") -> CommonPartition:
    """Unique maximal common partitioning of the (x, y) marginal."""
    pxy = table.marginal_array((x, y))
    return _partition_from_array(pxy, table.labels(x), table.labels(y), table.support_eps)


def common_information(table: JointTable, x: str = "X", y: str = "Y") -> float:
    """Gacs-Korner common information H(J_XY) in bits."""
    return maximal_common_partition(table, x, y).entropy


@dataclass(frozen=True)
class ConditionalCommonFunction:
    z_group: tuple[str, ...]
    per_z: dict  # z-label (comma-joined for several variables) -> CommonPartition
    conditional_entropy: float  # H(J_{XY|Z} | Z)

    @property
    def labeling(self) -> dict:
        """(z, block index) -> integer label of J_{XY|Z}; labels restart per z."""
        return {(z, i): i for z, part in self.per_z.items() for i in range(len(part))}

    def to_dict(self) -> dict:
        return {
            "given": list(self.z_group),
            "per_z": {z: part.to_dict() for z, part in self.per_z.items()},
            "H(J|Z)": self.conditional_entropy,
        }


def _xyz_array(table: JointTable, x: str, y: str, z_group: tuple[str, ...]) -> tuple[np.ndarray, list[str]]:
    """(x, y, z) array with the z group flattened, plus flattened z labels."""
    arr = table.marginal_array((x, y) + z_group)
    zshape = arr.shape[2:]
    zlabels = [""]
    for v in z_group:
        zlabels = [f"{a},{b}" if a else b for a in zlabels for b in table.labels(v)]
    return arr.reshape(arr.shape[:2] + (int(np.prod(zshape)) if zshape else 1,)), zlabels


def _roles(x: str, y: str, z_group) -> tuple[str, ...]:
    z_group = _names(z_group)
    if x == y or x in z_group or y in z_group:
        raise PreconditionError("x, y and the conditioning group must be distinct")
    return z_group


def conditional_common_function(table: JointTable, x: str = "X", y: str = "Y", z_group="Z") -> ConditionalCommonFunction:
    z_group = _roles(x, y, z_group)
    if not z_group:
        raise PreconditionError("conditioning group must be nonempty")
    p3, zlabels = _xyz_array(table, x, y, z_group)
    eps = table.support_eps
    per_z = {}
    for k, zl in enumerate(zlabels):
        sl = p3[:, :, k]
        if sl.sum() > eps:
            per_z[zl] = _partition_from_array(sl, table.labels(x), table.labels(y), eps)
    return ConditionalCommonFunction(z_group, per_z, float(conditional_common_entropy_array(p3, eps)))


def add_common_function(table: JointTable, x: str = "X", y: str = "Y", z_group=("Z",), name: str = "J") -> JointTable:
    """Append J_{XY|Z} (or J_XY when ``z_group`` is empty) as a variable.

    Labels are block indices, assigned independently for each z.
    """
    z_group = _roles(x, y, z_group)
    arr = table.marginal_array((x, y) + z_group)
    p3 = arr.reshape(arr.shape[:2] + (-1,)) if z_group else arr[:, :, None]
    j, per_z = conditional_block_labels(p3, table.support_eps)
    nlab = max((len(b) for b in per_z if b is not None), default=1)
    return table.extend_with_index((x, y) + z_group, j.reshape(arr.shape), name, [str(i) for i in range(nlab)])


@dataclass(frozen=True)
class DoubleMarkovReport:
    x_chain: bool  # X - YZ - W
    y_chain: bool  # Y - XZ - W
    cmi_x: float  # I(X:W|YZ)
    cmi_y: float  # I(Y:W|XZ)
    cmi_block: float  # I(XY:W|J_{XY|Z} Z)
    holds: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def check_double_markov(
    table: JointTable, w: str = "W", x: str = "X", y: str = "Y", z_group: Iterable[str] | str = ("Z",), tol: float = 1e-9
) -> DoubleMarkovReport:
    """Both chains X-YZ-W and Y-XZ-W hold iff I(XY:W|J_{XY|Z}Z) = 0.

    Returns both sides; raises InternalConsistencyError if they disagree.
    """
    z_group = _roles(x, y, z_group)
    if w in (x, y) or w in z_group:
        raise PreconditionError("w must differ from x, y and the conditioning group")
    jname = "__J__"
    ext = add_common_function(table, x, y, z_group, jname)
    cmi_x = mutual_information(table, x, w, (y,) + z_group)
    cmi_y = mutual_information(table, y, w, (x,) + z_group)
    cmi_block = mutual_information(ext, (x, y), w, (jname,) + z_group)
    x_chain, y_chain = cmi_x <= tol, cmi_y <= tol
    holds = cmi_block <= tol
    if (x_chain and y_chain) != holds:
        raise InternalConsistencyError(
            f"double Markov equivalence violated: I(X:W|YZ)={cmi_x:.3e}, I(Y:W|XZ)={cmi_y:.3e}, "
            f"I(XY:W|JZ)={cmi_block:.3e}"
        )
    return DoubleMarkovReport(x_chain, y_chain, cmi_x, cmi_y, cmi_block, holds)


def bi_gap_array(p3: np.ndarray, eps: float) -> float:
    """I(X:Y | J_{XY|Z} Z) for an ``(x, y, z)`` array; zero iff block independent."""
    j, per_z = conditional_block_labels(p3, eps)
    nj = max((len(b) for b in per_z if b is not None), default=1)
    p4 = np.zeros(p3.shape + (nj,))
    np.put_along_axis(p4, j[..., None], p3[..., None], axis=-1)
    return cmi_array(p4, [0], [1], [2, 3], eps)
