"""Pure-state embedding of distributions, two-qubit concurrence and entanglement of formation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dist import JointTable
from .errors import InternalConsistencyError, PreconditionError

HERM_TOL = 1e-12
TRACE_TOL = 1e-9
PSD_FLOOR = -1e-9

SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]])


@dataclass(frozen=True)
class DensityMatrix:
    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise PreconditionError(f"density matrix must be square, got {m.shape}")
        if np.max(np.abs(m - m.conj().T), initial=0.0) > HERM_TOL:
            raise InternalConsistencyError("density matrix is not Hermitian")
        if abs(np.trace(m).real - 1.0) > TRACE_TOL:
            raise InternalConsistencyError(f"trace {np.trace(m).real} differs from 1")
        if np.linalg.eigvalsh(m).min() < PSD_FLOOR:
            raise InternalConsistencyError("density matrix is not positive semidefinite")
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def purity(self) -> float:
        return float(np.trace(self.entries @ self.entries).real)

    def is_pure(self, tol: float = 1e-9) -> bool:
        return abs(self.purity - 1.0) <= tol


def embed(table: JointTable, order=None) -> np.ndarray:
    """Amplitudes sqrt(p) on the computational basis, axes in ``order``."""
    order = tuple(order or table.variables)
    return np.sqrt(table.marginal_array(order)).ravel()


def reduce_ab(state: np.ndarray, dims) -> DensityMatrix:
    """Trace out the last factor of a pure state with factor sizes ``(dA, dB, dE)``."""
    da, db, de = dims
    state = np.asarray(state)
    if state.size != da * db * de:
        raise PreconditionError(f"state of length {state.size} does not factor as {dims}")
    psi = state.reshape(da * db, de)
    return DensityMatrix(psi @ psi.conj().T)


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(m)
    return (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T


def concurrence_2q(rho: DensityMatrix) -> float:
    """Wootters concurrence from the eigenvalues of sqrt(rho) rho~ sqrt(rho)."""
    if rho.dim != 4:
        raise PreconditionError("concurrence needs a two-qubit state")
    yy = np.kron(SIGMA_Y, SIGMA_Y)
    s = _psd_sqrt(rho.entries)
    # sqrt(rho~) = yy sqrt(rho)* yy, so the square roots of the eigenvalues of
    # sqrt(rho) rho~ sqrt(rho) are the singular values of sqrt(rho) sqrt(rho~).
    # Taking them directly avoids amplifying round-off near zero.
    lam = np.linalg.svd(s @ (yy @ s.conj() @ yy), compute_uv=False)
    return float(max(0.0, lam[0] - lam[1:].sum()))


def binary_entropy(p: float) -> float:
    if p <= 0 or p >= 1:
        return 0.0
    return float(-p * np.log2(p) - (1 - p) * np.log2(1 - p))


def E(c: float) -> float:
    """Entanglement of formation as a function of concurrence."""
    c = min(max(c, 0.0), 1.0)
    return binary_entropy(0.5 * (1.0 - np.sqrt(1.0 - c * c)))


def eof_2q(rho: DensityMatrix) -> float:
    return E(concurrence_2q(rho))


def closed_form_concurrence(pz: np.ndarray, p0: np.ndarray) -> float:
    """2 sum_z p(z) sqrt(p(0|z) p(1|z)) for the diagonal-correlated family."""
    return float(2.0 * np.sum(pz * np.sqrt(p0 * (1.0 - p0))))


def _diagonal_form(p3: np.ndarray, eps: float):
    """``(p(z), p(0|z), swapped)`` if some y-relabeling makes p(x, y|z) = delta_xy p(x|z)."""
    for swapped, arr in ((False, p3), (True, p3[:, ::-1, :])):
        off = arr[0, 1, :].sum() + arr[1, 0, :].sum()
        if off <= eps:
            pz = arr.sum(axis=(0, 1))
            keep = pz > eps
            return pz[keep], arr[0, 0, keep] / pz[keep], swapped
    return None


@dataclass
class Theorem3Report:
    key_closed_form: float  # sum_z p(z) E(2 sqrt(p0 p1))
    eof_closed_form: float  # E(2 sum_z p(z) sqrt(p0 p1))
    gap: float
    constant_conditional_entropy: bool
    pure_embedding: bool
    concurrence: float
    concurrence_closed_form: float
    eof: float
    y_relabeled: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def theorem3_report(table: JointTable, x="X", y="Y", z="Z", verdict=None, tol: float = 1e-9) -> Theorem3Report:
    """Closed-form key vs entanglement of formation for a reversible binary table.

    Without a ``verdict`` the diagonal form itself is the certificate: such a
    table is UBI, hence reversible with key H(X|Z).
    """
    if len(table.labels(x)) != 2 or len(table.labels(y)) != 2:
        raise PreconditionError("the report needs binary X and Y")
    eps = table.support_eps
    p3 = table.marginal_array((x, y, z))
    form = _diagonal_form(p3, eps)
    if form is None:
        raise PreconditionError("table is not diagonal-correlated under any relabeling of y")
    pz, p0, swapped = form
    if verdict is not None:
        status, key = verdict.status, verdict.key_value
    else:
        status, key = "reversible", float(np.sum(pz * np.array([binary_entropy(v) for v in p0])))
    if status != "reversible" or not key or key <= tol:
        raise PreconditionError("the report needs a reversible table with positive key")
    cz = 2.0 * np.sqrt(p0 * (1.0 - p0))
    kd = float(np.sum(pz * np.array([E(c) for c in cz])))
    cf = closed_form_concurrence(pz, p0)
    ef = E(cf)
    hz = np.array([binary_entropy(v) for v in p0])
    rho = reduce_ab(embed(table, (x, y, z)), (2, 2, p3.shape[2]))
    conc = concurrence_2q(rho)
    return Theorem3Report(
        key_closed_form=kd,
        eof_closed_form=ef,
        gap=kd - ef,
        constant_conditional_entropy=bool(np.ptp(hz) <= tol),
        pure_embedding=rho.is_pure(),
        concurrence=conc,
        concurrence_closed_form=cf,
        eof=E(conc),
        y_relabeled=swapped,
    )
