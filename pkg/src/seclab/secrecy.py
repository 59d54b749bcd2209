"""Intrinsic information, key-cost upper bounds and the reversibility decision."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .classes import (
    NO,
    YES,
    check_pd_transcript,
    coarse_grainings,
    eve_condition,
    is_ubi_pd,
    is_ubi_pd_down,
    key_rate,
    support_sizes,
    _pd_witness,
)
from .common import bi_gap_array, conditional_block_labels
from .dist import Channel, JointTable
from .errors import PreconditionError, SizeCapError
from .protocol import transcript_array, two_by_n_message

TOL = 1e-9
MATCH_TOL = 1e-6  # how close a candidate must come to the intrinsic value
FEAS_TOL = 1e-7  # feasibility gate for X - W Zbar - Y in the key-cost search


def _h(a: np.ndarray, eps: float) -> float:
    a = a.ravel()
    a = a[a > 0]
    return -float(a @ np.log2(a))


def cmi_xy_given_last(p: np.ndarray, eps: float) -> float:
    """I(X:Y|rest) for an array with axes (x, y, *rest)."""
    rest = p.sum(axis=(0, 1))
    return _h(p.sum(axis=1), eps) + _h(p.sum(axis=0), eps) - _h(p, eps) - _h(rest, eps)


def _softmax_rows(logits: np.ndarray) -> np.ndarray:
    e = np.exp(logits - logits.max(axis=1, keepdims=True))
    return e / e.sum(axis=1, keepdims=True)


def _channel_key(ch: Channel):
    # deterministic first, then fewer used outputs, then lexicographic matrix order
    used = int(np.sum(ch.matrix.sum(axis=0) > 0))
    return (not ch.is_deterministic, used, tuple(np.round(ch.matrix, 12).ravel()))


_SOURCE_RANK = {"exhaustive-deterministic": 0, "local-search": 1}


@dataclass
class OptResult:
    value: float
    witness_channels: list
    method: str
    gap_bound: float | None
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "witness_channels": [c.to_dict() for c in self.witness_channels],
            "method": self.method,
            "gap_bound": self.gap_bound,
            "details": self.details,
        }


@dataclass
class ReversibilityVerdict:
    status: str  # reversible | not-reversible | unknown
    key_value: float | None
    certificates: list
    characterization: str | None = None
    intrinsic: float | None = None

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "key_value": self.key_value,
            "characterization": self.characterization,
            "intrinsic": self.intrinsic,
            "certificates": self.certificates,
        }


def _xyz(table, x, y, z):
    if len({x, y, z}) != 3:
        raise PreconditionError("roles x, y, z must be distinct variables")
    return table.marginal_array((x, y, z))


def _local_channel(zlabels, supp, k, block: np.ndarray) -> Channel:
    m = np.zeros((len(zlabels), k))
    m[:, 0] = 1.0
    m[supp] = block
    return Channel(list(zlabels), [str(i) for i in range(k)], m)


def intrinsic_information(
    table: JointTable,
    x="X",
    y="Y",
    z="Z",
    restarts: int = 64,
    seed: int = 0,
    zbar_card: int | None = None,
    local_only: bool = False,
    max_exhaustive: int = 8,
    maxfev: int = 4000,
) -> OptResult:
    """min over channels Zbar|Z of I(X:Y|Zbar).

    Exhaustive over deterministic coarse-grainings of supp(Z), then Nelder-Mead
    over softmax-parametrized channels from ``restarts`` seeded starts.
    """
    eps = table.support_eps
    p3 = _xyz(table, x, y, z)
    zl = table.labels(z)
    supp = [i for i in range(len(zl)) if p3[:, :, i].sum() > eps]
    if len(supp) > max_exhaustive and not local_only:
        raise SizeCapError(f"|supp Z| = {len(supp)} exceeds the exhaustive cap {max_exhaustive}; use local-only mode")
    ps = p3[:, :, supp]
    flat = ps.reshape(-1, len(supp))
    cands: list[tuple[float, Channel, str]] = []
    if not local_only:
        for ch in coarse_grainings(table, z, max_exhaustive):
            cands.append((cmi_xy_given_last(np.einsum("xyz,zb->xyb", p3, ch.matrix), eps), ch, "exhaustive-deterministic"))
    k = zbar_card or len(supp)
    n_s = len(supp)

    def f(theta):
        c = _softmax_rows(theta.reshape(n_s, k))
        return cmi_xy_given_last((flat @ c).reshape(p3.shape[0], p3.shape[1], k), eps)

    evals = 0
    already_zero = any(v <= TOL for v, _, _ in cands)
    if n_s > 1 and k > 1 and restarts > 0 and not already_zero:
        for ss in np.random.SeedSequence(seed).spawn(restarts):
            rng = np.random.default_rng(ss)
            res = minimize(f, rng.normal(scale=2.0, size=n_s * k), method="Nelder-Mead",
                           options={"fatol": 1e-10, "xatol": 1e-4, "maxfev": maxfev})
            evals += res.nfev
            c = _softmax_rows(res.x.reshape(n_s, k))
            snapped = np.eye(k)[np.argmax(c, axis=1)]
            for mat in (snapped, c):
                ch = _local_channel(zl, supp, k, mat)
                cands.append((cmi_xy_given_last(np.einsum("xyz,zb->xyb", p3, ch.matrix), eps), ch, "local-search"))
    if not cands:  # a single Eve symbol: nothing to optimize
        ch = Channel.constant(zl)
        cands.append((cmi_xy_given_last(np.einsum("xyz,zb->xyb", p3, ch.matrix), eps), ch, "exhaustive-deterministic"))
    best = min(v for v, _, _ in cands)
    tied = sorted((c for c in cands if c[0] <= best + TOL),
                  key=lambda c: (_channel_key(c[1])[:2], _SOURCE_RANK[c[2]], _channel_key(c[1])[2]))
    witnesses, seen = [], set()
    for _, ch, _ in tied:
        key = _channel_key(ch)
        if key not in seen:
            seen.add(key)
            witnesses.append(ch)
    method = tied[0][2]
    value = max(best, 0.0)
    return OptResult(
        value,
        witnesses,
        method,
        0.0 if value <= TOL else None,
        {"restarts": restarts, "seed": seed, "function_evals": evals, "zbar_card": k,
         "upper_bound_only": method == "local-search"},
    )


def winter_key_cost(
    table: JointTable,
    x="X",
    y="Y",
    z="Z",
    w_card: int | None = None,
    restarts: int = 4,
    seed: int = 0,
    maxfev: int = 2000,
) -> OptResult:
    """Upper bound on min I(XY:W|Zbar) subject to X - W Zbar - Y.

    Structural candidates W in {X, Y, J_{XY|Zbar}} for every deterministic
    Zbar come first; a penalized local search over (Zbar|Z, W|XY) follows.
    Global optimality is never certified.
    """
    eps = table.support_eps
    p3 = _xyz(table, x, y, z)
    nx, ny, nz = p3.shape
    if nx * ny > 16 or nz > 6:
        raise SizeCapError("key-cost search limited to |X||Y| <= 16 and |Z| <= 6")
    nw = w_card or nx * ny
    best = (np.inf, None, None, "structural")
    for ch in coarse_grainings(table, z):
        bar = np.einsum("xyz,zb->xyb", p3, ch.matrix)
        h_bar = _h(bar.sum(axis=(0, 1)), eps)
        options = [("W=X", _h(bar.sum(axis=1), eps) - h_bar), ("W=Y", _h(bar.sum(axis=0), eps) - h_bar)]
        if bi_gap_array(bar, eps) <= TOL:
            j, per_z = conditional_block_labels(bar, eps)
            nj = max((len(b) for b in per_z if b is not None), default=1)
            q = np.zeros(bar.shape + (nj,))
            np.put_along_axis(q, j[..., None], bar[..., None], axis=-1)
            options.append(("W=J", _h(q.sum(axis=(0, 1)), eps) - h_bar))
        for name, val in options:
            if val < best[0] - TOL:
                best = (max(val, 0.0), ch, name, "structural")

    def parts(theta):
        c = _softmax_rows(theta[: nz * nz].reshape(nz, nz))
        wm = _softmax_rows(theta[nz * nz:].reshape(nx * ny, nw)).reshape(nx, ny, 1, nw)
        q = np.einsum("xyz,zb->xyb", p3, c)[..., None] * wm
        return c, wm, q

    def objective_terms(q):
        # I(XY:W|Zbar) and I(X:Y|W Zbar)
        qb = q.sum(axis=(0, 1))
        hb = _h(q.sum(axis=(0, 1, 3)), eps)
        cost = _h(q.sum(axis=3), eps) + _h(qb, eps) - _h(q, eps) - hb
        feas = cmi_xy_given_last(q, eps)
        return max(cost, 0.0), max(feas, 0.0)

    def f(theta):
        cost, feas = objective_terms(parts(theta)[2])
        return cost + 50.0 * feas

    for ss in np.random.SeedSequence(seed).spawn(restarts):
        rng = np.random.default_rng(ss)
        res = minimize(f, rng.normal(scale=2.0, size=nz * nz + nx * ny * nw), method="Nelder-Mead",
                       options={"fatol": 1e-10, "xatol": 1e-4, "maxfev": maxfev})
        c, wm, q = parts(res.x)
        snapped_c = np.eye(nz)[np.argmax(c, axis=1)]
        snapped_w = np.eye(nw)[np.argmax(wm.reshape(nx * ny, nw), axis=1)].reshape(nx, ny, 1, nw)
        for cm, wmat in ((snapped_c, snapped_w), (c, wm)):
            qq = np.einsum("xyz,zb->xyb", p3, cm)[..., None] * wmat
            cost, feas = objective_terms(qq)
            if feas <= FEAS_TOL and cost < best[0] - TOL:
                ch = Channel(table.labels(z), [str(i) for i in range(nz)], cm)
                best = (cost, ch, "W|XY local", "local-search")
    value, ch, wname, method = best
    return OptResult(
        value,
        [ch],
        method,
        None,
        {"W": wname, "w_card": nw, "restarts": restarts, "seed": seed, "certified_global": False},
    )


# -- the relation and the zero-pattern scan ---------------------------------


def _bt_oriented(q: np.ndarray, p: np.ndarray, eps: float) -> str | None:
    qx, qy = q.sum(axis=1) > eps, q.sum(axis=0) > eps
    px, py = p.sum(axis=1) > eps, p.sum(axis=0) > eps
    if np.any(qx & ~px):
        return None
    qn = q / q.sum()
    if np.allclose(qn, np.outer(qn.sum(axis=1), qn.sum(axis=0)), atol=eps * 10, rtol=0):
        return "uncorrelated"
    if not np.any(qy & ~py):
        return "support-contained"
    for yy in np.nonzero(qy & ~py)[0]:
        if np.count_nonzero(q[:, yy] > eps) > 1:
            return None
    return "determined-outside-support"


def check_blacktriangleleft(q, p, eps: float = 1e-12) -> tuple[bool, str | None, str | None]:
    """Whether q << p in the sense of the relation, with the matched condition and orientation."""
    q = q.marginal_array(q.variables[:2]) if isinstance(q, JointTable) else np.asarray(q, float)
    p = p.marginal_array(p.variables[:2]) if isinstance(p, JointTable) else np.asarray(p, float)
    if q.shape != p.shape:
        raise PreconditionError(f"alphabet mismatch: {q.shape} vs {p.shape}")
    for orient, (qq, pp) in (("x-first", (q, p)), ("y-first", (q.T, p.T))):
        cond = _bt_oriented(qq, pp, eps)
        if cond is not None:
            return True, cond, orient
    return False, None, None


def proposition1_scan(table: JointTable, x="X", y="Y", z="Z") -> list[dict]:
    """All (x, y, z0, z1) tuples certifying K_D < I(X:Y|Z) by the zero-pattern argument.

    Binary-binary tables use the plain pattern; otherwise the relation
    ``p_{XY|z1} << p_{XY|z0}`` is required as well.
    """
    eps = table.support_eps
    p3 = _xyz(table, x, y, z)
    pz = p3.sum(axis=(0, 1))
    binary = p3.shape[0] == 2 and p3.shape[1] == 2
    xl, yl, zl = table.labels(x), table.labels(y), table.labels(z)
    out = []
    for z0 in range(len(zl)):
        if pz[z0] <= eps:
            continue
        c0 = p3[:, :, z0] / pz[z0]
        sx, sy = c0.sum(axis=1) > eps, c0.sum(axis=0) > eps
        for z1 in range(len(zl)):
            if z1 == z0 or pz[z1] <= eps:
                continue
            c1 = p3[:, :, z1] / pz[z1]
            hits = np.argwhere((c1 > eps) & (c0 <= eps) & sx[:, None] & sy[None, :])
            if not len(hits):
                continue
            if binary:
                kind, cond, orient = "proposition-1", None, None
            else:
                ok, cond, orient = check_blacktriangleleft(c1, c0, eps)
                if not ok:
                    continue
                kind = "support-lemma"
            for a, b in hits:
                out.append({"kind": kind, "x": xl[a], "y": yl[b], "z0": zl[z0], "z1": zl[z1],
                            "condition": cond, "orientation": orient})
    return out


# -- reversibility ----------------------------------------------------------


def _bar_table(table, x, y, z, ch: Channel) -> JointTable:
    return table.marginalize((x, y, z)).extend_with_channel(z, ch, "Zbar").marginalize((x, y, "Zbar"))


def decide_reversibility(
    table: JointTable, x="X", y="Y", z="Z", tol=TOL, seed: int = 0, restarts: int = 64, opt: OptResult | None = None
) -> ReversibilityVerdict:
    """Decision tree: zero intrinsic value, the two-symbol regime, else a witness search.

    ``opt`` reuses an intrinsic-information result computed with the same roles.
    """
    eps = table.support_eps
    if opt is None:
        opt = intrinsic_information(table, x, y, z, restarts=restarts, seed=seed)
    base = {"kind": "intrinsic", "value": opt.value, "method": opt.method,
            "channel": opt.witness_channels[0].to_dict()}
    if opt.value <= tol:
        return ReversibilityVerdict("reversible", 0.0, [base], "zero intrinsic information", opt.value)
    p3 = _xyz(table, x, y, z)
    sx, sy = support_sizes(table, x, y)
    if min(sx, sy) == 2:
        return _decide_two_symbol(table, x, y, z, tol, opt, base, p3, eps)
    found = is_ubi_pd_down(table, x, y, z, tol, hints=[(c, None) for c in opt.witness_channels],
                           use_optimizer=False, refute=False)
    if found.verdict == YES:
        key = found.witness["H(J|Zbar M)"]
        return ReversibilityVerdict("reversible", key, [base, {"kind": "ubi-pd-down-witness", "witness": found.witness}],
                                    "theorem-1 UBI-PD-down", opt.value)
    return ReversibilityVerdict("unknown", None, [base, {"kind": "note", "text": "no UBI-PD-down witness; outside the proven regime"}],
                                None, opt.value)


def _decide_two_symbol(table, x, y, z, tol, opt, base, p3, eps) -> ReversibilityVerdict:
    certs = [base]
    cands = list(opt.witness_channels)
    for ch in coarse_grainings(table, z):
        v = cmi_xy_given_last(np.einsum("xyz,zb->xyb", p3, ch.matrix), eps)
        if v <= opt.value + MATCH_TOL and all(_channel_key(ch) != _channel_key(c) for c in cands):
            cands.append(ch)
    bi = [c for c in cands if bi_gap_array(np.einsum("xyz,zb->xyb", p3, c.matrix), eps) <= tol]
    if not bi:
        certs.append({"kind": "lemma-2", "text": "no channel attaining the intrinsic value makes the table BI",
                      "channels_checked": len(cands)})
        certs.extend(proposition1_scan(table, x, y, z))
        return ReversibilityVerdict("not-reversible", None, certs, "lemma-2", opt.value)
    scanned_all = True
    for ch in bi:
        bar = _bar_table(table, x, y, z, ch)
        scan = proposition1_scan(bar, x, y, "Zbar")
        if scan:
            certs.append({"kind": "scan-at-minimizer", "channel": ch.to_dict(), "tuples": scan})
            continue
        scanned_all = False
        bar3 = bar.marginal_array((x, y, "Zbar"))
        rnd = two_by_n_message(bar, x, y)
        t, n_t = transcript_array((rnd,), table.labels(x), table.labels(y), bar.marginal_array((x, y)), eps)
        info = check_pd_transcript(bar3, t, n_t, eps, tol)
        if info is None:
            certs.append({"kind": "announcement-failed", "channel": ch.to_dict()})
            continue
        leak = eve_condition(p3, ch.matrix, t, n_t, eps)
        rates = key_rate(p3, ch.matrix, t, n_t, eps)
        witness = {"channel": ch.to_dict(), **_pd_witness((rnd,), info, table.labels(x), table.labels(y),
                                                           "two-symbol-announcement"), **rates}
        if leak <= tol:
            certs.append({"kind": "ubi-pd-down-witness", "witness": witness})
            return ReversibilityVerdict("reversible", rates["H(J|Zbar)"], certs, "theorem-1 UBI-PD-down", opt.value)
        if is_ubi_pd(table, x, y, z, tol).verdict == YES:
            certs.append({"kind": "ubi-pd-at-minimizer", "witness": witness, "I(Z:J|M Zbar)": leak})
            return ReversibilityVerdict("reversible", rates["H(J|Zbar)"], certs, "appendix-d UBI-PD", opt.value)
    if scanned_all:
        return ReversibilityVerdict("not-reversible", None, certs, "support-lemma", opt.value)
    return ReversibilityVerdict("unknown", None, certs, None, opt.value)
