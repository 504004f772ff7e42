"""Dense primal-dual interior point method for block semidefinite programs.

Standard form, with ``X`` block diagonal (real symmetric PSD blocks and
nonnegative-orthant blocks)::

    primal:  minimize  <C, X>   s.t.  <A_i, X> = b_i,  X >= 0
    dual:    maximize  b.y      s.t.  C - sum_i y_i A_i = Z >= 0

The iteration is the infeasible path-following scheme with the HKM search
direction and Mehrotra's predictor-corrector heuristic. Everything is dense;
the intended problem sizes have Schur complements of a few hundred rows.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as sla

from ..numerics import hermitian_eig, sdp_tolerance

__all__ = [
    "PSD",
    "NONNEG",
    "SdpProblem",
    "SdpSolution",
    "Certificate",
    "embed_hermitian",
    "solve",
    "certify",
]

PSD = "psd"
NONNEG = "nonneg"

STEP_FRACTION = 0.98
MAX_ITER = 200
DIVERGENCE = 1e10
REFINE_STEPS = 2


def embed_hermitian(h: np.ndarray) -> np.ndarray:
    """Real symmetric representative ``[[Re, -Im], [Im, Re]]`` of a Hermitian matrix.

    The spectrum of the result is that of ``h`` with every eigenvalue doubled in
    multiplicity, so positivity is preserved in both directions. Leading batch
    axes are allowed; the Hermiticity check is skipped for batches.
    """
    h = np.asarray(h)
    if h.ndim == 2:
        hermitian_eig(h)  # raises on non-Hermitian input
    re, im = np.real(h), np.imag(h)
    top = np.concatenate([re, -im], axis=-1)
    bot = np.concatenate([im, re], axis=-1)
    return np.concatenate([top, bot], axis=-2)


@dataclass(frozen=True)
class SdpProblem:
    """Block-diagonal SDP in primal standard form.

    ``blocks[k] = (kind, size)``; ``c[k]`` is ``(size, size)`` for PSD blocks and
    ``(size,)`` for nonnegative blocks; ``a[k]`` stacks the ``m`` constraint
    functionals on that block with a leading axis of length ``m``.
    """

    blocks: tuple
    c: tuple
    a: tuple
    b: np.ndarray

    def __post_init__(self):
        m = int(np.asarray(self.b).shape[0])
        if not (len(self.blocks) == len(self.c) == len(self.a)):
            raise ValueError("blocks, c and a must have the same length")
        for (kind, n), ck, ak in zip(self.blocks, self.c, self.a):
            if n <= 0:
                raise ValueError("block sizes must be positive")
            if kind == PSD:
                if ck.shape != (n, n) or ak.shape != (m, n, n):
                    raise ValueError(f"psd block of size {n}: bad shapes {ck.shape}, {ak.shape}")
                if not np.allclose(ck, ck.T, atol=1e-12) or not np.allclose(ak, np.swapaxes(ak, 1, 2), atol=1e-12):
                    raise ValueError("psd block data must be symmetric")
            elif kind == NONNEG:
                if ck.shape != (n,) or ak.shape != (m, n):
                    raise ValueError(f"nonneg block of size {n}: bad shapes {ck.shape}, {ak.shape}")
            else:
                raise ValueError(f"unknown block kind {kind!r}")

    @property
    def m(self) -> int:
        return int(np.asarray(self.b).shape[0])

    @property
    def order(self) -> int:
        """Barrier parameter (total rank of the cone)."""
        return int(sum(n for _, n in self.blocks))

    def apply(self, x: Sequence[np.ndarray]) -> np.ndarray:
        """``A(X)``, the vector of ``<A_i, X>``."""
        out = np.zeros(self.m)
        for (kind, _), ak, xk in zip(self.blocks, self.a, x):
            if kind == PSD:
                out += ak.reshape(self.m, -1) @ xk.reshape(-1)
            else:
                out += ak @ xk
        return out

    def adjoint(self, y: np.ndarray) -> list:
        """``A^T(y) = sum_i y_i A_i`` per block."""
        return [np.tensordot(y, ak, axes=(0, 0)) for ak in self.a]

    def objective(self, x: Sequence[np.ndarray]) -> float:
        return float(sum(np.vdot(ck, xk).real for ck, xk in zip(self.c, x)))


@dataclass(frozen=True)
class SdpSolution:
    primal_value: float
    dual_value: float
    gap: float
    status: str
    primal_blocks: tuple
    dual_multipliers: np.ndarray
    slack_blocks: tuple
    iterations: int
    primal_residual: float = 0.0
    dual_residual: float = 0.0
    history: tuple = field(default=(), repr=False)

    @property
    def ok(self) -> bool:
        return self.status == "optimal"


@dataclass(frozen=True)
class Certificate:
    """Feasibility data recomputed from a solution, outside the solver loop."""

    primal_residual: float
    dual_residual: float
    primal_min_eig: float
    dual_min_eig: float
    primal_value: float
    dual_value: float


def _min_eig(kind: str, v: np.ndarray) -> float:
    if kind == PSD:
        return float(np.linalg.eigvalsh(v)[0])
    return float(np.min(v))


def certify(p: SdpProblem, s: SdpSolution) -> Certificate:
    """Recompute residuals and cone membership of ``s`` from scratch.

    The dual slack is rebuilt as ``C - A^T(y)`` so that its minimum eigenvalue
    measures the true dual feasibility of the multipliers.
    """
    x = s.primal_blocks
    y = np.asarray(s.dual_multipliers)
    rp = p.b - p.apply(x)
    aty = p.adjoint(y)
    z = [ck - ak for ck, ak in zip(p.c, aty)]
    pmin = min((_min_eig(kind, xk) for (kind, _), xk in zip(p.blocks, x)), default=0.0)
    dmin = min((_min_eig(kind, zk) for (kind, _), zk in zip(p.blocks, z)), default=0.0)
    return Certificate(
        primal_residual=float(np.linalg.norm(rp)),
        dual_residual=float(max(0.0, -dmin)),
        primal_min_eig=pmin,
        dual_min_eig=dmin,
        primal_value=p.objective(x),
        dual_value=float(p.b @ y),
    )


def _inner(u: Sequence[np.ndarray], v: Sequence[np.ndarray]) -> float:
    return float(sum(np.vdot(a, b).real for a, b in zip(u, v)))


def _norm(u: Sequence[np.ndarray]) -> float:
    return float(np.sqrt(sum(np.vdot(a, a).real for a in u)))


def _sym(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.T)


def _max_step(kind: str, v: np.ndarray, dv: np.ndarray) -> float:
    """Largest ``alpha`` with ``v + alpha dv`` in the cone (``inf`` if unbounded)."""
    if kind == NONNEG:
        neg = dv < 0
        if not np.any(neg):
            return np.inf
        return float(np.min(-v[neg] / dv[neg]))
    try:
        low = np.linalg.cholesky(v)
        w = sla.solve_triangular(low, dv, lower=True)
        w = sla.solve_triangular(low, w.T, lower=True)
        lam = float(np.linalg.eigvalsh(_sym(w))[0])
    except np.linalg.LinAlgError:
        # v has lost definiteness to rounding: use a clipped inverse square root
        w, u = np.linalg.eigh(_sym(v))
        r = u / np.sqrt(np.clip(w, 1e-300, None))
        lam = float(np.linalg.eigvalsh(_sym(r.T @ dv @ r))[0])
    return np.inf if lam >= 0 else -1.0 / lam


def _step(kinds, v, dv) -> float:
    a = min((_max_step(k, vk, dvk) for k, vk, dvk in zip(kinds, v, dv)), default=np.inf)
    return min(1.0, STEP_FRACTION * a)


class _Nonzero:
    """Per-block list of the constraint indices with a nonzero functional."""

    def __init__(self, p: SdpProblem):
        self.idx = []
        self.flat = []
        for (kind, n), ak in zip(p.blocks, p.a):
            flat = ak.reshape(p.m, n * n if kind == PSD else n)
            nz = np.flatnonzero(np.any(flat != 0.0, axis=1))
            self.idx.append(nz)
            self.flat.append(flat[nz])


def _schur(p: SdpProblem, nz: _Nonzero, x, zinv, z) -> np.ndarray:
    m = p.m
    mat = np.zeros((m, m))
    for k, ((kind, n), ak) in enumerate(zip(p.blocks, p.a)):
        idx = nz.idx[k]
        if idx.size == 0:
            continue
        sub = ak[idx]
        if kind == PSD:
            g = x[k] @ sub @ zinv[k]
            blk = nz.flat[k] @ g.reshape(idx.size, -1).T
        else:
            blk = (sub * (x[k] / z[k])) @ sub.T
        mat[np.ix_(idx, idx)] += blk
    return _sym(mat)


def _factor(mat: np.ndarray):
    scale = max(1.0, float(np.max(np.abs(np.diag(mat)), initial=0.0)))
    reg = 0.0
    for _ in range(8):
        try:
            return sla.cho_factor(mat + reg * scale * np.eye(len(mat)), lower=True), reg
        except np.linalg.LinAlgError:
            reg = 1e-14 if reg == 0.0 else reg * 100.0
    return None, reg


def _solve_schur(chol, mat: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    # a few rounds of refinement against the unregularized matrix recover the
    # accuracy lost to ill-conditioning near the end of the run
    dy = sla.cho_solve(chol, rhs)
    for _ in range(REFINE_STEPS):
        dy = dy + sla.cho_solve(chol, rhs - mat @ dy)
    return dy


def _gram_pinv(p: SdpProblem, nz: "_Nonzero") -> np.ndarray:
    """Pseudo-inverse of ``A A^T``, used to put primal steps back on ``A(dX) = Rp``."""
    g = np.zeros((p.m, p.m))
    for idx, flat in zip(nz.idx, nz.flat):
        g[np.ix_(idx, idx)] += flat @ flat.T
    return np.linalg.pinv(_sym(g), hermitian=True)


def _direction(p, kinds, chol, mat, gram_pinv, x, z, zinv, rp, rd, rc):
    """Solve the HKM Newton system for a given complementarity residual ``rc``.

    ``rc`` is the target for ``dX + X dZ Z^{-1}`` (before symmetrization).
    """
    # rhs = Rp - A(Rc) + A(X Rd Z^{-1})
    t = []
    for kind, xk, zik, rdk, rck in zip(kinds, x, zinv, rd, rc):
        if kind == PSD:
            t.append(rck - xk @ rdk @ zik)
        else:
            t.append(rck - xk * rdk * zik)
    rhs = rp - p.apply([_sym(tk) if k == PSD else tk for k, tk in zip(kinds, t)])
    dy = _solve_schur(chol, mat, rhs) if chol is not None else np.zeros(0)
    aty = p.adjoint(dy)
    dz = [rdk - ak for rdk, ak in zip(rd, aty)]
    dx = []
    for kind, xk, zik, dzk, rck in zip(kinds, x, zinv, dz, rc):
        if kind == PSD:
            dx.append(_sym(rck - xk @ dzk @ zik))
        else:
            dx.append(rck - xk * dzk * zik)
    if gram_pinv is not None:
        # the Newton solve loses primal feasibility once Z is nearly singular;
        # the least-change correction restores it exactly
        fix = p.adjoint(gram_pinv @ (rp - p.apply(dx)))
        dx = [dxk + fk for dxk, fk in zip(dx, fix)]
    return dx, dy, dz


def solve(p: SdpProblem, tol: float | None = None, max_iter: int = MAX_ITER) -> SdpSolution:
    """Solve ``p`` to relative accuracy ``tol``.

    ``tol`` defaults to :func:`uncertsdp.numerics.sdp_tolerance`. The returned
    status is ``optimal`` when the relative duality gap and both relative
    residuals are below ``tol``; ``infeasible`` when the iterates diverge; and
    ``max_iter`` when the iteration budget is exhausted or progress stalls, in
    which case the best iterate seen is returned.
    """
    tol = sdp_tolerance(tol)
    kinds = [k for k, _ in p.blocks]
    b = np.asarray(p.b, dtype=float)
    m = p.m
    nz = _Nonzero(p)
    order = max(p.order, 1)
    gram_pinv = _gram_pinv(p, nz) if m else None

    if not p.blocks:
        # no cone at all: the dual is max b.y over free y, bounded only when b = 0
        status = "optimal" if not np.any(b) else "infeasible"
        y = np.zeros(m)
        return SdpSolution(0.0, 0.0, 0.0, status, (), y, (), 0)

    tau = 1.0 + float(np.max(np.abs(b), initial=0.0))
    x = [tau * (np.eye(n) if k == PSD else np.ones(n)) for k, n in p.blocks]
    z = [tau * (np.eye(n) if k == PSD else np.ones(n)) for k, n in p.blocks]
    y = np.zeros(m)

    bnorm = 1.0 + float(np.linalg.norm(b))
    cnorm = 1.0 + _norm(p.c)

    best = None
    history = []
    stalls = 0
    status = "max_iter"
    it = 0
    for it in range(max_iter + 1):
        rp = b - p.apply(x)
        aty = p.adjoint(y)
        rd = [ck - ak - zk for ck, ak, zk in zip(p.c, aty, z)]
        pobj = p.objective(x)
        dobj = float(b @ y)
        relgap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        pinf = float(np.linalg.norm(rp)) / bnorm
        dinf = _norm(rd) / cnorm
        err = max(relgap, pinf, dinf)
        history.append((pobj, dobj, relgap, pinf, dinf))
        if best is None or err < best[0]:
            best = (err, it, [v.copy() for v in x], y.copy(), [v.copy() for v in z], pinf, dinf)
        if err <= tol:
            status = "optimal"
            break
        if _norm(x) > DIVERGENCE or _norm(z) > DIVERGENCE:
            status = "infeasible"
            break
        if it == max_iter:
            break

        if not all(np.all(np.isfinite(v)) for v in x + z):
            break
        try:
            zinv = [_sym(sla.cho_solve(sla.cho_factor(zk, lower=True), np.eye(len(zk)))) if kind == PSD
                    else 1.0 / zk for kind, zk in zip(kinds, z)]
        except np.linalg.LinAlgError:
            # Z left the cone through rounding; fall back to the best iterate
            break
        chol = mat = None
        if m:
            mat = _schur(p, nz, x, zinv, z)
            chol, _ = _factor(mat)
            if chol is None:
                break
        mu = _inner(x, z) / order

        # predictor
        rc = [-xk for xk in x]
        dxa, dya, dza = _direction(p, kinds, chol, mat, gram_pinv, x, z, zinv, rp, rd, rc)
        ap = _step(kinds, x, dxa)
        ad = _step(kinds, z, dza)
        xz_aff = _inner([xk + ap * d for xk, d in zip(x, dxa)], [zk + ad * d for zk, d in zip(z, dza)])
        sigma = min(1.0, max(0.0, xz_aff / (mu * order))) ** 3 if mu > 0 else 0.0

        # corrector
        rc = []
        for kind, xk, zik, dxk, dzk in zip(kinds, x, zinv, dxa, dza):
            if kind == PSD:
                rc.append(sigma * mu * zik - xk - dxk @ dzk @ zik)
            else:
                rc.append(sigma * mu * zik - xk - dxk * dzk * zik)
        dx, dy, dz = _direction(p, kinds, chol, mat, gram_pinv, x, z, zinv, rp, rd, rc)
        ap = _step(kinds, x, dx)
        ad = _step(kinds, z, dz)

        x = [xk + ap * d for xk, d in zip(x, dx)]
        y = y + ad * dy
        z = [zk + ad * d for zk, d in zip(z, dz)]
        x = [_sym(v) if k == PSD else v for k, v in zip(kinds, x)]
        z = [_sym(v) if k == PSD else v for k, v in zip(kinds, z)]

        stalls = stalls + 1 if max(ap, ad) < 1e-8 else 0
        if stalls >= 5:
            break

    if status != "optimal":
        # report the best iterate rather than the last one
        _, it_best, x, y, z, pinf, dinf = best
    pobj = p.objective(x)
    dobj = float(b @ y)
    return SdpSolution(
        primal_value=pobj,
        dual_value=dobj,
        gap=abs(pobj - dobj),
        status=status,
        primal_blocks=tuple(x),
        dual_multipliers=y,
        slack_blocks=tuple(z),
        iterations=it,
        primal_residual=pinf,
        dual_residual=dinf,
        history=tuple(history),
    )
