"""Affine matrix expressions and a linear-matrix-inequality model.

A :class:`Model` owns real decision variables. Hermitian matrix variables are
parametrized by their coordinates in an orthonormal Hermitian basis, so every
expression is ``F0 + sum_j w_j F_j`` with complex Hermitian ``F_j`` and real
``w_j``. Constraints ``F(w) >= 0`` are compiled to the dual side of an
:class:`~uncertsdp.sdp.solver.SdpProblem`; linear equalities are eliminated
beforehand through a null-space parametrization.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg as sla

from ..numerics import hermitian_basis, partial_trace, partial_transpose, to_coords
from .solver import NONNEG, PSD, SdpProblem, SdpSolution, embed_hermitian, solve

__all__ = ["Affine", "Model", "ModelResult", "SolverFailure", "kron_batch"]


class SolverFailure(RuntimeError):
    """The solver did not certify optimality; carries the offending status."""

    def __init__(self, status: str, message: str = "", solution=None):
        super().__init__(message or f"SDP solver returned status {status!r}")
        self.status = status
        self.solution = solution


def kron_batch(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product broadcasting over leading axes of either factor."""
    a = np.asarray(a)
    b = np.asarray(b)
    out = np.einsum("...ij,...kl->...ikjl", a, b)
    sh = out.shape
    return out.reshape(sh[:-4] + (sh[-4] * sh[-3], sh[-2] * sh[-1]))


class Affine:
    """``const + sum_v coef[v] . w[v]`` with ``coef[v]`` of shape ``(k_v, r, c)``."""

    __slots__ = ("model", "const", "terms")
    __array_priority__ = 100

    def __init__(self, model: "Model", const: np.ndarray, terms: dict):
        self.model = model
        self.const = np.asarray(const, dtype=complex)
        self.terms = terms

    # construction helpers
    @property
    def shape(self) -> tuple:
        return self.const.shape

    def _lift(self, other) -> "Affine":
        if isinstance(other, Affine):
            return other
        arr = np.asarray(other, dtype=complex)
        if arr.ndim == 0:
            arr = arr * np.eye(self.shape[0]) if self.shape != (1, 1) else arr.reshape(1, 1)
        return Affine(self.model, arr, {})

    def __add__(self, other):
        other = self._lift(other)
        if other.shape != self.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")
        terms = dict(self.terms)
        for k, v in other.terms.items():
            terms[k] = terms[k] + v if k in terms else v
        return Affine(self.model, self.const + other.const, terms)

    __radd__ = __add__

    def __neg__(self):
        return Affine(self.model, -self.const, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) + (-self)

    def __mul__(self, s):
        if isinstance(s, Affine) or np.ndim(s) != 0:
            raise TypeError("Affine expressions only scale by numbers")
        return Affine(self.model, self.const * s, {k: v * s for k, v in self.terms.items()})

    __rmul__ = __mul__

    def __truediv__(self, s):
        return self * (1.0 / s)

    def apply(self, f: Callable[[np.ndarray], np.ndarray]) -> "Affine":
        """Image under a linear map ``f`` that broadcasts over leading axes."""
        return Affine(self.model, f(self.const), {k: f(v) for k, v in self.terms.items()})

    def trace(self) -> "Affine":
        return self.apply(lambda m: np.trace(m, axis1=-2, axis2=-1)[..., None, None])

    def inner(self, h: np.ndarray) -> "Affine":
        """Scalar ``Re Tr(h . self)`` for a constant Hermitian ``h``."""
        h = np.asarray(h)
        return self.apply(lambda m: np.real(np.einsum("ij,...ji->...", h, m))[..., None, None].astype(complex))

    def ptrace(self, dims, keep) -> "Affine":
        return self.apply(lambda m: partial_trace(m, dims, keep))

    def ptranspose(self, dims, which) -> "Affine":
        return self.apply(lambda m: partial_transpose(m, dims, which))

    def kron_left(self, a: np.ndarray) -> "Affine":
        """``a ⊗ self``."""
        return self.apply(lambda m: kron_batch(a, m))

    def kron_right(self, a: np.ndarray) -> "Affine":
        """``self ⊗ a``."""
        return self.apply(lambda m: kron_batch(m, a))

    def sandwich(self, left: np.ndarray, right: np.ndarray | None = None) -> "Affine":
        """``left . self . right`` (``right`` defaults to ``left^dagger``)."""
        left = np.asarray(left)
        right = np.conj(left.T) if right is None else np.asarray(right)
        return self.apply(lambda m: left @ m @ right)

    def times_identity(self, n: int) -> "Affine":
        """For a scalar expression ``s``, the matrix expression ``s . I_n``."""
        if self.shape != (1, 1):
            raise ValueError("times_identity needs a scalar expression")
        return self.kron_right(np.eye(n))

    def evaluate(self, w: np.ndarray) -> np.ndarray:
        out = self.const.copy()
        for k, v in self.terms.items():
            sl = self.model._slices[k]
            out = out + np.tensordot(w[sl], v, axes=(0, 0))
        return out


def sum_affine(items) -> Affine:
    items = list(items)
    out = items[0]
    for it in items[1:]:
        out = out + it
    return out


@dataclass(frozen=True)
class ModelResult:
    """Outcome of :meth:`Model.solve`.

    ``value`` is the objective at the returned variables (the side on which the
    model's own constraints hold); ``bound`` is the value certified by the
    conic dual, and ``gap`` is their distance.
    """

    value: float
    bound: float
    gap: float
    status: str
    iterations: int
    w: np.ndarray
    lmi_min_eig: float
    equality_residual: float
    solution: SdpSolution
    problem: SdpProblem

    def __getitem__(self, expr: Affine) -> np.ndarray:
        return expr.evaluate(self.w)


class Model:
    """Container for variables, constraints and an objective."""

    def __init__(self, name: str = ""):
        self.name = name
        self._sizes: list[int] = []
        self._slices: list[slice] = []
        self._nvar = 0
        self._lmis: list[tuple[str, Affine]] = []
        self._eqs: list[tuple[Affine, np.ndarray]] = []
        self._objective: Affine | None = None
        self._sense = 1.0

    # variables
    def _new_block(self, coef: np.ndarray) -> int:
        k = coef.shape[0]
        idx = len(self._sizes)
        self._sizes.append(k)
        self._slices.append(slice(self._nvar, self._nvar + k))
        self._nvar += k
        return idx

    def hermitian(self, n: int, psd: bool = False) -> Affine:
        """A free ``n x n`` Hermitian matrix variable (optionally constrained PSD)."""
        basis = hermitian_basis(n)
        idx = self._new_block(basis)
        x = Affine(self, np.zeros((n, n)), {idx: basis})
        if psd:
            self.psd(x)
        return x

    def real(self, nonneg: bool = False) -> Affine:
        """A real scalar variable, returned as a ``1 x 1`` expression."""
        coef = np.ones((1, 1, 1), dtype=complex)
        idx = self._new_block(coef)
        x = Affine(self, np.zeros((1, 1)), {idx: coef})
        if nonneg:
            self.psd(x)
        return x

    def constant(self, m) -> Affine:
        return Affine(self, np.atleast_2d(np.asarray(m, dtype=complex)), {})

    # constraints
    def psd(self, expr: Affine, name: str = "") -> None:
        if expr.shape[0] != expr.shape[1]:
            raise ValueError(f"PSD constraint needs a square expression, got {expr.shape}")
        self._lmis.append((name, expr))

    def le(self, lhs, rhs, name: str = "") -> None:
        """``lhs <= rhs`` in the Loewner order."""
        if isinstance(rhs, Affine):
            self.psd(rhs - lhs, name)
        else:
            self.psd(-(lhs - rhs), name)

    def eq(self, expr: Affine, value=0.0) -> None:
        """``expr == value`` entrywise (both Hermitian)."""
        value = np.asarray(value, dtype=complex)
        if value.ndim == 0:
            value = value * np.eye(expr.shape[0])
        self._eqs.append((expr, value))

    def minimize(self, expr: Affine) -> None:
        self._set_objective(expr, 1.0)

    def maximize(self, expr: Affine) -> None:
        self._set_objective(expr, -1.0)

    def _set_objective(self, expr, sense):
        if expr.shape != (1, 1):
            raise ValueError("objective must be a scalar expression")
        self._objective = expr
        self._sense = sense

    # compilation
    def _dense(self, expr: Affine) -> np.ndarray:
        r, c = expr.shape
        out = np.zeros((self._nvar, r, c), dtype=complex)
        for k, v in expr.terms.items():
            out[self._slices[k]] += v
        return out

    def _eliminate(self):
        rows, rhs = [], []
        for expr, value in self._eqs:
            rows.append(to_coords(self._dense(expr)).T)
            rhs.append(to_coords(value - expr.const))
        if not rows:
            return np.zeros(self._nvar), np.eye(self._nvar), 0.0
        g = np.vstack(rows)
        h = np.concatenate(rhs)
        # Solve for a pivoted set of basic variables in terms of the rest. Unlike
        # an orthonormal null-space basis this keeps the parametrization sparse,
        # which keeps most constraint functionals zero on most blocks.
        _, r, piv = sla.qr(g, mode="economic", pivoting=True)
        diag = np.abs(np.diagonal(r))
        rank = int(np.sum(diag > 1e-10 * max(1.0, diag[0] if diag.size else 0.0)))
        basic, free = np.sort(piv[:rank]), np.sort(piv[rank:])
        gb = g[:, basic]
        w0 = np.zeros(self._nvar)
        w0[basic] = np.linalg.lstsq(gb, h, rcond=None)[0]
        res = float(np.linalg.norm(g @ w0 - h))
        if res > 1e-9 * (1.0 + np.linalg.norm(h)):
            raise ValueError(f"inconsistent equality constraints (residual {res:.3e})")
        null = np.zeros((self._nvar, free.size))
        null[free, np.arange(free.size)] = 1.0
        if free.size:
            null[basic] = -np.linalg.lstsq(gb, g[:, free], rcond=None)[0]
        null[np.abs(null) < 1e-14] = 0.0
        w0[np.abs(w0) < 1e-15] = 0.0
        return w0, null, res

    def compile(self):
        if self._objective is None:
            raise ValueError("no objective set")
        w0, null, eq_res = self._eliminate()
        t = null.shape[1]
        blocks, cs, as_ = [], [], []
        lp_c, lp_a = [], []
        for _, expr in self._lmis:
            coef = self._dense(expr)
            f0 = expr.const + np.tensordot(w0, coef, axes=(0, 0))
            ft = np.tensordot(null, coef, axes=(0, 0))  # (t, n, n)
            n = f0.shape[0]
            if not np.any(ft):
                if np.linalg.eigvalsh(0.5 * (f0 + f0.conj().T))[0] < -1e-12:
                    raise ValueError("constant matrix inequality is violated")
                continue
            offdiag = ~np.eye(n, dtype=bool)
            if n == 1 or (not np.any(f0[offdiag]) and not np.any(ft[:, offdiag])):
                lp_c.append(np.real(np.diagonal(f0)))
                lp_a.append(-np.real(np.diagonal(ft, axis1=1, axis2=2)))
                continue
            if not np.any(np.imag(f0)) and not np.any(np.imag(ft)):
                c_blk, a_blk = np.real(f0), -np.real(ft)
            else:
                c_blk, a_blk = embed_hermitian(f0), -embed_hermitian(ft)
            c_blk = 0.5 * (c_blk + c_blk.T)
            a_blk = 0.5 * (a_blk + np.swapaxes(a_blk, 1, 2))
            blocks.append((PSD, c_blk.shape[0]))
            cs.append(c_blk)
            as_.append(a_blk)
        if lp_c:
            blocks.append((NONNEG, sum(len(v) for v in lp_c)))
            cs.append(np.concatenate(lp_c))
            as_.append(np.concatenate(lp_a, axis=1) if t else np.zeros((0, sum(len(v) for v in lp_c))))
        obj = np.real(self._dense(self._objective)[:, 0, 0])
        b = -self._sense * (null.T @ obj)
        offset = float(obj @ w0 + np.real(self._objective.const[0, 0]))
        prob = SdpProblem(blocks=tuple(blocks), c=tuple(cs), a=tuple(as_), b=b)
        return prob, w0, null, offset, eq_res

    def solve(self, tol: float | None = None, strict: bool = True) -> ModelResult:
        """Compile and solve; raise :class:`SolverFailure` unless optimal (when ``strict``)."""
        prob, w0, null, offset, eq_res = self.compile()
        sol = solve(prob, tol=tol)
        w = w0 + null @ sol.dual_multipliers
        # the dual side is the model side: Z = C - A^T y are the LMIs
        value = offset - self._sense * sol.dual_value
        bound = offset - self._sense * sol.primal_value
        lmi_min = np.inf
        for _, expr in self._lmis:
            m = expr.evaluate(w)
            lmi_min = min(lmi_min, float(np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0]))
        res = ModelResult(
            value=float(value),
            bound=float(bound),
            gap=float(abs(value - bound)),
            status=sol.status,
            iterations=sol.iterations,
            w=w,
            lmi_min_eig=float(lmi_min),
            equality_residual=eq_res,
            solution=sol,
            problem=prob,
        )
        if strict and sol.status != "optimal":
            raise SolverFailure(sol.status, f"{self.name or 'SDP'}: solver status {sol.status!r} "
                                f"after {sol.iterations} iterations (gap {res.gap:.2e})", res)
        return res
