"""Dense complex linear algebra shared by every other module.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128`` (or real
where it does not matter). Composite spaces are always ordered explicitly at
the call site via a ``dims`` sequence; factor 0 is the most significant index
(row-major, like :func:`numpy.kron`).
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "Tolerances",
    "TOL",
    "sdp_tolerance",
    "kron",
    "partial_trace",
    "partial_transpose",
    "hermitian_eig",
    "schatten_norm",
    "is_hermitian",
    "dagger",
    "ket",
    "proj",
    "psd_sqrt",
    "hermitian_basis",
    "to_coords",
    "from_coords",
]


@dataclass(frozen=True)
class Tolerances:
    """Project-wide numerical tolerances.

    Every acceptance threshold downstream is expressed through these fields so
    that a single record documents them.
    """

    hermitian: float = 1e-12
    hermitian_input: float = 1e-10
    psd: float = 1e-10
    trace: float = 1e-10
    isometry: float = 1e-10
    sdp: float = 1e-8
    duality: float = 1e-6
    measure_range: float = 1e-7
    bound_slack: float = 1e-6
    document: float = 1e-8


TOL = Tolerances()


def sdp_tolerance(tol: float | None = None) -> float:
    """Resolve the SDP stopping tolerance.

    An explicit value wins; otherwise ``UNCERT_SDP_TOL`` from the environment,
    otherwise ``TOL.sdp``.
    """
    if tol is not None:
        return float(tol)
    env = os.environ.get("UNCERT_SDP_TOL")
    if env:
        return float(env)
    return TOL.sdp


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def ket(d: int, i: int) -> np.ndarray:
    v = np.zeros(d, dtype=complex)
    v[i] = 1.0
    return v


def proj(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    return np.outer(v, v.conj())


def is_hermitian(m: np.ndarray, tol: float = TOL.hermitian) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and bool(np.max(np.abs(m - dagger(m)), initial=0.0) <= tol)


def kron(a: np.ndarray, *rest: np.ndarray) -> np.ndarray:
    """Kronecker product, ``(a⊗b)[i*rb+k, j*cb+l] = a[i,j] b[k,l]``, left to right for more factors."""
    out = np.asarray(a)
    for b in rest:
        out = np.kron(out, np.asarray(b))
    return out


def _check_dims(m: np.ndarray, dims: Sequence[int]) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if m.ndim < 2 or m.shape[-1] != m.shape[-2]:
        raise ValueError(f"expected square matrix, got shape {m.shape}")
    if int(np.prod(dims)) != m.shape[-1]:
        raise ValueError(f"dims {dims} do not multiply to matrix dimension {m.shape[-1]}")
    return dims


def partial_trace(m: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Trace out every factor not listed in ``keep``.

    Leading batch axes are allowed. ``keep`` is a set of factor indices; the
    kept factors retain their original relative order.
    """
    m = np.asarray(m)
    dims = _check_dims(m, dims)
    n = len(dims)
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= n for k in keep):
        raise ValueError(f"keep indices {keep} out of range for {n} factors")
    batch = m.shape[:-2]
    t = m.reshape(batch + dims + dims)
    nb = len(batch)
    letters = "abcdefghijklmnopqrstuvwxyz"
    bl = "".join(chr(ord("A") + i) for i in range(nb))
    row = [letters[i] for i in range(n)]
    col = [letters[n + i] if i in keep else letters[i] for i in range(n)]
    out_row = "".join(row[i] for i in keep)
    out_col = "".join(col[i] for i in keep)
    expr = f"{bl}{''.join(row)}{''.join(col)}->{bl}{out_row}{out_col}"
    out = np.einsum(expr, t)
    dk = int(np.prod([dims[i] for i in keep])) if keep else 1
    return out.reshape(batch + (dk, dk))


def partial_transpose(m: np.ndarray, dims: Sequence[int], which: Sequence[int]) -> np.ndarray:
    """Transpose the factors listed in ``which``; leave the others alone."""
    m = np.asarray(m)
    dims = _check_dims(m, dims)
    n = len(dims)
    which = set(int(k) for k in which)
    if any(k < 0 or k >= n for k in which):
        raise ValueError(f"factor indices {sorted(which)} out of range for {n} factors")
    batch = m.shape[:-2]
    nb = len(batch)
    t = m.reshape(batch + dims + dims)
    axes = list(range(nb))
    rows = [nb + (n + i if i in which else i) for i in range(n)]
    cols = [nb + (i if i in which else n + i) for i in range(n)]
    return np.transpose(t, axes + rows + cols).reshape(m.shape)


def hermitian_eig(m: np.ndarray, tol: float = TOL.hermitian_input) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.

    Raises
    ------
    ValueError
        If ``m`` deviates from Hermiticity by more than ``tol`` entrywise.
    """
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected square matrix, got shape {m.shape}")
    dev = float(np.max(np.abs(m - dagger(m)), initial=0.0))
    if dev > tol:
        raise ValueError(f"matrix is not Hermitian (max |M - M^dag| = {dev:.3e})")
    w, v = np.linalg.eigh(0.5 * (m + dagger(m)))
    return w, v


def schatten_norm(m: np.ndarray, kind: str = "trace") -> float:
    """Trace norm (``kind='trace'``) or operator norm (``kind='operator'``)."""
    s = np.linalg.svd(np.asarray(m), compute_uv=False)
    if kind == "trace":
        return float(np.sum(s))
    if kind == "operator":
        return float(np.max(s, initial=0.0))
    raise ValueError(f"unknown norm kind {kind!r}")


def psd_sqrt(m: np.ndarray, clip: float = TOL.psd) -> np.ndarray:
    """Square root of a PSD matrix; eigenvalues in ``[-clip, 0)`` are set to 0."""
    w, v = hermitian_eig(m)
    if w.size and w[0] < -clip:
        raise ValueError(f"matrix is not PSD (min eigenvalue {w[0]:.3e})")
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ dagger(v)


def hermitian_basis(n: int) -> np.ndarray:
    """Orthonormal (Hilbert-Schmidt) basis of the ``n*n`` real space of Hermitian matrices.

    Order: diagonal units, then ``(E_kl + E_lk)/√2`` and ``i(E_kl - E_lk)/√2``
    for ``k < l`` in row-major order.
    """
    basis = np.zeros((n * n, n, n), dtype=complex)
    idx = 0
    for k in range(n):
        basis[idx, k, k] = 1.0
        idx += 1
    r = 1.0 / np.sqrt(2.0)
    for k in range(n):
        for l in range(k + 1, n):
            basis[idx, k, l] = r
            basis[idx, l, k] = r
            idx += 1
            basis[idx, k, l] = 1j * r
            basis[idx, l, k] = -1j * r
            idx += 1
    return basis


def to_coords(h: np.ndarray) -> np.ndarray:
    """Real coordinates of (a batch of) Hermitian matrices in :func:`hermitian_basis`."""
    h = np.asarray(h)
    n = h.shape[-1]
    iu = np.triu_indices(n, 1)
    diag = np.real(np.diagonal(h, axis1=-2, axis2=-1))
    up = h[..., iu[0], iu[1]]
    r2 = np.sqrt(2.0)
    off = np.empty(h.shape[:-2] + (2 * up.shape[-1],))
    # Tr(B h) for B=(E_kl+E_lk)/√2 is √2 Re h_kl; for i(E_kl-E_lk)/√2 it is √2 Im h_kl
    off[..., 0::2] = r2 * np.real(up)
    off[..., 1::2] = r2 * np.imag(up)
    return np.concatenate([diag, off], axis=-1)


def from_coords(c: np.ndarray, n: int) -> np.ndarray:
    """Inverse of :func:`to_coords`."""
    c = np.asarray(c, dtype=float)
    batch = c.shape[:-1]
    h = np.zeros(batch + (n, n), dtype=complex)
    idx = np.arange(n)
    h[..., idx, idx] = c[..., :n]
    iu = np.triu_indices(n, 1)
    r = 1.0 / np.sqrt(2.0)
    vals = (c[..., n::2] + 1j * c[..., n + 1::2]) * r
    h[..., iu[0], iu[1]] = vals
    h[..., iu[1], iu[0]] = np.conj(vals)
    return h
