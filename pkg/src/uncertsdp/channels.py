"""Channels, instruments, measurements and preparations as Choi operators.

Conventions
-----------
The Choi operator of a channel ``E: A -> B`` lives on ``B ⊗ A`` (output factor
first)::

    C(E) = sum_ij E(|i><j|) ⊗ |i><j|,     Tr_B C(E) = 1_A,
    E(rho) = Tr_A[C(E) (1_B ⊗ rho^T)].

A Kraus operator ``K`` contributes the rank-one term ``|K>><<K|`` with
``|K>>[(b, a)] = K[b, a]``. An instrument with outcomes ``y`` has one such block
``C_y`` per outcome; as a single channel its Choi operator is block diagonal
with the classical register outermost, i.e. on ``Y ⊗ B ⊗ A``. A pure
measurement is an instrument with a one-dimensional quantum output, and its
blocks are the transposed POVM elements. Classical inputs (preparations) are
modelled as a quantum input that is dephased in the standard basis.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as sla

from .numerics import TOL, dagger, hermitian_eig, partial_trace, proj

__all__ = [
    "Basis",
    "ChoiOperator",
    "Instrument",
    "Isometry",
    "DecompositionError",
    "conjugate_basis",
    "computational_basis",
    "ideal_measurement",
    "ideal_preparation",
    "pinching",
    "identity_channel",
    "trace_channel",
    "unitary_channel",
    "choi_from_kraus",
    "kraus_from_choi",
    "link",
    "apply_choi",
    "compose",
    "compose_conditional",
    "postprocess",
    "marginalize",
    "stinespring",
    "mz_apparatus",
    "mz_kraus",
    "decompose_joint",
    "random_unitary",
    "random_basis",
    "random_instrument",
    "random_channel",
]


class DecompositionError(ValueError):
    """A joint measurement could not be split into a sequential one within tolerance."""


# ---------------------------------------------------------------------------
# value types


@dataclass(frozen=True)
class Basis:
    """Orthonormal basis; ``vectors[k]`` is the k-th basis vector."""

    vectors: np.ndarray
    label: str = ""

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=complex)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError(f"basis needs d vectors of length d, got shape {v.shape}")
        gram = v.conj() @ v.T
        err = float(np.max(np.abs(gram - np.eye(len(v)))))
        if err > 1e-10:
            raise ValueError(f"basis vectors are not orthonormal (Gram error {err:.2e})")
        object.__setattr__(self, "vectors", v)

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    def projector(self, k: int) -> np.ndarray:
        return proj(self.vectors[k])

    def projectors(self) -> np.ndarray:
        return np.einsum("ki,kj->kij", self.vectors, self.vectors.conj())

    def unitary(self) -> np.ndarray:
        """Matrix with the basis vectors as columns."""
        return self.vectors.T.copy()


def _check_choi(matrix: np.ndarray, dim_in: int, dim_out: int, what: str) -> None:
    if matrix.shape != (dim_in * dim_out, dim_in * dim_out):
        raise ValueError(f"{what}: matrix shape {matrix.shape} does not match dims ({dim_out}x{dim_in})")
    w, _ = hermitian_eig(matrix)
    if w[0] < -TOL.psd:
        raise ValueError(f"{what}: Choi matrix is not PSD (min eigenvalue {w[0]:.3e})")


@dataclass(frozen=True)
class ChoiOperator:
    dim_in: int
    dim_out: int
    matrix: np.ndarray
    validate: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", m)
        if self.validate:
            _check_choi(m, self.dim_in, self.dim_out, "ChoiOperator")
            marg = partial_trace(m, (self.dim_out, self.dim_in), [1])
            err = float(np.max(np.abs(marg - np.eye(self.dim_in))))
            if err > TOL.trace:
                raise ValueError(f"ChoiOperator is not trace preserving (error {err:.3e})")

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        return apply_choi(self.matrix, rho, self.dim_in, self.dim_out)

    def kraus(self) -> np.ndarray:
        return kraus_from_choi(self.matrix, self.dim_in, self.dim_out)


@dataclass(frozen=True)
class Instrument:
    """Instrument with quantum input ``A``, quantum output ``B`` and classical outcomes."""

    dim_in: int
    dim_out: int
    blocks: np.ndarray
    outcomes: tuple = ()
    validate: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        b = np.asarray(self.blocks, dtype=complex)
        if b.ndim != 3:
            raise ValueError(f"instrument blocks must be a stack of matrices, got shape {b.shape}")
        object.__setattr__(self, "blocks", b)
        if not self.outcomes:
            object.__setattr__(self, "outcomes", tuple(range(b.shape[0])))
        if len(self.outcomes) != b.shape[0]:
            raise ValueError("one outcome label per block required")
        if self.validate:
            for blk in b:
                _check_choi(blk, self.dim_in, self.dim_out, "Instrument block")
            total = partial_trace(b.sum(axis=0), (self.dim_out, self.dim_in), [1])
            err = float(np.max(np.abs(total - np.eye(self.dim_in))))
            if err > TOL.trace:
                raise ValueError(f"Instrument is not trace preserving (error {err:.3e})")

    @property
    def n_outcomes(self) -> int:
        return self.blocks.shape[0]

    def povm(self) -> np.ndarray:
        """POVM elements ``Λ_y`` (Heisenberg image of the identity)."""
        marg = partial_trace(self.blocks, (self.dim_out, self.dim_in), [1])
        return np.swapaxes(marg, -1, -2)

    def probabilities(self, rho: np.ndarray) -> np.ndarray:
        return np.real(np.einsum("yij,ji->y", self.povm(), rho))

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        """Unnormalized post-measurement states, one per outcome."""
        return np.stack([apply_choi(c, rho, self.dim_in, self.dim_out) for c in self.blocks])

    def as_channel(self) -> ChoiOperator:
        """The channel ``A -> Y ⊗ B`` with the outcome written to a classical register."""
        return ChoiOperator(self.dim_in, self.n_outcomes * self.dim_out, sla.block_diag(*self.blocks), validate=False)

    def kraus(self) -> list:
        return [kraus_from_choi(c, self.dim_in, self.dim_out) for c in self.blocks]


@dataclass(frozen=True)
class Isometry:
    """``matrix`` maps ``dim_in`` into the ordered product ``dims``."""

    matrix: np.ndarray
    dims: tuple

    def __post_init__(self):
        v = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", v)
        if v.shape[0] != int(np.prod(self.dims)):
            raise ValueError("isometry rows do not match dilation dims")
        err = float(np.max(np.abs(dagger(v) @ v - np.eye(v.shape[1])), initial=0.0))
        if err > TOL.isometry:
            raise ValueError(f"matrix is not an isometry (error {err:.3e})")

    @property
    def dim_in(self) -> int:
        return self.matrix.shape[1]


# ---------------------------------------------------------------------------
# Kraus / Choi plumbing


def choi_from_kraus(kraus: Sequence[np.ndarray] | np.ndarray) -> np.ndarray:
    k = np.asarray(kraus, dtype=complex)
    if k.ndim == 2:
        k = k[None]
    vecs = k.reshape(k.shape[0], -1)
    return vecs.T @ vecs.conj()


def kraus_from_choi(c: np.ndarray, dim_in: int, dim_out: int, clip: float = TOL.psd) -> np.ndarray:
    """Kraus operators from the eigendecomposition of a Choi matrix.

    Eigenvalues in ``[-clip, 0]`` are treated as zero; anything more negative
    is an error. Returned with shape ``(r, dim_out, dim_in)``, one per nonzero
    eigenvalue, in descending eigenvalue order.
    """
    w, v = hermitian_eig(c)
    if w[0] < -clip:
        raise ValueError(f"Choi matrix is not PSD (min eigenvalue {w[0]:.3e})")
    keep = w > clip
    w, v = w[keep][::-1], v[:, keep][:, ::-1]
    if w.size == 0:
        return np.zeros((1, dim_out, dim_in), dtype=complex)
    k = (v * np.sqrt(w)).T
    return k.reshape(-1, dim_out, dim_in)


def apply_choi(c: np.ndarray, rho: np.ndarray, dim_in: int, dim_out: int) -> np.ndarray:
    """Schrödinger action ``Tr_A[C (1 ⊗ rho^T)]``."""
    t = np.asarray(c).reshape(dim_out, dim_in, dim_out, dim_in)
    return np.einsum("iajb,ab->ij", t, np.asarray(rho))


def link(first: np.ndarray, second: np.ndarray, dims: tuple[int, int, int]) -> np.ndarray:
    """Choi operator of ``second ∘ first``.

    ``dims = (a, b, c)``: ``first`` is on ``B ⊗ A`` and ``second`` on ``C ⊗ B``;
    the result is on ``C ⊗ A``. Leading batch axes broadcast.
    """
    a, b, c = dims
    f = np.asarray(first)
    s = np.asarray(second)
    f = f.reshape(f.shape[:-2] + (b, a, b, a))
    s = s.reshape(s.shape[:-2] + (c, b, c, b))
    out = np.einsum("...iajb,...kilj->...kalb", f, s)
    return out.reshape(out.shape[:-4] + (c * a, c * a))


# ---------------------------------------------------------------------------
# canonical constructions


def computational_basis(d: int) -> Basis:
    return Basis(np.eye(d, dtype=complex), label=f"Z{d}")


def conjugate_basis(d: int) -> tuple[Basis, Basis]:
    """Computational basis and its Fourier-conjugate basis, as ``(theta, phi)``."""
    if d < 2:
        raise ValueError("conjugate bases need d >= 2")
    idx = np.arange(d)
    phi = np.exp(2j * np.pi * np.outer(idx, idx) / d) / np.sqrt(d)
    return computational_basis(d), Basis(phi, label=f"X{d}")


def ideal_measurement(b: Basis, as_instrument: bool = False) -> Instrument:
    """Projective measurement in ``b``; optionally repreparing the observed vector."""
    p = b.projectors()
    if as_instrument:
        blocks = np.stack([np.kron(q, q.T) for q in p])
        return Instrument(b.dim, b.dim, blocks)
    return Instrument(b.dim, 1, np.swapaxes(p, -1, -2).copy())


def ideal_preparation(b: Basis) -> ChoiOperator:
    """Classical label ``z`` (as a dephased input of dimension d) to ``|b_z><b_z|``."""
    d = b.dim
    m = sum(np.kron(b.projector(z), proj(np.eye(d)[z])) for z in range(d))
    return ChoiOperator(d, d, m)


def pinching(b: Basis) -> ChoiOperator:
    """Measure in ``b`` and forget the result."""
    m = sum(np.kron(q, q.T) for q in b.projectors())
    return ChoiOperator(b.dim, b.dim, m)


def identity_channel(d: int) -> ChoiOperator:
    omega = np.eye(d, dtype=complex).reshape(-1)
    return ChoiOperator(d, d, np.outer(omega, omega))


def trace_channel(d: int) -> ChoiOperator:
    return ChoiOperator(d, 1, np.eye(d, dtype=complex))


def unitary_channel(u: np.ndarray) -> ChoiOperator:
    u = np.asarray(u, dtype=complex)
    return ChoiOperator(u.shape[1], u.shape[0], choi_from_kraus(u))


# ---------------------------------------------------------------------------
# composition


def _as_instrument(e) -> tuple[Instrument, bool]:
    if isinstance(e, Instrument):
        return e, True
    if isinstance(e, ChoiOperator):
        return Instrument(e.dim_in, e.dim_out, e.matrix[None], validate=False), False
    raise TypeError(f"expected ChoiOperator or Instrument, got {type(e).__name__}")


def compose(first, second):
    """``second ∘ first`` (apply ``first``, then feed its quantum output to ``second``).

    Channels compose to a channel. If either argument is an instrument the
    result is an instrument; when both are, the outcome alphabet is the product
    with ``first``'s outcome as the slow index.
    """
    f, f_inst = _as_instrument(first)
    s, s_inst = _as_instrument(second)
    if f.dim_out != s.dim_in:
        raise ValueError(f"cannot compose: output dim {f.dim_out} != input dim {s.dim_in}")
    dims = (f.dim_in, f.dim_out, s.dim_out)
    blocks = link(f.blocks[:, None], s.blocks[None, :], dims).reshape(-1, s.dim_out * f.dim_in, s.dim_out * f.dim_in)
    if not f_inst and not s_inst:
        return ChoiOperator(f.dim_in, s.dim_out, blocks[0])
    if f_inst and s_inst:
        labels = tuple((x, z) for x in f.outcomes for z in s.outcomes)
    elif f_inst:
        labels = f.outcomes
    else:
        labels = s.outcomes
    return Instrument(f.dim_in, s.dim_out, blocks, labels)


def compose_conditional(first: Instrument, seconds: Sequence) -> Instrument:
    """Run ``first`` and then, on its ``i``-th outcome, the instrument ``seconds[i]``."""
    if len(seconds) != first.n_outcomes:
        raise ValueError("need one follow-up instrument per outcome")
    blocks, labels = [], []
    for i, (x, cx) in enumerate(zip(first.outcomes, first.blocks)):
        s, _ = _as_instrument(seconds[i])
        if s.dim_in != first.dim_out:
            raise ValueError("follow-up input dimension does not match the first output")
        dims = (first.dim_in, first.dim_out, s.dim_out)
        for z, cz in zip(s.outcomes, s.blocks):
            blocks.append(link(cx, cz, dims))
            labels.append((x, z))
    outs = {b.shape for b in blocks}
    if len(outs) != 1:
        raise ValueError("follow-up instruments must share an output dimension")
    dout = blocks[0].shape[0] // first.dim_in
    return Instrument(first.dim_in, dout, np.stack(blocks), tuple(labels))


def postprocess(e: Instrument, stochastic: np.ndarray, outcomes: Sequence | None = None) -> Instrument:
    """Relabel outcomes through a column-stochastic matrix ``R[x, y] = p(x|y)``."""
    r = np.asarray(stochastic, dtype=float)
    if r.shape[1] != e.n_outcomes:
        raise ValueError("stochastic matrix columns must match the outcome count")
    if np.any(r < -1e-12) or np.max(np.abs(r.sum(axis=0) - 1.0)) > 1e-10:
        raise ValueError("postprocessing matrix must be column stochastic")
    blocks = np.einsum("xy,yij->xij", r, e.blocks)
    return Instrument(e.dim_in, e.dim_out, blocks, tuple(outcomes) if outcomes else ())


def marginalize(e: Instrument, drop: str):
    """Discard the quantum output, the classical output, or both."""
    if drop == "quantum":
        blocks = partial_trace(e.blocks, (e.dim_out, e.dim_in), [1])
        return Instrument(e.dim_in, 1, blocks, e.outcomes)
    if drop == "classical":
        return ChoiOperator(e.dim_in, e.dim_out, e.blocks.sum(axis=0))
    if drop == "both":
        return trace_channel(e.dim_in)
    raise ValueError(f"drop must be 'quantum', 'classical' or 'both', got {drop!r}")


# ---------------------------------------------------------------------------
# dilations


def stinespring(e, env_dim: int | None = None) -> tuple[Isometry, ChoiOperator]:
    """Minimal (or padded) Stinespring isometry and the complementary channel.

    The isometry maps ``A`` into ``B ⊗ E``. ``env_dim`` pads the environment
    with unused dimensions; it must be at least the Choi rank. Instruments are
    dilated as channels into ``Y ⊗ B``.
    """
    if isinstance(e, Instrument):
        e = e.as_channel()
    k = kraus_from_choi(e.matrix, e.dim_in, e.dim_out)
    r = k.shape[0]
    if env_dim is not None:
        if env_dim < r:
            raise ValueError(f"environment dimension {env_dim} below Choi rank {r}")
        k = np.concatenate([k, np.zeros((env_dim - r,) + k.shape[1:], dtype=complex)])
        r = env_dim
    v = np.einsum("kba->bka", k).reshape(e.dim_out * r, e.dim_in)
    # complement Kraus: F_b[k, a] = K_k[b, a]
    f = np.einsum("kba->bka", k)
    comp = ChoiOperator(e.dim_in, r, choi_from_kraus(f))
    return Isometry(v, (e.dim_out, r)), comp


def mz_kraus(theta: float) -> np.ndarray:
    """Kraus operators of the two-outcome interferometer instrument, in the X basis."""
    _, phi = conjugate_basis(2)
    p0, p1 = phi.projector(0), phi.projector(1)
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.stack([c * p0 + s * p1, s * p0 + c * p1])


def mz_apparatus(theta: float) -> Instrument:
    """Qubit instrument interpolating between an ideal X measurement (0) and no measurement (π/2)."""
    k = mz_kraus(theta)
    return Instrument(2, 2, np.stack([choi_from_kraus(kk) for kk in k]))


def _split_joint(e: Instrument, nx: int, nz: int) -> np.ndarray:
    if e.dim_out != 1:
        raise ValueError("decompose_joint expects a measurement (one-dimensional quantum output)")
    if e.n_outcomes != nx * nz:
        raise ValueError(f"{e.n_outcomes} outcomes do not factor as {nx} x {nz}")
    return e.povm().reshape(nx, nz, e.dim_in, e.dim_in)


def decompose_joint(e: Instrument, nx: int, nz: int, tol: float = 1e-8) -> tuple[Instrument, list]:
    """Split a joint measurement of ``(x, z)`` into an X instrument and conditional Z measurements.

    Outcome index ``x * nz + z`` is read as the pair ``(x, z)``. The apparatus
    has Kraus operators ``sqrt(M_x)`` with ``M_x = sum_z M_xz``. For each ``x``
    the connecting isometry ``U_x`` satisfies ``U_x sqrt(M_x) = W_x`` where
    ``W_x = sum_z |z> ⊗ sqrt(M_xz)`` dilates the ``x`` slice; it is obtained by
    least squares on the support of ``M_x`` and completed on the kernel. The
    conditional POVM is ``N_{z|x} = U_x^dag (|z><z| ⊗ 1) U_x``.

    Raises
    ------
    DecompositionError
        If ``|| U_x sqrt(M_x) - W_x ||`` exceeds ``tol`` for some ``x``.
    """
    m = _split_joint(e, nx, nz)
    d = e.dim_in
    roots = np.stack([[_psd_root(m[x, z]) for z in range(nz)] for x in range(nx)])
    app_kraus, conds = [], []
    for x in range(nx):
        mx = m[x].sum(axis=0)
        sx = _psd_root(mx)
        wx = roots[x].reshape(nz * d, d)
        # least squares: U sx = wx  <=>  sx^T U^T = wx^T (sx Hermitian)
        u = np.linalg.lstsq(sx.conj().T, wx.conj().T, rcond=1e-12)[0].conj().T
        res = float(np.linalg.norm(u @ sx - wx, 2))
        if res > tol:
            raise DecompositionError(f"outcome x={x}: connecting isometry residual {res:.2e} exceeds {tol:.0e}")
        u = _complete_isometry(u, sx)
        n = np.stack([u.conj().T @ np.kron(proj(np.eye(nz)[z]), np.eye(d)) @ u for z in range(nz)])
        app_kraus.append(sx)
        conds.append(Instrument(d, 1, np.swapaxes(n, -1, -2).copy(), tuple(range(nz))))
    apparatus = Instrument(d, d, np.stack([choi_from_kraus(k) for k in app_kraus]), tuple(range(nx)))
    return apparatus, conds


def _psd_root(m: np.ndarray) -> np.ndarray:
    w, v = hermitian_eig(m)
    if w[0] < -TOL.psd:
        raise ValueError(f"POVM element is not PSD (min eigenvalue {w[0]:.3e})")
    return (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T


def _complete_isometry(u: np.ndarray, sx: np.ndarray) -> np.ndarray:
    """Extend a partial isometry defined on ``supp(sx)`` to a full isometry.

    The kernel of ``sx`` is mapped onto the leading orthonormal vectors
    orthogonal to the range of ``u``; a final polar step removes rounding.
    """
    d = sx.shape[0]
    w, v = np.linalg.eigh(sx)
    ker = v[:, w <= 1e-12 * max(1.0, w[-1])]
    out = u - u @ ker @ ker.conj().T
    if ker.shape[1]:
        comp = sla.null_space(out.conj().T)
        out = out + comp[:, : ker.shape[1]] @ ker.conj().T
    left, _, right = np.linalg.svd(out, full_matrices=False)
    return left @ right


# ---------------------------------------------------------------------------
# random sampling


def random_unitary(d: int, rng: np.random.Generator, rows: int | None = None) -> np.ndarray:
    """Haar-distributed isometry ``d -> rows`` (unitary when ``rows`` is ``None``)."""
    rows = d if rows is None else rows
    g = (rng.standard_normal((rows, d)) + 1j * rng.standard_normal((rows, d))) / np.sqrt(2.0)
    q, r = np.linalg.qr(g)
    ph = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * ph


def random_basis(d: int, seed: int) -> Basis:
    u = random_unitary(d, np.random.default_rng(seed))
    return Basis(u.T.copy(), label=f"random{d}:{seed}")


def random_instrument(d: int, n_outcomes: int, seed: int, dim_out: int | None = None,
                      env_dim: int | None = None) -> Instrument:
    """Instrument from a Haar isometry ``A -> Y ⊗ B ⊗ E`` with the environment discarded."""
    if d < 1 or n_outcomes < 1:
        raise ValueError("d and n_outcomes must be positive")
    dim_out = d if dim_out is None else dim_out
    env_dim = d if env_dim is None else env_dim
    rng = np.random.default_rng(seed)
    v = random_unitary(d, rng, rows=n_outcomes * dim_out * env_dim)
    k = v.reshape(n_outcomes, dim_out, env_dim, d)
    blocks = np.stack([choi_from_kraus(np.swapaxes(k[y], 0, 1)) for y in range(n_outcomes)])
    return Instrument(d, dim_out, blocks)


def random_channel(d_in: int, d_out: int, seed: int, env_dim: int | None = None) -> ChoiOperator:
    inst = random_instrument(d_in, 1, seed, dim_out=d_out, env_dim=env_dim)
    return ChoiOperator(d_in, d_out, inst.blocks[0])
