"""Distinguishability, error and disturbance measures as semidefinite programs.

Every measure is computed twice: once as a minimization (an upper bound on a
distinguishability, obtained from explicit feasible recovery maps and
certificates ``T``) and once as the conic-dual maximization. The two are
independent models solved separately; :class:`MeasureResult` keeps both
values and reports their difference as ``gap``.

Classical wires are handled by giving each outcome its own block of
variables, so all operators below are "classical on the outcome register"
by construction.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Callable

import numpy as np

from .channels import (
    Basis,
    ChoiOperator,
    Instrument,
    apply_choi,
    computational_basis,
    ideal_measurement,
    link,
    pinching,
)
from .numerics import TOL, from_coords, hermitian_basis, to_coords
from .sdp import Model, ModelResult, SolverFailure
from .sdp.model import sum_affine

__all__ = [
    "MeasureResult",
    "SolverFailure",
    "diamond_distance",
    "diamond_certificate",
    "unentangled_distinguishability",
    "epsilon",
    "nu",
    "eta",
    "eta_hat",
    "eta_tilde",
    "constant_radius",
    "chebyshev_radius",
    "complementarity",
    "best_measurement_error",
]


@dataclass(frozen=True)
class MeasureResult:
    """Value of a measure together with its duality certificate.

    ``upper`` comes from the minimization form and ``lower`` from the
    maximization form of the same quantity (for ``eta_hat``, which subtracts
    a radius from ``(d-1)/d``, the roles swap). ``value`` is the reported
    number; ``gap = |upper - lower|``.
    """

    value: float
    gap: float
    lower: float
    upper: float
    formulation: str
    status: str = "optimal"
    iterations: int = 0
    optimizer: dict = field(default_factory=dict, repr=False)

    def __float__(self) -> float:
        return float(self.value)


def _result(name: str, lo: ModelResult, hi: ModelResult, value: float, lower: float, upper: float,
            optimizer: dict | None = None) -> MeasureResult:
    return MeasureResult(
        value=float(value),
        gap=float(abs(upper - lower)),
        lower=float(lower),
        upper=float(upper),
        formulation=name,
        status="optimal",
        iterations=int(lo.iterations + hi.iterations),
        optimizer=optimizer or {},
    )


def _blocks(e) -> tuple[np.ndarray, int, int]:
    if isinstance(e, Instrument):
        return e.blocks, e.dim_in, e.dim_out
    if isinstance(e, ChoiOperator):
        return e.matrix[None], e.dim_in, e.dim_out
    raise TypeError(f"expected Instrument or ChoiOperator, got {type(e).__name__}")


def _adjoint(f: Callable[[np.ndarray], np.ndarray], n_in: int) -> Callable[[np.ndarray], np.ndarray]:
    """Hilbert-Schmidt adjoint of a Hermiticity-preserving linear map.

    ``f`` maps ``n_in x n_in`` Hermitian matrices (with batch axes) to
    Hermitian matrices. Its matrix in orthonormal Hermitian coordinates is
    built explicitly; the adjoint is its transpose.
    """
    basis = hermitian_basis(n_in)
    mat = to_coords(f(basis))  # row i = coords of f(basis_i)

    def adj(k: np.ndarray) -> np.ndarray:
        return from_coords(to_coords(k) @ mat.T, n_in)

    return adj


def _state_var(model: Model, n: int) -> object:
    """Subnormalized state ``rho >= 0``, ``Tr rho <= 1``."""
    rho = model.hermitian(n, psd=True)
    model.le(rho.trace(), 1.0)
    return rho


def _check_measure(res: MeasureResult) -> MeasureResult:
    lo, hi = -TOL.measure_range, 1.0 + TOL.measure_range
    if not (lo <= res.value <= hi):
        raise SolverFailure("optimal", f"{res.formulation}: value {res.value:.3e} outside [0, 1]")
    return res


# ---------------------------------------------------------------------------
# diamond distance


def _diamond_forms(diff: np.ndarray, dim_in: int, dim_out: int, tol, name: str):
    """Both forms of ``max sum_y Tr[D_y K_y]`` over ``0 <= K_y <= 1 ⊗ rho``."""
    n = dim_in * dim_out
    lo = Model(f"{name}:min")
    lam = lo.real()
    ts = []
    for d_y in diff:
        t = lo.hermitian(n, psd=True)
        lo.psd(t - d_y)
        ts.append(t.ptrace((dim_out, dim_in), [1]))
    lo.psd(lam.times_identity(dim_in) - sum_affine(ts))
    lo.minimize(lam)
    r_min = lo.solve(tol)

    hi = Model(f"{name}:max")
    rho = _state_var(hi, dim_in)
    bound = rho.kron_left(np.eye(dim_out))
    obj = []
    for d_y in diff:
        k = hi.hermitian(n, psd=True)
        hi.le(k, bound)
        obj.append(k.inner(d_y))
    hi.maximize(sum_affine(obj))
    r_max = hi.solve(tol)
    return r_min, r_max, r_max[rho]


def diamond_distance(e1, e2, tol: float | None = None) -> MeasureResult:
    """Half the completely bounded trace-norm distance between two channels or instruments.

    The reported value is the exact distinguishability achieved by the input
    state found by the maximization form (see :func:`diamond_certificate`), so
    it is a rigorous lower bound; the minimization supplies the matching upper
    bound.
    """
    b1, din1, dout1 = _blocks(e1)
    b2, din2, dout2 = _blocks(e2)
    if (din1, dout1, b1.shape[0]) != (din2, dout2, b2.shape[0]):
        raise ValueError("diamond_distance needs matching dimensions and outcome counts")
    diff = b1 - b2
    r_min, r_max, rho = _diamond_forms(diff, din1, dout1, tol, "diamond")
    # Re-evaluate the input state exactly: for fixed rho the inner optimum is a
    # sum of positive parts, so this lower bound holds independently of the solver.
    cert = diamond_certificate(diff, rho, din1, dout1)
    lower = max(cert, 0.0)
    res = _result("diamond", r_min, r_max, lower, lower, r_min.value,
                  {"input_state": rho, "model_lower": r_max.value})
    return _check_measure(res)


def diamond_certificate(diff: np.ndarray, rho: np.ndarray, dim_in: int, dim_out: int) -> float:
    """Exact distinguishability witnessed by the input state ``rho`` (purified on a copy of ``A``).

    Equals ``sum_y Tr[(S D_y S)_+]`` with ``S = 1 ⊗ sqrt(rho)`` after clipping
    ``rho`` to a density matrix. Any ``rho`` gives a valid lower bound.
    """
    w, v = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    w = np.clip(w, 0.0, None)
    if w.sum() <= 0:
        return 0.0
    w = w / w.sum()
    s = np.kron(np.eye(dim_out), (v * np.sqrt(w)) @ v.conj().T)
    total = 0.0
    for d_y in np.asarray(diff).reshape(-1, dim_in * dim_out, dim_in * dim_out):
        ev = np.linalg.eigvalsh(s @ d_y @ s)
        total += float(ev[ev > 0].sum())
    return total


def unentangled_distinguishability(m1, m2) -> float:
    """Best distinguishability of two measurements using unentangled input states.

    Equals ``max_rho 1/2 sum_k |Tr rho T_k|`` with ``T_k`` the differences of
    POVM elements, i.e. half the largest operator norm of ``sum_k s_k T_k`` over
    sign vectors ``s``.
    """
    p1 = m1.povm() if isinstance(m1, Instrument) else np.asarray(m1)
    p2 = m2.povm() if isinstance(m2, Instrument) else np.asarray(m2)
    if p1.shape != p2.shape:
        raise ValueError("measurements must have the same outcome count and dimension")
    n = p1.shape[0]
    if n > 20:
        raise ValueError("sign enumeration limited to 20 outcomes")
    t = p1 - p2
    best = 0.0
    # s and -s give the same norm, so fix the first sign
    for signs in product((1.0, -1.0), repeat=n - 1):
        s = np.array((1.0,) + signs)
        best = max(best, float(np.linalg.norm(np.tensordot(s, t, axes=(0, 0)), 2)))
    return 0.5 * best


# ---------------------------------------------------------------------------
# measurement error


def _measurement_blocks(b: Basis) -> np.ndarray:
    """Choi blocks of the ideal measurement in ``b`` (transposed projectors)."""
    return ideal_measurement(b).blocks


def epsilon(e: Instrument, x: Basis, tol: float | None = None, postprocess: np.ndarray | None = None) -> MeasureResult:
    """Error of ``e`` as a measurement of the basis ``x``, optimized over classical postprocessing.

    ``postprocess`` freezes the stochastic matrix ``R[x, y]`` instead of
    optimizing it (used to check that optimization only helps).
    """
    if e.dim_in != x.dim:
        raise ValueError("instrument input dimension must match the basis")
    d = x.dim
    q = _measurement_blocks(x)
    ey = e.povm().swapaxes(-1, -2)  # Tr_B C_y
    nx, ny = d, e.n_outcomes

    lo = Model("epsilon:min")
    lam = lo.real()
    if postprocess is None:
        r = [[lo.real(nonneg=True) for _ in range(ny)] for _ in range(nx)]
        for y in range(ny):
            lo.eq(sum_affine(r[xx][y] for xx in range(nx)), 1.0)
    else:
        rr = np.asarray(postprocess, dtype=float)
        r = [[lo.constant(rr[xx, y]) for y in range(ny)] for xx in range(nx)]
    ts = []
    for xx in range(nx):
        t = lo.hermitian(d, psd=True)
        mixed = sum_affine(r[xx][y].kron_right(ey[y]) for y in range(ny))
        lo.psd(t + mixed - q[xx])
        ts.append(t)
    lo.psd(lam.times_identity(d) - sum_affine(ts))
    lo.minimize(lam)
    r_min = lo.solve(tol)

    hi = Model("epsilon:max")
    rho = _state_var(hi, d)
    ks = [hi.hermitian(d, psd=True) for _ in range(nx)]
    for k in ks:
        hi.le(k, rho)
    if postprocess is None:
        ls = [hi.real() for _ in range(ny)]
        for y in range(ny):
            for k in ks:
                hi.le(k.inner(ey[y]), ls[y])
        penalty = sum_affine(ls)
    else:
        rr = np.asarray(postprocess, dtype=float)
        penalty = sum_affine(ks[xx].inner(sum(rr[xx, y] * ey[y] for y in range(ny))) for xx in range(nx))
    hi.maximize(sum_affine(k.inner(q[xx]) for xx, k in enumerate(ks)) - penalty)
    r_max = hi.solve(tol)

    opt = {}
    if postprocess is None:
        opt["postprocessing"] = np.array([[np.real(r_min[r[xx][y]][0, 0]) for y in range(ny)] for xx in range(nx)])
    return _check_measure(_result("epsilon", r_min, r_max, r_min.value, r_max.value, r_min.value, opt))


# ---------------------------------------------------------------------------
# measurement disturbance


def nu(e: Instrument, z: Basis, tol: float | None = None) -> MeasureResult:
    """Disturbance of ``e`` on a later ideal measurement of ``z``, after the best recovery."""
    if e.dim_in != z.dim:
        raise ValueError("instrument input dimension must match the basis")
    d, db = z.dim, e.dim_out
    q = _measurement_blocks(z)
    nr = d * db  # recovery Choi on A' ⊗ B

    def g(y: int, zz: int):
        # R_y -> Choi of (measure z) ∘ R_y ∘ E_y on A
        def f(r):
            chan = link(e.blocks[y], r, (d, db, d))
            return link(chan, q[zz], (d, d, 1))
        return f

    lo = Model("nu:min")
    lam = lo.real()
    recs = []
    for y in range(e.n_outcomes):
        r = lo.hermitian(nr, psd=True)
        lo.eq(r.ptrace((d, db), [1]), np.eye(db))
        recs.append(r)
    ts = []
    for zz in range(d):
        t = lo.hermitian(d, psd=True)
        out = sum_affine(recs[y].apply(g(y, zz)) for y in range(e.n_outcomes))
        lo.psd(t + out - q[zz])
        ts.append(t)
    lo.psd(lam.times_identity(d) - sum_affine(ts))
    lo.minimize(lam)
    r_min = lo.solve(tol)

    hi = Model("nu:max")
    rho = _state_var(hi, d)
    ks = [hi.hermitian(d, psd=True) for _ in range(d)]
    for k in ks:
        hi.le(k, rho)
    pen = []
    for y in range(e.n_outcomes):
        ly = hi.hermitian(db)
        w = sum_affine(ks[zz].apply(_adjoint(g(y, zz), nr)) for zz in range(d))
        hi.le(w, ly.kron_left(np.eye(d)))
        pen.append(ly.trace())
    hi.maximize(sum_affine(k.inner(q[zz]) for zz, k in enumerate(ks)) - sum_affine(pen))
    r_max = hi.solve(tol)

    opt = {"recovery": np.stack([r_min[r] for r in recs])}
    return _check_measure(_result("nu", r_min, r_max, r_min.value, r_max.value, r_min.value, opt))


# ---------------------------------------------------------------------------
# preparation disturbance


def _prepared_outputs(e: Instrument, z: Basis) -> np.ndarray:
    """``omega[y, z] = E_y(|z><z|)``, the unnormalized outputs on basis-state inputs."""
    p = z.projectors()
    return np.stack([[apply_choi(c, p[k], e.dim_in, e.dim_out) for k in range(z.dim)] for c in e.blocks])


def eta(e: Instrument, z: Basis, tol: float | None = None) -> MeasureResult:
    """Disturbance of ``e`` on prepared basis states ``z``, after the best recovery."""
    if e.dim_in != z.dim:
        raise ValueError("instrument input dimension must match the basis")
    d, db = z.dim, e.dim_out
    omega = _prepared_outputs(e, z)
    theta = z.projectors()
    ny = e.n_outcomes

    lo = Model("eta:min")
    lam = lo.real()
    recs = []
    for y in range(ny):
        r = lo.hermitian(d * db, psd=True)
        lo.eq(r.ptrace((d, db), [1]), np.eye(db))
        recs.append(r)
    for zz in range(d):
        t = lo.hermitian(d, psd=True)
        out = sum_affine(recs[y].apply(lambda m, w=omega[y, zz]: _apply_batched(m, w, db, d)) for y in range(ny))
        lo.psd(t + out - theta[zz])
        lo.le(t.trace(), lam)
    lo.minimize(lam)
    r_min = lo.solve(tol)

    hi = Model("eta:max")
    weights = [hi.real(nonneg=True) for _ in range(d)]
    hi.le(sum_affine(weights), 1.0)
    ks = []
    for zz in range(d):
        k = hi.hermitian(d, psd=True)
        hi.le(k, weights[zz].times_identity(d))
        ks.append(k)
    pen = []
    for y in range(ny):
        ly = hi.hermitian(db)
        # adjoint of R -> R(omega) is K -> K ⊗ omega^T
        w = sum_affine(ks[zz].kron_right(omega[y, zz].T) for zz in range(d))
        hi.le(w, ly.kron_left(np.eye(d)))
        pen.append(ly.trace())
    hi.maximize(sum_affine(k.inner(theta[zz]) for zz, k in enumerate(ks)) - sum_affine(pen))
    r_max = hi.solve(tol)

    opt = {"recovery": np.stack([r_min[r] for r in recs])}
    return _check_measure(_result("eta", r_min, r_max, r_min.value, r_max.value, r_min.value, opt))


def _apply_batched(c: np.ndarray, rho: np.ndarray, dim_in: int, dim_out: int) -> np.ndarray:
    t = np.asarray(c).reshape(c.shape[:-2] + (dim_out, dim_in, dim_out, dim_in))
    return np.einsum("...iajb,ab->...ij", t, rho)


def chebyshev_radius(states: np.ndarray, tol: float | None = None, name: str = "radius"):
    """Smallest ``t`` such that one state is within trace distance ``t`` of every given state.

    ``states[z, y]`` are the blocks of a classical-quantum state (outcome ``y``
    classical); the centre is taken classical on ``y`` as well. Returns the
    minimization and maximization model results.
    """
    st = np.asarray(states)
    if st.ndim == 3:
        st = st[:, None]
    nz, ny, n = st.shape[0], st.shape[1], st.shape[-1]

    lo = Model(f"{name}:min")
    t = lo.real()
    sig = [lo.hermitian(n, psd=True) for _ in range(ny)]
    lo.eq(sum_affine(s.trace() for s in sig), 1.0)
    for zz in range(nz):
        tr = []
        for y in range(ny):
            nn = lo.hermitian(n, psd=True)
            lo.psd(nn + sig[y] - st[zz, y])
            tr.append(nn.trace())
        lo.le(sum_affine(tr), t)
    lo.minimize(t)
    r_min = lo.solve(tol)

    hi = Model(f"{name}:max")
    mu = hi.real()
    weights = [hi.real(nonneg=True) for _ in range(nz)]
    hi.le(sum_affine(weights), 1.0)
    ks = [[None] * ny for _ in range(nz)]
    obj = []
    for zz in range(nz):
        for y in range(ny):
            k = hi.hermitian(n, psd=True)
            hi.le(k, weights[zz].times_identity(n))
            ks[zz][y] = k
            obj.append(k.inner(st[zz, y]))
    for y in range(ny):
        hi.le(sum_affine(ks[zz][y] for zz in range(nz)), mu.times_identity(n))
    hi.maximize(sum_affine(obj) - mu)
    r_max = hi.solve(tol)
    centre = np.stack([r_min[s] for s in sig])
    return r_min, r_max, centre


def eta_hat(e: Instrument, z: Basis, tol: float | None = None) -> MeasureResult:
    """Demerit-style preparation disturbance: ``(d-1)/d`` minus the distance to the nearest constant channel."""
    if e.dim_in != z.dim:
        raise ValueError("instrument input dimension must match the basis")
    d = z.dim
    omega = _prepared_outputs(e, z)  # [y, z]
    r_min, r_max, centre = chebyshev_radius(np.swapaxes(omega, 0, 1), tol, "eta_hat")
    base = (d - 1) / d
    value = base - r_min.value
    res = _result("eta_hat", r_min, r_max, value, base - r_min.value, base - r_max.value,
                  {"constant_state": centre, "radius": r_min.value})
    lo, hi = -TOL.measure_range, base + TOL.measure_range
    if not (lo <= res.value <= hi):
        raise SolverFailure("optimal", f"eta_hat: value {res.value:.3e} outside [0, {base:.3f}]")
    return res


def eta_tilde(e: Instrument, z: Basis, tol: float | None = None) -> MeasureResult:
    """Variant of :func:`eta_hat` with pinched quantum input and the full channel distance.

    The input is dephased in ``z`` and the distance to the best constant
    channel is the completely bounded one, with entangled inputs allowed.
    """
    if e.dim_in != z.dim:
        raise ValueError("instrument input dimension must match the basis")
    d, db = z.dim, e.dim_out
    pin = pinching(z).matrix
    cp = np.stack([link(pin, c, (d, d, db)) for c in e.blocks])
    n = db * d
    ny = e.n_outcomes

    lo = Model("eta_tilde:min")
    lam = lo.real()
    sig = [lo.hermitian(db, psd=True) for _ in range(ny)]
    lo.eq(sum_affine(s.trace() for s in sig), 1.0)
    ts = []
    for y in range(ny):
        t = lo.hermitian(n, psd=True)
        lo.psd(t + sig[y].kron_right(np.eye(d)) - cp[y])
        ts.append(t.ptrace((db, d), [1]))
    lo.psd(lam.times_identity(d) - sum_affine(ts))
    lo.minimize(lam)
    r_min = lo.solve(tol)

    hi = Model("eta_tilde:max")
    mu = hi.real()
    rho = _state_var(hi, d)
    obj = []
    for y in range(ny):
        k = hi.hermitian(n, psd=True)
        hi.le(k, rho.kron_left(np.eye(db)))
        hi.le(k.ptrace((db, d), [0]), mu.times_identity(db))
        obj.append(k.inner(cp[y]))
    hi.maximize(sum_affine(obj) - mu)
    r_max = hi.solve(tol)

    base = (d - 1) / d
    return _result("eta_tilde", r_min, r_max, base - r_min.value, base - r_min.value, base - r_max.value,
                   {"constant_state": np.stack([r_min[s] for s in sig])})


def constant_radius(f, basis: Basis | None = None, tol: float | None = None) -> MeasureResult:
    """Distance from a classical-input channel to the closest constant channel.

    ``f`` is a channel whose input is read classically in ``basis`` (the
    computational basis by default); instruments contribute a classical
    output register. The value is ``min_sigma max_z 1/2 ||sigma - f(z)||_1``.
    """
    blocks, din, dout = _blocks(f)
    basis = computational_basis(din) if basis is None else basis
    p = basis.projectors()
    states = np.stack([[apply_choi(c, p[k], din, dout) for c in blocks] for k in range(din)])
    r_min, r_max, centre = chebyshev_radius(states, tol, "constant_radius")
    return _check_measure(_result("constant_radius", r_min, r_max, r_min.value, r_max.value, r_min.value,
                                  {"constant_state": centre}))


def complementarity(x: Basis, z: Basis, tol: float | None = None) -> tuple[MeasureResult, MeasureResult, MeasureResult]:
    """Measurement, preparation and demerit complementarity of two bases.

    All three are disturbances to ``z`` caused by the ideal (non-repreparing)
    measurement of ``x``.
    """
    if x.dim != z.dim:
        raise ValueError("bases must have the same dimension")
    qx = ideal_measurement(x)
    return nu(qx, z, tol), eta(qx, z, tol), eta_hat(qx, z, tol)


def best_measurement_error(n: ChoiOperator, x: Basis, tol: float | None = None) -> MeasureResult:
    """Smallest error of any measurement performed on the output of ``n`` as a measurement of ``x``."""
    if n.dim_in != x.dim:
        raise ValueError("channel input dimension must match the basis")
    d, db = x.dim, n.dim_out
    q = _measurement_blocks(x)
    c = n.matrix

    def h(m):
        return link(c, m, (d, db, 1))

    lo = Model("best_measurement_error:min")
    lam = lo.real()
    povm = [lo.hermitian(db, psd=True) for _ in range(d)]
    lo.eq(sum_affine(povm), np.eye(db))
    ts = []
    for xx in range(d):
        t = lo.hermitian(d, psd=True)
        lo.psd(t + povm[xx].apply(h) - q[xx])
        ts.append(t)
    lo.psd(lam.times_identity(d) - sum_affine(ts))
    lo.minimize(lam)
    r_min = lo.solve(tol)

    hi = Model("best_measurement_error:max")
    rho = _state_var(hi, d)
    ell = hi.hermitian(db)
    hadj = _adjoint(h, db)
    ks = []
    for xx in range(d):
        k = hi.hermitian(d, psd=True)
        hi.le(k, rho)
        hi.le(k.apply(hadj), ell)
        ks.append(k)
    hi.maximize(sum_affine(k.inner(q[xx]) for xx, k in enumerate(ks)) - ell.trace())
    r_max = hi.solve(tol)

    opt = {"povm": np.stack([r_min[m].T for m in povm])}
    return _check_measure(_result("best_measurement_error", r_min, r_max, r_min.value, r_max.value,
                                  r_min.value, opt))
