"""Worked examples with known answers, packaged as self-checking reports.

Each function builds its example from scratch, evaluates it with the library,
and compares the results with closed-form values. The reports double as a
regression suite and are what ``uncert gallery`` prints.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from itertools import product

import numpy as np

from .bounds import gaussian_bound
from .channels import (
    Basis,
    ChoiOperator,
    choi_from_kraus,
    conjugate_basis,
    ideal_measurement,
    mz_apparatus,
    mz_kraus,
)
from .measures import (
    best_measurement_error,
    constant_radius,
    diamond_distance,
    epsilon,
    eta,
    eta_hat,
    nu,
    unentangled_distinguishability,
)
from .numerics import partial_trace, proj, psd_sqrt, schatten_norm

__all__ = [
    "Check",
    "GalleryReport",
    "appendix_a",
    "counterexample",
    "counterexample_channel",
    "englert",
    "mz_sweep",
    "figure_data",
    "all_reports",
    "REPORTS",
]


@dataclass(frozen=True)
class Check:
    """One comparison: ``relation`` is ``eq`` (within ``tol``), ``ge`` or ``le`` (with ``tol`` slack)."""

    name: str
    computed: float
    expected: float
    tol: float
    relation: str = "eq"
    source: str = ""

    @property
    def ok(self) -> bool:
        if self.relation == "eq":
            return abs(self.computed - self.expected) <= self.tol
        if self.relation == "ge":
            return self.computed >= self.expected - self.tol
        if self.relation == "le":
            return self.computed <= self.expected + self.tol
        if self.relation == "gt":
            return self.computed > self.expected
        raise ValueError(f"unknown relation {self.relation!r}")

    def as_dict(self) -> dict:
        return {"name": self.name, "computed": self.computed, "expected": self.expected, "tol": self.tol,
                "relation": self.relation, "source": self.source, "pass": self.ok}


@dataclass(frozen=True)
class GalleryReport:
    name: str
    checks: tuple
    extra: dict = field(default_factory=dict)

    @property
    def computed(self) -> dict:
        return {c.name: c.computed for c in self.checks}

    @property
    def expected(self) -> dict:
        return {c.name: c.expected for c in self.checks}

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.checks)

    def as_dict(self) -> dict:
        return {"name": self.name, "pass": self.passed, "checks": [c.as_dict() for c in self.checks],
                "extra": dict(self.extra)}


# ---------------------------------------------------------------------------
# entanglement helps distinguish two qutrit measurements


def appendix_a_bases() -> tuple[Basis, Basis]:
    b = Basis(np.eye(3), label="b")
    t = Basis(np.array([[2, 2, -1], [-1, 2, 2], [2, -1, 2]]) / 3.0, label="theta")
    return b, t


def appendix_a(tol: float | None = None) -> GalleryReport:
    """Two qutrit bases whose measurements are better distinguished with an entangled input."""
    b, t = appendix_a_bases()
    m1, m2 = ideal_measurement(b), ideal_measurement(t)
    dprime = unentangled_distinguishability(m1, m2)
    res = diamond_distance(m1, m2, tol)

    # witness from the printed input state, purified with the maximally entangled vector
    rho = np.array([[2, -1, -1], [-1, 2, -1], [-1, -1, 2]]) / 6.0
    omega = np.eye(3).reshape(-1)
    sr = np.kron(np.eye(3), psd_sqrt(rho))
    psi = sr @ np.outer(omega, omega) @ sr
    diffs = b.projectors() - t.projectors()
    witness = 0.5 * sum(schatten_norm(partial_trace(np.kron(tk, np.eye(3)) @ psi, (3, 3), [1])) for tk in diffs)

    checks = (
        Check("delta_unentangled", dprime, np.sqrt(5) / 3, 1e-12, "eq", "sign enumeration"),
        Check("delta", res.value, np.sqrt(3) / 2, 1e-7, "ge", "entangled witness"),
        Check("witness", witness, np.sqrt(3) / 2, 1e-12, "eq", "printed input state"),
        Check("delta_gt_unentangled", res.value, dprime, 0.0, "gt", "strict separation"),
        Check("delta_duality_gap", res.gap, 0.0, 1e-6, "eq", "min/max forms"),
    )
    return GalleryReport("appendix_a", checks, {"delta_upper": res.upper})


# ---------------------------------------------------------------------------
# channel that transmits X well on average but leaks Z to its complement


def counterexample_weights(d: int) -> np.ndarray:
    """``p[y, z]``: columns 0 and 1 are uniform on complementary halves, the rest uniform."""
    if d < 2 or d % 2:
        raise ValueError("d must be even and at least 2")
    p = np.full((d, d), 1.0 / d)
    half = d // 2
    p[:, 0] = 0.0
    p[:, 1] = 0.0
    p[:half, 0] = 2.0 / d
    p[half:, 1] = 2.0 / d
    return p


def counterexample_isometry(d: int) -> np.ndarray:
    """``V|z> = sum_y sqrt(p[y,z]) |y>_B |z>_C |y>_D``, rows ordered ``(B, C, D)``."""
    p = counterexample_weights(d)
    v = np.zeros((d, d, d, d))
    for y, z in product(range(d), range(d)):
        v[y, z, y, z] = np.sqrt(p[y, z])
    return v.reshape(d**3, d).astype(complex)


def counterexample_channel(d: int) -> tuple[ChoiOperator, ChoiOperator]:
    """The channel ``A -> BC`` and its complement ``A -> D``."""
    v = counterexample_isometry(d).reshape(d * d, d, d)  # [(b,c), e, a]
    main = np.swapaxes(v, 0, 1)  # Kraus <e|_D V : A -> BC
    n = ChoiOperator(d, d * d, choi_from_kraus(main))
    c = ChoiOperator(d, d, choi_from_kraus(v))  # Kraus <bc| V : A -> D
    return n, c


def pgm_guessing_probability(states: np.ndarray) -> float:
    """Average success of the square-root measurement on equiprobable states."""
    k = len(states)
    s = np.sum(states, axis=0)
    w, v = np.linalg.eigh(s)
    inv = np.where(w > 1e-12, 1.0 / np.sqrt(np.clip(w, 1e-300, None)), 0.0)
    s_inv = (v * inv) @ v.conj().T
    return float(np.real(sum(np.trace(s_inv @ r @ s_inv @ r) for r in states)) / k)


def counterexample_guess_formula(d: int) -> float:
    p = counterexample_weights(d)
    return float((np.sqrt(p).sum(axis=1) ** 2).sum() / d**2)


def counterexample(d: int = 4, tol: float | None = None, with_sdp: bool | None = None) -> GalleryReport:
    """Calibration fails: near-perfect X identification, yet the complement sees Z."""
    if d < 2 or d % 2:
        raise ValueError("d must be even and at least 2")
    theta, phi = conjugate_basis(d)
    n, comp = counterexample_channel(d)
    outs = np.stack([n(phi.projector(x)) for x in range(d)])
    pg = pgm_guessing_probability(outs)
    closed = (d + np.sqrt(2) - 2) ** 2 / d**2
    r0, r1 = comp(theta.projector(0)), comp(theta.projector(1))
    overlap = float(np.abs(np.trace(r0 @ r1)))
    checks = [
        Check("p_guess", pg, closed, 1e-9, "eq", "square-root measurement vs closed form"),
        Check("p_guess_sum_formula", counterexample_guess_formula(d), closed, 1e-12, "eq", "sum over y"),
        Check("complement_overlap_z01", overlap, 0.0, 1e-14, "eq", "disjoint supports"),
    ]
    extra = {"d": d}
    if with_sdp is None:
        with_sdp = d <= 4
    if with_sdp:
        rad = constant_radius(comp, basis=theta, tol=tol)
        err = best_measurement_error(n, phi, tol)
        checks += [
            Check("complement_radius", rad.value, 0.5, 1e-6, "ge", "disjoint outputs"),
            Check("best_measurement_error", err.value, 0.125, 1e-6, "ge", "leakage corollary"),
            Check("radius_gap", rad.gap, 0.0, 1e-6, "eq", "min/max forms"),
            Check("error_gap", err.gap, 0.0, 1e-6, "eq", "min/max forms"),
        ]
    return GalleryReport(f"counterexample_d{d}", tuple(checks), extra)


# ---------------------------------------------------------------------------
# Mach-Zehnder interferometer with which-way detector


def englert_isometry(theta: float, phi: float = 0.0) -> np.ndarray:
    """``sum_x e^{i x phi} |x><x| ⊗ |gamma_x>`` in the X basis, rows ordered (quanton, ancilla)."""
    _, xb = conjugate_basis(2)
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    gam = np.array([[c, s], [s, c]], dtype=complex)  # gamma_k = c|k> + s|k+1>
    u = sum(np.exp(1j * x * phi) * np.kron(xb.projector(x), gam[x][:, None]) for x in range(2))
    return u


def englert(theta: float, phi: float = 0.0, tol: float | None = None, with_sdp: bool = True) -> GalleryReport:
    """Which-way distinguishability and fringe visibility against error and disturbance."""
    u = englert_isometry(theta, phi)
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    g0, g1 = np.array([c, s]), np.array([s, c])
    dist = 0.5 * schatten_norm(proj(g0) - proj(g1))
    zq = np.kron(np.diag([1.0, -1.0]), np.eye(2))
    vis = float(np.max(np.abs(np.linalg.eigvalsh(u.conj().T @ zq @ u))))
    # reading the ancilla in its standard basis gives the interferometer instrument
    kraus = np.stack([np.kron(np.eye(2), np.eye(2)[k][None, :]) @ u for k in range(2)])
    same = float(np.max(np.abs(kraus - mz_kraus(theta)))) if phi == 0.0 else 0.0
    checks = [
        Check("D", dist, np.cos(theta), 1e-12, "eq", "which-way distinguishability"),
        Check("V", vis, np.sin(theta), 1e-12, "eq", "fringe visibility"),
        Check("V2+D2", vis**2 + dist**2, 1.0, 1e-12, "eq", "duality relation"),
        Check("kraus_match", same, 0.0, 1e-12, "eq", "ancilla readout"),
    ]
    if with_sdp:
        z, x = conjugate_basis(2)
        e = mz_apparatus(theta)
        checks += [
            Check("epsilon_X", epsilon(e, x, tol).value, 0.5 * (1 - dist), 1e-6, "eq", "error vs D"),
            Check("nu_Z", nu(e, z, tol).value, 0.5 * (1 - vis), 1e-6, "eq", "disturbance vs V"),
            Check("eta_Z", eta(e, z, tol).value, 0.5 * (1 - vis), 1e-6, "eq", "disturbance vs V"),
            Check("eta_hat_Z", eta_hat(e, z, tol).value, 0.5 * (1 - vis), 1e-6, "eq", "disturbance vs V"),
        ]
    return GalleryReport(f"englert_theta={theta:.6g}_phi={phi:.6g}", tuple(checks), {"theta": theta, "phi": phi})


MZ_GRID = (0.0, np.pi / 8, np.pi / 6, np.pi / 4, np.pi / 3, 3 * np.pi / 8, np.pi / 2)


def mz_sweep(thetas=MZ_GRID, tol: float | None = None) -> GalleryReport:
    """Closed forms of error and the three disturbances of the interferometer instrument."""
    z, x = conjugate_basis(2)
    checks = []
    for th in thetas:
        e = mz_apparatus(th)
        err, dist = 0.5 * (1 - np.cos(th)), 0.5 * (1 - np.sin(th))
        for name, res, want in (
            ("epsilon_X", epsilon(e, x, tol), err),
            ("nu_Z", nu(e, z, tol), dist),
            ("eta_Z", eta(e, z, tol), dist),
            ("eta_hat_Z", eta_hat(e, z, tol), dist),
        ):
            checks.append(Check(f"{name}@{th:.6f}", res.value, want, 1e-6, "eq", "closed form"))
            checks.append(Check(f"{name}_gap@{th:.6f}", res.gap, 0.0, 1e-6, "eq", "min/max forms"))
    return GalleryReport("mz_sweep", tuple(checks))


# ---------------------------------------------------------------------------
# figure data


def _fig5_row(theta: float, tol) -> dict:
    z, x = conjugate_basis(2)
    e = mz_apparatus(theta)
    eps = epsilon(e, x, tol).value
    dist = nu(e, z, tol).value
    c = 0.5  # measurement complementarity of the conjugate qubit pair
    floor_1 = max(0.0, c - float(np.sqrt(2 * max(eps, 0.0))))
    floor_2 = max(0.0, c - eps) ** 2 / 2
    return {
        "theta": theta,
        "epsilon_X": eps,
        "nu_Z": dist,
        "nu_floor_1": floor_1,
        "nu_floor_2": floor_2,
        "nu_floor": max(floor_1, floor_2),
    }


def figure_data(which: str, grid: int = 11, tol: float | None = None, executor=None) -> list[dict]:
    """Rows for the error/disturbance plane (``fig5``) or the Gaussian bounds (``fig7``).

    ``fig5``: the interferometer trajectory for the conjugate qubit pair plus
    the smallest disturbance each of the two inequalities allows at the
    trajectory's error (``nu_floor_1``, ``nu_floor_2``) and their maximum.
    ``fig7``: both Gaussian bounds on a log grid of ``c`` from 1e-3 to 1e3. ``executor`` (any object with an ordered ``map``) may
    parallelize the SDP rows.
    """
    if grid < 2:
        raise ValueError("grid must be at least 2")
    if which == "fig5":
        thetas = np.linspace(0.0, np.pi / 2, grid)
        mapper = executor.map if executor is not None else map
        return list(mapper(lambda th: _fig5_row(float(th), tol), thetas))
    if which == "fig7":
        cs = np.logspace(-3, 3, grid)
        return [{"c": float(c), "measurement": gaussian_bound(c, "measurement"),
                 "preparation": gaussian_bound(c, "preparation")} for c in cs]
    raise ValueError(f"unknown figure {which!r}")


REPORTS = {
    "appendix_a": lambda tol=None: appendix_a(tol),
    "counterexample_d2": lambda tol=None: counterexample(2, tol),
    "counterexample_d4": lambda tol=None: counterexample(4, tol),
    "englert": lambda tol=None: englert(np.pi / 3, 0.0, tol),
    "englert_phase": lambda tol=None: englert(np.pi / 3, 0.7, tol, with_sdp=False),
    "mz_sweep": lambda tol=None: mz_sweep(tol=tol),
}


def all_reports(tol: float | None = None, names=None, executor=None) -> list[GalleryReport]:
    names = list(REPORTS) if names is None else list(names)
    unknown = [n for n in names if n not in REPORTS]
    if unknown:
        raise ValueError(f"unknown gallery report(s): {', '.join(unknown)}")
    mapper = executor.map if executor is not None else map
    # registry names win over the parameter-stamped names
    return list(mapper(lambda n: replace(REPORTS[n](tol), name=n), names))
