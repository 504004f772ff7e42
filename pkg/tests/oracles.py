"""Reference computations written without the package, used to freeze expected values."""
import itertools

import numpy as np
from scipy import integrate, optimize


def kron_loops(a, b):
    ra, ca = a.shape
    rb, cb = b.shape
    out = np.zeros((ra * rb, ca * cb), dtype=complex)
    for i, j, k, l in itertools.product(range(ra), range(ca), range(rb), range(cb)):
        out[i * rb + k, j * cb + l] = a[i, j] * b[k, l]
    return out


def trace_out_second(m, da, db):
    out = np.zeros((da, da), dtype=complex)
    for i, j, k in itertools.product(range(da), range(da), range(db)):
        out[i, j] += m[i * db + k, j * db + k]
    return out


def trace_out_first(m, da, db):
    out = np.zeros((db, db), dtype=complex)
    for i, j, k in itertools.product(range(db), range(db), range(da)):
        out[i, j] += m[k * db + i, k * db + j]
    return out


def trace_norm(m):
    return float(np.sum(np.linalg.svd(m, compute_uv=False)))


def bloch_state(r):
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]])
    sz = np.diag([1.0, -1.0]).astype(complex)
    return 0.5 * (np.eye(2) + r[0] * sx + r[1] * sy + r[2] * sz)


def sqrtm_psd(m):
    w, v = np.linalg.eigh(m)
    return (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T


def measurement_distance_grid(povm1, povm2, steps=60):
    """Half diamond distance of two qubit measurements, by grid search over entangled inputs.

    Any input purifies some reduced state rho; the output difference for outcome y
    is then unitarily equivalent to sqrt(rho) (M1_y - M2_y)^T sqrt(rho).
    """
    best = 0.0
    for r in np.linspace(0, 1, steps // 3 + 1):
        for t in np.linspace(0, np.pi, steps // 2 + 1):
            for p in np.linspace(0, 2 * np.pi, steps, endpoint=False):
                rho = bloch_state(r * np.array([np.sin(t) * np.cos(p), np.sin(t) * np.sin(p), np.cos(t)]))
                s = sqrtm_psd(rho)
                val = 0.5 * sum(trace_norm(s @ (a - b).T @ s) for a, b in zip(povm1, povm2))
                best = max(best, val)
    return best


def two_state_radius_grid(r0, r1, steps=41):
    """min over Bloch vectors s of max_i |r_i - s| / 2 (qubit trace distance)."""
    best = np.inf
    axis = np.linspace(-1, 1, steps)
    for s in itertools.product(axis, repeat=3):
        s = np.array(s)
        if s @ s > 1 + 1e-12:
            continue
        best = min(best, max(np.linalg.norm(r0 - s), np.linalg.norm(r1 - s)) / 2)
    return best


def guess_probability_sum(p):
    """(1/d^2) sum_y (sum_z sqrt(p[y, z]))^2 with explicit loops."""
    d = p.shape[0]
    total = 0.0
    for y in range(d):
        inner = 0.0
        for z in range(p.shape[1]):
            inner += np.sqrt(p[y, z])
        total += inner**2
    return total / d**2


def gauss(x, s):
    return np.exp(-x * x / (2 * s * s)) / (np.sqrt(2 * np.pi) * s)


def overlap_quadrature(sigma_psi, sigma_noise, sigma_f):
    """int dp' dp g_psi(p') g_noise(p' - p) f(p), f = sqrt(2 pi) sigma_f g_f, on +-10 sigma boxes."""
    f = lambda p: np.sqrt(2 * np.pi) * sigma_f * gauss(p, sigma_f)
    val, _ = integrate.dblquad(
        lambda p, pp: gauss(pp, sigma_psi) * gauss(pp - p, sigma_noise) * f(p),
        -10 * sigma_psi, 10 * sigma_psi,
        lambda pp: pp - 10 * sigma_noise, lambda pp: pp + 10 * sigma_noise,
        epsabs=1e-13, epsrel=1e-12,
    )
    return val


def closed_overlap(sigma_psi, sigma_noise, sigma_f):
    return sigma_f / np.sqrt(sigma_f**2 + sigma_noise**2 + sigma_psi**2)


def golden_argmax_sigma_f(c, sigma_p=1.0):
    """Argmax over sigma_f of the test-function difference with sigma_psi = 0, by golden section."""
    sigma_q = c / (2 * sigma_p)
    hat = 1 / (2 * sigma_q)
    obj = lambda lf: -(closed_overlap(0, sigma_p, np.exp(lf)) - closed_overlap(0, hat, np.exp(lf)))
    res = optimize.minimize_scalar(obj, bracket=(-10.0, 0.0, 10.0), method="golden", tol=1e-12)
    return float(np.exp(res.x))
