"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line in the terminal summary.

Expensive computations are cached so the duality criterion can reuse every
SDP solved by the others, whatever order the tests run in.
"""
import time
from functools import lru_cache

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from oracles import golden_argmax_sigma_f, guess_probability_sum, overlap_quadrature
from uncertsdp.bounds import (
    GaussianParams,
    check_theorem1,
    check_theorem2,
    demerit_bound,
    gaussian_bound,
    gaussian_overlap,
    optimal_sigma_f,
    overlap_bound,
)
from uncertsdp.channels import (
    ChoiOperator,
    conjugate_basis,
    ideal_measurement,
    mz_apparatus,
    random_basis,
    random_channel,
    random_instrument,
    stinespring,
)
from uncertsdp.gallery import (
    MZ_GRID,
    appendix_a_bases,
    counterexample_channel,
    counterexample_weights,
    pgm_guessing_probability,
)
from uncertsdp.measures import (
    best_measurement_error,
    complementarity,
    constant_radius,
    diamond_certificate,
    diamond_distance,
    epsilon,
    eta,
    eta_hat,
    nu,
    unentangled_distinguishability,
)

pytestmark = pytest.mark.slow


def record(number, title, ok, detail, elapsed, budget):
    status = "PASS" if ok else "FAIL"
    ACCEPTANCE_LINES.append(f"[{status}] {number}: {title} | {detail} | {elapsed:.1f}s (budget {budget})")


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


# cached computations


@lru_cache(maxsize=None)
def mz_measures():
    z, x = conjugate_basis(2)
    out = {}
    for th in MZ_GRID:
        e = mz_apparatus(th)
        out[th] = {"epsilon": epsilon(e, x), "nu": nu(e, z), "eta": eta(e, z), "eta_hat": eta_hat(e, z)}
    return out


@lru_cache(maxsize=None)
def qutrit_pair():
    b, t = appendix_a_bases()
    m1, m2 = ideal_measurement(b), ideal_measurement(t)
    return m1, m2, diamond_distance(m1, m2), unentangled_distinguishability(m1, m2)


@lru_cache(maxsize=None)
def leakage_example(d):
    theta, phi = conjugate_basis(d)
    n, comp = counterexample_channel(d)
    outs = np.stack([n(phi.projector(k)) for k in range(d)])
    pg = pgm_guessing_probability(outs)
    if d != 4:
        return pg, None, None
    return pg, constant_radius(comp, basis=theta), best_measurement_error(n, phi)


@lru_cache(maxsize=None)
def complementarity_cases():
    cases = {}
    for d in (2, 3):
        z, x = conjugate_basis(d)
        cases[("conjugate", d)] = (x, z, complementarity(x, z))
        cases[("identical", d)] = (z, z, complementarity(z, z))
    for k in range(50):
        d = 2 + k % 2
        x, z = random_basis(d, 1000 + k), random_basis(d, 5000 + k)
        cases[("random", k)] = (x, z, complementarity(x, z))
    return cases


@lru_cache(maxsize=None)
def complementarity_constants():
    z, x = conjugate_basis(2)
    qx, qz = ideal_measurement(x), ideal_measurement(z)
    return {"c_xz": nu(qx, z), "c_zx": nu(qz, x), "c_p": eta(qx, z), "c_hat": eta_hat(qx, z)}


def relation_reports(e):
    z, x = conjugate_basis(2)
    c = complementarity_constants()
    return check_theorem1(e, x, z, c["c_xz"], c["c_zx"]) + check_theorem2(e, x, z, c["c_p"], c["c_hat"])


@lru_cache(maxsize=None)
def relation_suite():
    devices = [(f"random{k}", random_instrument(2, 2 + k % 2, 7000 + k)) for k in range(100)]
    devices += [(f"mz{th:.4f}", mz_apparatus(th)) for th in MZ_GRID + (1e-3,)]
    return {name: relation_reports(e) for name, e in devices}


# criteria


def test_interferometer_closed_forms():
    with Timer() as t:
        res = mz_measures()
    worst = 0.0
    for th, m in res.items():
        worst = max(worst, abs(m["epsilon"].value - 0.5 * (1 - np.cos(th))))
        for key in ("nu", "eta", "eta_hat"):
            worst = max(worst, abs(m[key].value - 0.5 * (1 - np.sin(th))))
    ok = worst <= 1e-6
    record(1, "interferometer error and disturbances match closed forms", ok,
           f"max deviation {worst:.2e} over {len(res)} angles (tol 1e-6)", t.elapsed, "30s")
    assert ok


def test_qutrit_measurements_need_entanglement():
    with Timer() as t:
        m1, m2, r, dprime = qutrit_pair()
    rho = r.optimizer["input_state"]
    cert = diamond_certificate(m1.blocks - m2.blocks, rho, 3, 1)
    checks = {
        "product value": abs(dprime - np.sqrt(5) / 3) <= 1e-12,
        "entangled value": r.value >= np.sqrt(3) / 2 - 1e-7,
        "certificate": cert == r.value,
        "strict": r.value > dprime,
    }
    ok = all(checks.values())
    record(2, "entangled inputs distinguish the qutrit measurements better", ok,
           f"delta' = {dprime:.15f}, delta = {r.value:.10f} >= sqrt(3)/2 - 1e-7, certified by input state",
           t.elapsed, "10s")
    assert ok, checks


def test_leakage_counterexample():
    with Timer() as t:
        out = {d: leakage_example(d) for d in (2, 4)}
    dev = max(abs(out[d][0] - guess_probability_sum(counterexample_weights(d))) for d in (2, 4))
    closed = max(abs(out[d][0] - (d + np.sqrt(2) - 2) ** 2 / d**2) for d in (2, 4))
    _, rad, err = out[4]
    ok = dev <= 1e-9 and closed <= 1e-9 and rad.value >= 0.5 - 1e-6 and err.value >= 0.125 - 1e-6
    record(3, "square-root measurement guessing and leaking complement", ok,
           f"guess vs sum formula {dev:.1e}; radius {rad.value:.8f} >= 1/2; error {err.value:.8f} >= 1/8",
           t.elapsed, "5min")
    assert ok


def test_complementarity_values_and_closed_bounds():
    with Timer() as t:
        cases = complementarity_cases()
    worst_conj = worst_same = 0.0
    worst_slack = np.inf
    for (kind, k), (x, z, (cm, cp, ch)) in cases.items():
        if kind == "conjugate":
            worst_conj = max(worst_conj, *(abs(r.value - (k - 1) / k) for r in (cm, cp, ch)))
        elif kind == "identical":
            worst_same = max(worst_same, *(abs(r.value) for r in (cm, cp, ch)))
        else:
            ob = overlap_bound(x, z)
            worst_slack = min(worst_slack, cm.value - ob, cp.value - ob,
                              ch.value - demerit_bound(x, z), ch.value - demerit_bound(x, z, "rowP"))
    ok = worst_conj <= 1e-6 and worst_same <= 1e-7 and worst_slack >= -1e-6
    record(4, "complementarity of conjugate, identical and random bases", ok,
           f"conjugate dev {worst_conj:.1e}, identical dev {worst_same:.1e}, min bound slack {worst_slack:.2e}",
           t.elapsed, "5min")
    assert ok


def test_uncertainty_relations_suite():
    with Timer() as t:
        suite = relation_suite()
    min_slack = min(r.slack for reports in suite.values() for r in reports)
    # error vanishes at theta = 0: the square-root forms are nearly tight
    tight = [suite[f"mz{th:.4f}"] for th in (0.0, 1e-3)]
    near = max(min(r.slack for r in reports) for reports in tight)
    ok = min_slack >= -1e-6 and near <= 1e-3
    record(5, "uncertainty relations on 100 random instruments and the interferometer", ok,
           f"min slack {min_slack:.2e} over {4 * len(suite)} inequalities; tightest slack near zero error {near:.1e}",
           t.elapsed, "10min")
    assert ok


def test_strong_duality_everywhere():
    with Timer() as t:
        gaps = []
        for m in mz_measures().values():
            gaps += [r.gap for r in m.values()]
        _, _, r, _ = qutrit_pair()
        gaps += [r.gap, abs(r.optimizer["model_lower"] - r.upper)]
        _, rad, err = leakage_example(4)
        gaps += [rad.gap, err.gap]
        for _, _, results in complementarity_cases().values():
            gaps += [res.gap for res in results]
        gaps += [res.gap for res in complementarity_constants().values()]
        for reports in relation_suite().values():
            for rep in reports:
                gaps += list(rep.components["gaps"].values())
    worst = max(gaps)
    ok = worst <= 1e-6
    record(6, "min and max forms agree on every program above", ok,
           f"max gap {worst:.2e} over {len(gaps)} solves (tol 1e-6)", t.elapsed, "reuses 1-5")
    assert ok


def gaussian_checks():
    checks = {}
    checks["zero at c >= 1"] = all(gaussian_bound(c) == 0.0 for c in (1.0, 1.0 + 1e-12, 2.0, 1e3))
    checks["positive below 1"] = all(gaussian_bound(c) > 0 for c in (1e-3, 0.1, 0.5, 0.9, 1 - 1e-9))
    rel = max(abs(optimal_sigma_f(GaussianParams.from_c(c)) / golden_argmax_sigma_f(c) - 1) for c in (0.1, 0.5, 0.9))
    checks["optimal width"] = rel <= 1e-3
    quad = max(abs(gaussian_overlap(*w) - overlap_quadrature(*w)) for w in ((1.0, 0.5, 2.0), (0.3, 1.0, 0.7)))
    checks["overlap quadrature"] = quad <= 1e-9
    return checks, rel, quad


def endpoint_deviation():
    return max(abs(1 - gaussian_bound(1e-3, kind)) for kind in ("measurement", "preparation"))


def test_gaussian_closed_forms():
    with Timer() as t:
        checks, rel, quad = gaussian_checks()
        end = endpoint_deviation()
    ok = all(checks.values())
    record("7a", "position/momentum bound formulas", ok,
           f"width rel dev {rel:.1e} (tol 1e-3), overlap vs quadrature {quad:.1e} (tol 1e-9)", t.elapsed, "1min")
    # the small-c endpoint is checked separately below; it does not hold at the stated tolerance
    record("7b", "both curves within 1e-3 of 1 at c = 1e-3", end <= 1e-3,
           f"1 - bound = {end:.4e} at c = 1e-3; limit is 1 only as c -> 0 (see expected failure)", t.elapsed, "1min")
    assert ok, checks


@pytest.mark.xfail(strict=True, reason="1 - bound is about 1.5e-2 at c = 1e-3; the curves reach 1e-3 only near c = 1e-5")
def test_gaussian_curves_reach_one_at_small_c():
    assert endpoint_deviation() <= 1e-3


def test_gaussian_curves_tend_to_one():
    # the limit itself holds; the 1e-3 band is entered once c^(2/3) is about 1e-3/1.5
    assert max(abs(1 - gaussian_bound(1e-6, k)) for k in ("measurement", "preparation")) <= 1e-3


def test_dilation_continuity():
    with Timer() as t:
        worst = np.inf
        for k in range(50):
            d = 2 + k % 2
            e1 = random_channel(d, d, 9000 + k)
            if k < 25:
                e2 = random_channel(d, d, 9500 + k)
            else:
                # nearby channel, where the inequality is not trivially loose
                other = random_channel(d, d, 9500 + k)
                e2 = ChoiOperator(d, d, 0.97 * e1.matrix + 0.03 * other.matrix)
            env = d * d
            v1, _ = stinespring(e1, env_dim=env)
            v2, _ = stinespring(e2, env_dim=env)
            op = np.linalg.norm(v1.matrix - v2.matrix, 2)
            worst = min(worst, op + 1e-7 - diamond_distance(e1, e2).upper)
    ok = worst >= 0
    record(8, "channel distance bounded by dilation distance", ok,
           f"min margin {worst:.2e} over 50 pairs", t.elapsed, "2min")
    assert ok
