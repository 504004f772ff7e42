import numpy as np
import pytest
from scipy.linalg import block_diag

from oracles import closed_overlap, golden_argmax_sigma_f, overlap_quadrature
from uncertsdp.bounds import (
    BoundReport,
    GaussianParams,
    check_corollary1,
    check_theorem1,
    check_theorem2,
    demerit_bound,
    gaussian_bound,
    gaussian_overlap,
    measurement_gap,
    optimal_sigma_f,
    overlap_bound,
    overlap_matrix,
)
from uncertsdp.channels import (
    Basis,
    computational_basis,
    conjugate_basis,
    identity_channel,
    ideal_measurement,
    mz_apparatus,
    random_basis,
    random_instrument,
)
from uncertsdp.gallery import counterexample_channel
from uncertsdp.measures import complementarity, eta_hat

MZ_THETAS = np.linspace(0, np.pi / 2, 11)


# closed-form complementarity bounds


@pytest.mark.parametrize("d", [2, 3, 5])
def test_bounds_for_conjugate_and_identical_bases(d):
    z, x = conjugate_basis(d)
    assert np.allclose(overlap_matrix(x, z), 1 / d)
    assert overlap_bound(x, z) == pytest.approx((d - 1) / d, abs=1e-12)
    assert demerit_bound(x, z) == pytest.approx((d - 1) / d, abs=1e-12)
    assert demerit_bound(x, z, "rowP") == pytest.approx((d - 1) / d, abs=1e-12)
    assert overlap_bound(z, z) == pytest.approx(0, abs=1e-12)
    assert demerit_bound(z, z) <= 1e-12


def shared_tail_bases(d=5, block=3):
    """Computational basis and a basis that is Fourier on the first ``block`` levels and shares the rest."""
    _, f = conjugate_basis(block)
    return computational_basis(d), Basis(block_diag(f.vectors, np.eye(d - block)))


def test_demerit_bound_can_be_trivial_while_sdp_is_not():
    x, z = shared_tail_bases()
    assert overlap_bound(x, z) == pytest.approx(2 / 5, abs=1e-12)
    assert demerit_bound(x, z) == pytest.approx(0, abs=1e-12)
    # spreading over one Fourier-block outcome and the shared tail keeps every column within 2/3
    c_hat = eta_hat(ideal_measurement(x), z)
    assert c_hat.value >= 2 / 15 - 1e-6
    assert demerit_bound(x, z, "rowP") <= c_hat.value + 1e-6


def test_demerit_variant_validation():
    z, x = conjugate_basis(2)
    with pytest.raises(ValueError):
        demerit_bound(x, z, "max")
    with pytest.raises(ValueError):
        overlap_matrix(x, computational_basis(3))


@pytest.mark.parametrize("seed", range(6))
def test_closed_forms_never_exceed_sdp(seed):
    d = 2 + seed % 2
    x, z = random_basis(d, seed), random_basis(d, seed + 50)
    c_m, c_p, c_hat = complementarity(x, z)
    ob = overlap_bound(x, z)
    assert ob <= c_m.value + 1e-6 and ob <= c_p.value + 1e-6
    for variant in ("uniform", "rowP"):
        assert demerit_bound(x, z, variant) <= c_hat.value + 1e-6


# uncertainty relations


def test_bound_report_slack():
    r = BoundReport("a >= b", 1.0, 0.5)
    assert r.slack == 0.5 and r.satisfied
    r = BoundReport("a <= b", 1.0, 0.5, "<=")
    assert r.slack == -0.5 and not r.satisfied
    assert r.as_dict()["satisfied"] is False


@pytest.mark.parametrize("theta", MZ_THETAS)
def test_relations_on_interferometer(theta):
    z, x = conjugate_basis(2)
    e = mz_apparatus(theta)
    for r in check_theorem1(e, x, z) + check_theorem2(e, x, z):
        assert r.satisfied, r.name
        assert r.rhs == pytest.approx(0.5, abs=1e-6)


def test_relations_nearly_tight_at_vanishing_error():
    z, x = conjugate_basis(2)
    r1, _ = check_theorem1(mz_apparatus(0.0), x, z)
    p1, p2 = check_theorem2(mz_apparatus(0.0), x, z)
    for r in (r1, p1, p2):
        assert r.slack <= 1e-3


def test_relations_for_ideal_and_identity_devices():
    z, x = conjugate_basis(3)
    ideal = ideal_measurement(x, as_instrument=True)
    r1, r2 = check_theorem1(ideal, x, z)
    assert r1.satisfied and r2.satisfied
    assert r1.components["epsilon_X"] == pytest.approx(0, abs=1e-7)
    for r in check_theorem2(ideal, x, z):
        assert r.satisfied


@pytest.mark.parametrize("seed", range(5))
def test_relations_random_qubit_instruments(seed):
    z, x = conjugate_basis(2)
    e = random_instrument(2, 2, seed)
    for r in check_theorem1(e, x, z) + check_theorem2(e, x, z):
        assert r.satisfied, (r.name, r.slack)


def test_leakage_bound_examples():
    z, x = conjugate_basis(2)
    r = check_corollary1(identity_channel(2), x, z)
    assert r.satisfied
    assert r.components["epsilon"] == pytest.approx(0, abs=1e-7)
    # the identity leaks nothing to its trivial environment
    assert abs(r.lhs) <= 1e-7
    n, _ = counterexample_channel(2)
    zz, xx = conjugate_basis(n.dim_in)
    assert check_corollary1(n, xx, zz).satisfied


# position and momentum


def test_gaussian_bound_clamps_at_precision_limit():
    for c in (1.0, 1.5, 10.0, 1e3):
        assert gaussian_bound(c) == 0.0
    for c in (1e-3, 0.1, 0.5, 0.9, 0.999):
        assert gaussian_bound(c) > 0
        assert gaussian_bound(c, "preparation") > 0
    assert gaussian_bound(GaussianParams(0.25, 1.0)) == gaussian_bound(0.5)
    with pytest.raises(ValueError):
        gaussian_bound(0.0)
    with pytest.raises(ValueError):
        gaussian_bound(0.5, "both")


def test_gaussian_params():
    p = GaussianParams.from_c(0.4, sigma_P=2.0)
    assert p.c == pytest.approx(0.4)
    assert p.sigma_P_hat == pytest.approx(1 / (2 * p.sigma_Q))
    with pytest.raises(ValueError):
        GaussianParams(0.0, 1.0)
    with pytest.raises(ValueError):
        GaussianParams(1.0, -1.0)


@pytest.mark.parametrize("c", [0.1, 0.5, 0.9])
def test_optimal_sigma_f_against_golden_section(c):
    p = GaussianParams.from_c(c)
    assert optimal_sigma_f(p) == pytest.approx(golden_argmax_sigma_f(c), rel=1e-3)
    # substituting the optimal width reproduces the closed form
    assert measurement_gap(optimal_sigma_f(p), p) == pytest.approx(gaussian_bound(p), abs=1e-9)


def test_optimal_sigma_f_monotone_and_domain():
    widths = [optimal_sigma_f(GaussianParams.from_c(c)) for c in (0.9, 0.5, 0.1, 0.01)]
    assert np.all(np.diff(widths) > 0)
    with pytest.raises(ValueError):
        optimal_sigma_f(GaussianParams.from_c(1.0))


def test_gaussian_overlap_cases():
    assert gaussian_overlap(0, 0, 1.0) == 1.0
    assert gaussian_overlap(1.0, 1.0, 1.0) == pytest.approx(1 / np.sqrt(3), abs=1e-15)
    assert gaussian_overlap(1.0, 0.5, 2.0) == pytest.approx(overlap_quadrature(1.0, 0.5, 2.0), abs=1e-9)
    assert gaussian_overlap(1.0, 0.5, 2.0) == pytest.approx(closed_overlap(1.0, 0.5, 2.0), abs=1e-15)
    with pytest.raises(ValueError):
        gaussian_overlap(1.0, 1.0, 0.0)


def test_gaussian_bounds_agree_for_small_c():
    for c in np.logspace(-4, -2, 5):
        assert abs(gaussian_bound(c) - gaussian_bound(c, "preparation")) <= 1e-3
    cs = np.logspace(-3, 3, 31)
    meas = [gaussian_bound(c) for c in cs]
    prep = [gaussian_bound(c, "preparation") for c in cs]
    assert np.all(np.diff(meas) <= 1e-15) and np.all(np.diff(prep) < 0)
