import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import bloch_state, measurement_distance_grid, two_state_radius_grid
from uncertsdp.channels import (
    ChoiOperator,
    Instrument,
    compose,
    conjugate_basis,
    identity_channel,
    ideal_measurement,
    ideal_preparation,
    mz_apparatus,
    random_basis,
    random_channel,
    random_instrument,
)
from uncertsdp.gallery import appendix_a_bases
from uncertsdp.measures import (
    best_measurement_error,
    complementarity,
    constant_radius,
    diamond_certificate,
    diamond_distance,
    epsilon,
    eta,
    eta_hat,
    eta_tilde,
    nu,
    unentangled_distinguishability,
)

THETAS = (0.0, np.pi / 6, np.pi / 4, np.pi / 3, np.pi / 2)
seeds = st.integers(0, 10**6)


def identity_instrument(d):
    return Instrument(d, d, identity_channel(d).matrix[None])


def constant_instrument(d, state):
    # discard the input, prepare ``state``
    return Instrument(d, d, np.kron(state, np.eye(d))[None])


# diamond distance


def test_diamond_zero_for_identical_devices():
    e = random_instrument(2, 2, 3)
    r = diamond_distance(e, e)
    assert abs(r.value) < 1e-7 and abs(r.upper) < 1e-7


def test_diamond_conjugate_qubit_measurements_against_grid():
    z, x = conjugate_basis(2)
    qz, qx = ideal_measurement(z), ideal_measurement(x)
    r = diamond_distance(qx, qz)
    oracle = measurement_distance_grid(qx.povm(), qz.povm())
    assert r.value == pytest.approx(oracle, abs=1e-3)
    assert r.value == pytest.approx(1 / np.sqrt(2), abs=1e-7)
    assert r.gap <= 1e-6


def test_diamond_qutrit_pair_beats_unentangled():
    b, t = appendix_a_bases()
    m1, m2 = ideal_measurement(b), ideal_measurement(t)
    r = diamond_distance(m1, m2)
    assert r.value >= np.sqrt(3) / 2 - 1e-7
    assert r.upper >= r.value - 1e-12
    assert r.value > unentangled_distinguishability(m1, m2)


def test_diamond_certificate_is_a_lower_bound():
    e1, e2 = random_channel(2, 2, 1), random_channel(2, 2, 2)
    r = diamond_distance(e1, e2)
    diff = (e1.matrix - e2.matrix)[None]
    for rho in (np.eye(2) / 2, bloch_state([0.3, 0.1, 0.5]), bloch_state([0, 0, 1])):
        assert diamond_certificate(diff, rho, 2, 2) <= r.upper + 1e-7


def test_diamond_shape_mismatch():
    with pytest.raises(ValueError):
        diamond_distance(random_channel(2, 2, 0), random_channel(2, 3, 0))
    with pytest.raises(ValueError):
        diamond_distance(random_instrument(2, 2, 0), random_instrument(2, 3, 0))


@given(seeds)
@settings(max_examples=8)
def test_diamond_symmetry_and_triangle(seed):
    a, b, c = (random_channel(2, 2, seed + k) for k in range(3))
    ab, ba = diamond_distance(a, b), diamond_distance(b, a)
    assert abs(ab.value - ba.value) <= 1e-6
    bc, ac = diamond_distance(b, c), diamond_distance(a, c)
    assert ac.value <= ab.value + bc.value + 1e-6
    for r in (ab, bc, ac):
        assert -1e-7 <= r.value <= 1 + 1e-7
        assert r.gap <= 1e-6


@given(seeds)
@settings(max_examples=8)
def test_diamond_monotone_under_composition(seed):
    e1, e2 = random_channel(2, 2, seed), random_channel(2, 2, seed + 1)
    f = random_channel(2, 2, seed + 2)
    base = diamond_distance(e1, e2).upper
    assert diamond_distance(compose(f, e1), compose(f, e2)).value <= base + 1e-6
    assert diamond_distance(compose(e1, f), compose(e2, f)).value <= base + 1e-6


# unentangled distinguishability


def test_unentangled_examples():
    b, t = appendix_a_bases()
    m1, m2 = ideal_measurement(b), ideal_measurement(t)
    assert unentangled_distinguishability(m1, m1) == 0.0
    assert unentangled_distinguishability(m1, m2) == pytest.approx(np.sqrt(5) / 3, abs=1e-12)
    with pytest.raises(ValueError):
        unentangled_distinguishability(m1, ideal_measurement(conjugate_basis(2)[0]))


# error


@pytest.mark.parametrize("theta", THETAS)
def test_epsilon_interferometer(theta):
    _, x = conjugate_basis(2)
    r = epsilon(mz_apparatus(theta), x)
    assert r.value == pytest.approx(0.5 * (1 - np.cos(theta)), abs=1e-6)
    assert r.gap <= 1e-6
    post = r.optimizer["postprocessing"]
    assert np.all(post >= -1e-8) and np.allclose(post.sum(axis=0), 1, atol=1e-7)


def test_epsilon_ideal_device_is_zero():
    _, x = conjugate_basis(3)
    assert abs(epsilon(ideal_measurement(x, as_instrument=True), x).value) <= 1e-7
    assert abs(epsilon(ideal_measurement(x), x).value) <= 1e-7


@pytest.mark.parametrize("seed", range(4))
def test_epsilon_frozen_postprocessing_is_no_better(seed):
    _, x = conjugate_basis(2)
    e = random_instrument(2, 2, seed)
    free = epsilon(e, x).value
    frozen = epsilon(e, x, postprocess=np.eye(2)).value
    assert frozen >= free - 1e-7


def test_epsilon_rectangular_postprocessing():
    _, x = conjugate_basis(2)
    e = random_instrument(2, 3, 8)
    r = epsilon(e, x)
    assert r.optimizer["postprocessing"].shape == (2, 3)
    assert -1e-7 <= r.value <= 1 + 1e-7 and r.gap <= 1e-6


# disturbances


@pytest.mark.parametrize("theta", THETAS)
def test_disturbances_interferometer(theta):
    z, _ = conjugate_basis(2)
    e = mz_apparatus(theta)
    want = 0.5 * (1 - np.sin(theta))
    for f in (nu, eta, eta_hat, eta_tilde):
        r = f(e, z)
        assert r.value == pytest.approx(want, abs=1e-6), f.__name__
        assert r.gap <= 1e-6


@pytest.mark.parametrize("d", [2, 3])
def test_disturbances_of_identity_vanish(d):
    z, _ = conjugate_basis(d)
    e = identity_instrument(d)
    for f in (nu, eta, eta_hat, eta_tilde):
        assert abs(f(e, z).value) <= 1e-7, f.__name__


def test_nu_of_conjugate_measurement():
    z, x = conjugate_basis(2)
    assert nu(ideal_measurement(x), z).value == pytest.approx(0.5, abs=1e-6)


def test_eta_hat_of_constant_channel():
    z, _ = conjugate_basis(3)
    sigma = np.diag([0.5, 0.3, 0.2]).astype(complex)
    r = eta_hat(constant_instrument(3, sigma), z)
    assert r.value == pytest.approx(2 / 3, abs=1e-7)


@pytest.mark.parametrize("seed", range(6))
def test_random_instrument_measures_in_range(seed):
    z, x = conjugate_basis(2)
    e = random_instrument(2, 2, seed)
    for f in (epsilon, nu, eta):
        r = f(e, x if f is epsilon else z)
        assert -1e-7 <= r.value <= 1 + 1e-7
        assert r.gap <= 1e-6
    h = eta_hat(e, z)
    assert -1e-7 <= h.value <= 0.5 + 1e-7
    # pinched input with entangled references gives the same demerit value
    assert eta_tilde(e, z).value == pytest.approx(h.value, abs=1e-6)


# constant channels and complementarity


def test_constant_radius_examples():
    same = ChoiOperator(2, 2, np.kron(bloch_state([0.2, 0, 0.1]), np.eye(2)))
    assert abs(constant_radius(same).value) <= 1e-7
    z, _ = conjugate_basis(2)
    r = constant_radius(ideal_preparation(z))
    oracle = two_state_radius_grid(np.array([0, 0, 1.0]), np.array([0, 0, -1.0]))
    assert r.value == pytest.approx(0.5, abs=1e-7)
    assert r.value == pytest.approx(oracle, abs=1e-7)


@pytest.mark.parametrize("seed", range(4))
def test_constant_radius_never_exceeds_joint_convexity_bound(seed):
    f = random_channel(3, 3, seed)
    assert constant_radius(f).value <= 2 / 3 + 1e-7


@pytest.mark.parametrize("d", [2, 3])
def test_complementarity_identical_and_conjugate(d):
    z, x = conjugate_basis(d)
    for r in complementarity(z, z):
        assert abs(r.value) <= 1e-7
    for r in complementarity(x, z):
        assert r.value == pytest.approx((d - 1) / d, abs=1e-6)


@pytest.mark.parametrize("seed", range(3))
def test_measurement_complementarity_equals_error(seed):
    x, z = random_basis(2, seed), random_basis(2, seed + 100)
    c_m = nu(ideal_measurement(x), z).value
    assert c_m == pytest.approx(epsilon(ideal_measurement(x), z).value, abs=1e-6)


# best measurement after a channel


def test_best_measurement_error_examples():
    z, x = conjugate_basis(2)
    assert abs(best_measurement_error(identity_channel(2), x).value) <= 1e-7
    # a constant channel leaves only guessing; inputs x_k already show 1 - P(k) >= (d-1)/d
    for d in (2, 3):
        zz, xx = conjugate_basis(d)
        const = ChoiOperator(d, d, np.kron(np.eye(d) / d, np.eye(d)))
        r = best_measurement_error(const, xx)
        assert r.value == pytest.approx((d - 1) / d, abs=1e-6)
    r = best_measurement_error(random_channel(2, 3, 5), x)
    povm = r.optimizer["povm"]
    assert np.allclose(povm.sum(axis=0), np.eye(3), atol=1e-7)
    assert min(np.linalg.eigvalsh(p)[0] for p in povm) >= -1e-8


def test_epsilon_at_nearly_vanishing_error():
    # the optimum sits on a degenerate face here; the solver must still certify it
    _, x = conjugate_basis(2)
    for theta in (1e-3, 1e-4):
        r = epsilon(mz_apparatus(theta), x)
        assert r.value == pytest.approx(0.5 * (1 - np.cos(theta)), abs=1e-8)
        assert r.gap <= 1e-6
