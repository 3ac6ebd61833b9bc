import math

import numpy as np
import pytest

from functions.errors import DivergentWeakValue, InvalidParameter, NoPeak
from services.protocol import FieldState, ProtocolParams, success_probability
from services.spin_core import BlochAngles, SpinJ
from services.phase_dist import (f_kernel, find_peaks, linear_response_density, phase_density,
                                 phase_density_closed_form, phase_profile, stokes_weak_value,
                                 taylor_shift_check, weak_value)
from services.specfun import binomial

OMEGA = math.pi / 100


def double_sum_density(n_atoms, omega, gamma, phi):
    """P(phi) as the modulus squared of two binomial sums"""
    two_j = n_atoms
    j = two_j / 2
    s = math.sin(gamma - math.pi / 4)
    c = math.cos(gamma - math.pi / 4)
    total = 0j
    for k in range(two_j + 1):
        m = k - j
        weight = binomial(two_j, k) * np.exp(1j * k * phi)
        total += weight * (s * np.exp(-1j * m * omega) + c * np.exp(1j * m * omega))
    return 0.5**(2 * two_j + 1) * abs(total)**2 / success_probability(n_atoms, omega, gamma)


def test_routes_agree(rng):
    for _ in range(30):
        n = int(rng.integers(1, 101))
        omega = float(rng.uniform(-0.3, 0.3))
        gamma = float(rng.uniform(0.01, math.pi / 2))
        params = ProtocolParams.equatorial(n, omega, gamma)
        phis = rng.uniform(-math.pi, math.pi, 7)
        vector = phase_density(params, phis)
        closed = phase_density_closed_form(params, phis)
        expanded = np.array([double_sum_density(n, omega, gamma, phi) for phi in phis])
        assert np.allclose(vector, closed, rtol=1e-10, atol=1e-12)
        assert np.allclose(expanded, closed, rtol=1e-10, atol=1e-12)


def test_scalar_density():
    params = ProtocolParams.equatorial(10, OMEGA, 0.2)
    value = phase_density(params, 0.05)
    assert isinstance(value, float)
    assert value == pytest.approx(float(phase_density_closed_form(params, 0.05)), rel=1e-10)


def test_closed_form_needs_equatorial_preparation():
    params = ProtocolParams(SpinJ(10), BlochAngles(1.0, 0.0), OMEGA, 0.2)
    with pytest.raises(InvalidParameter):
        phase_density_closed_form(params, 0.0)


def test_kernel():
    assert f_kernel(SpinJ(10), 0.0) == pytest.approx(2.0**10)
    assert f_kernel(SpinJ(10), math.pi) == pytest.approx(0.0, abs=1e-10)
    assert f_kernel(SpinJ(2), math.pi / 2) == pytest.approx(2.0)
    phis = np.linspace(-3.0, 3.0, 13)
    for two_j in (1, 2, 7, 12):
        closed = (2 * np.cos(phis / 2))**two_j
        assert np.allclose(f_kernel(SpinJ(two_j), phis), closed, rtol=1e-10, atol=1e-10)


def test_profile_is_non_negative_and_sized():
    profile = phase_profile(ProtocolParams.equatorial(10, OMEGA, 0.0), n_phi=501)
    assert profile.phis.shape == (501,)
    assert np.all(profile.values >= 0)
    assert profile.phis[0] == pytest.approx(-math.pi / 2)


def test_symmetric_at_orthogonal_selection():
    params = ProtocolParams.equatorial(10, OMEGA, 0.0)
    phis = np.linspace(0.0, 1.5, 40)
    assert np.allclose(phase_density_closed_form(params, phis), phase_density_closed_form(params, -phis),
                       rtol=1e-12, atol=1e-15)


def test_swapped_weights_mirror_the_profile():
    phis = np.linspace(-1.0, 1.0, 41)
    for gamma in (0.1, 0.5, 1.2):
        original = phase_density_closed_form(ProtocolParams.equatorial(10, OMEGA, gamma), phis)
        swapped = phase_density_closed_form(ProtocolParams.equatorial(10, OMEGA, math.pi - gamma), -phis)
        assert np.allclose(original, swapped, rtol=1e-12, atol=1e-15)


def test_single_peak_without_evolution():
    params = ProtocolParams.equatorial(10, 0.0, 0.3)
    phis = np.linspace(-0.5, 0.5, 101)
    values = phase_density_closed_form(params, phis)
    assert phis[np.argmax(values)] == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(InvalidParameter):
        find_peaks(params)


def test_amplification_factors_at_reference_point():
    small = find_peaks(ProtocolParams.equatorial(10, OMEGA, math.pi / 100))
    large = find_peaks(ProtocolParams.equatorial(100, OMEGA, math.pi / 100))
    assert small.scaled_shift == pytest.approx(15.0, abs=0.75)
    assert large.scaled_shift == pytest.approx(5.8, abs=0.3)
    assert small.left_peak_phi < 0


def test_peak_structure_follows_post_selection():
    single = find_peaks(ProtocolParams.equatorial(10, OMEGA, math.pi / 2))
    assert single.n_peaks == 1
    assert single.scaled_shift < 1
    assert not single.dip_at_zero

    double = find_peaks(ProtocolParams.equatorial(10, OMEGA, 0.0))
    assert double.n_peaks == 2
    assert double.dip_at_zero

    counts = [find_peaks(ProtocolParams.equatorial(10, OMEGA, g)).n_peaks
              for g in np.linspace(math.pi / 2, 0.0, 25)]
    assert set(counts) <= {1, 2}
    assert counts[0] == 1 and counts[-1] == 2


def test_symmetric_peaks_at_orthogonal_selection():
    params = ProtocolParams.equatorial(10, OMEGA, 0.0)
    phis = np.linspace(-math.pi / 2, math.pi / 2, 20001)
    values = phase_density_closed_form(params, phis)
    right = phis[np.argmax(np.where(phis > 0, values, -1))]
    left = find_peaks(params).left_peak_phi
    assert left == pytest.approx(-right, abs=2e-4)


@pytest.mark.parametrize("n_atoms", [10, 100])
def test_shift_decreases_with_gamma(n_atoms):
    gammas = np.linspace(math.pi / 100, math.pi / 2, 50)
    shifts = [find_peaks(ProtocolParams.equatorial(n_atoms, OMEGA, g)).scaled_shift for g in gammas]
    assert all(later <= earlier + 1e-6 for earlier, later in zip(shifts, shifts[1:]))


def test_larger_ensembles_amplify_less():
    for gamma in (math.pi / 100, math.pi / 60, math.pi / 30):
        small = find_peaks(ProtocolParams.equatorial(10, OMEGA, gamma)).scaled_shift
        large = find_peaks(ProtocolParams.equatorial(100, OMEGA, gamma)).scaled_shift
        assert large < small


def test_no_peak_in_a_window_without_maximum():
    params = ProtocolParams.equatorial(10, OMEGA, math.pi / 2)
    with pytest.raises(NoPeak):
        find_peaks(params, window=(0.5, 1.0), n_coarse=501)


def test_weak_value():
    assert weak_value(math.pi / 4).A == pytest.approx(1.0, abs=1e-12)
    assert weak_value(math.pi / 2).A == pytest.approx(0.0, abs=1e-12)
    model = weak_value(math.pi / 100, OMEGA)
    assert model.A == pytest.approx(31.82, abs=5e-3)
    assert model.predicted_shift == pytest.approx(-model.A * OMEGA)
    with pytest.raises(DivergentWeakValue):
        weak_value(0.0)


def test_stokes_operator_form(rng):
    pre = FieldState.x_polarized()
    for gamma in rng.uniform(0.01, math.pi - 0.01, 20):
        value = stokes_weak_value(pre, FieldState.postselected(gamma))
        assert abs(value - 1 / math.tan(gamma)) < 1e-12 * max(1.0, abs(value))
    with pytest.raises(DivergentWeakValue):
        stokes_weak_value(pre, FieldState.postselected(0.0))


def test_linear_regime():
    check = taylor_shift_check(ProtocolParams.equatorial(10, math.pi / 1000, math.pi / 6))
    assert check.relative_error < 0.05
    assert check.predicted_shift == pytest.approx(-math.sqrt(3) * math.pi / 1000, rel=1e-12)
    assert check.true_shift < 0


def test_taylor_picture_breaks_down_near_orthogonality():
    true_shift, predicted, error = taylor_shift_check(ProtocolParams.equatorial(10, OMEGA, math.pi / 100))
    assert error > 0.5
    assert abs(predicted) > abs(true_shift)


def test_no_shift_at_parallel_selection():
    check = taylor_shift_check(ProtocolParams.equatorial(10, OMEGA, math.pi / 2))
    assert abs(check.true_shift) < 1e-6
    assert abs(check.predicted_shift) < 1e-15
    assert check.relative_error < 1e-6


def test_shift_check_preconditions():
    with pytest.raises(InvalidParameter):
        taylor_shift_check(ProtocolParams.equatorial(10, OMEGA, 0.0))
    with pytest.raises(InvalidParameter):
        taylor_shift_check(ProtocolParams.equatorial(10, 0.0, 0.5))


def test_linear_response_tracks_exact_profile_in_weak_regime():
    params = ProtocolParams.equatorial(10, math.pi / 1000, math.pi / 6)
    phis = np.linspace(-0.5, 0.5, 201)
    exact = phase_density_closed_form(params, phis)
    linear = linear_response_density(params, phis)
    assert np.max(np.abs(exact - linear)) < 1e-3 * np.max(exact)
