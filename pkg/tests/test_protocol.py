import math

import numpy as np
import pytest

from functions.errors import InvalidParameter, ZeroPostselection
from services.protocol import (FieldState, ProtocolParams, build_cat, entangled_vector, evolve,
                               field_overlap, normalization_closed_form, postselect,
                               success_probability)
from services.spin_core import BlochAngles, coherent_state, inner_product, spin_from_atoms

OMEGA = math.pi / 100


def explicit_cat(params):
    """Two-component superposition written directly in coherent states"""
    j, omega, gamma = params.spin.j, params.omega, params.gamma
    theta, phi = params.prep.theta, params.prep.phi
    plus = coherent_state(params.spin, BlochAngles(theta, phi + omega)).amps
    minus = coherent_state(params.spin, BlochAngles(theta, phi - omega)).amps
    u = (math.sin(gamma - math.pi / 4) * np.exp(1j * j * omega) * plus
         + math.cos(gamma - math.pi / 4) * np.exp(-1j * j * omega) * minus) / math.sqrt(2)
    return u / np.linalg.norm(u)


def test_field_state_validation():
    with pytest.raises(InvalidParameter):
        FieldState(1.0, 1.0)
    assert np.allclose(FieldState.x_polarized().as_array(), [1 / math.sqrt(2)] * 2)


def test_omega_range():
    with pytest.raises(InvalidParameter):
        ProtocolParams.equatorial(10, 4.0, 0.1)
    assert ProtocolParams.equatorial(10, math.pi, 0.1).omega == math.pi


def test_evolution_branches():
    params = ProtocolParams.equatorial(10, OMEGA, 0.3)
    state = evolve(params, FieldState.x_polarized())
    assert state.norm_sq() == pytest.approx(1.0, abs=1e-12)
    j = params.spin.j
    plus = np.exp(1j * j * OMEGA) * coherent_state(params.spin, BlochAngles(math.pi / 2, OMEGA)).amps
    assert np.allclose(state.branch_plus.amps, plus / math.sqrt(2), atol=1e-12)
    overlap = abs(inner_product(state.branch_plus, state.branch_minus))**2
    overlap /= state.branch_plus.norm_sq() * state.branch_minus.norm_sq()
    assert overlap == pytest.approx(0.990, abs=5e-4)
    assert entangled_vector(state).shape == (22,)


def test_no_evolution_is_a_product_state():
    params = ProtocolParams.equatorial(6, 0.0, 0.3)
    state = evolve(params, FieldState.x_polarized())
    assert np.allclose(state.branch_plus.amps, state.branch_minus.amps)


def test_circular_polarization_leaves_one_branch():
    params = ProtocolParams.equatorial(6, OMEGA, 0.3)
    state = evolve(params, FieldState(1.0, 0.0))
    assert np.allclose(state.branch_minus.amps, 0.0)


def test_cat_matches_explicit_superposition(rng):
    for _ in range(20):
        n = int(rng.integers(1, 101))
        params = ProtocolParams(spin_from_atoms(n), BlochAngles(float(rng.uniform(0.1, 3.0)), float(rng.uniform(0, 6))),
                                float(rng.uniform(-0.5, 0.5)), float(rng.uniform(0.01, math.pi / 2)))
        cat = build_cat(params)
        assert abs(cat.vector.norm_sq() - 1.0) < 1e-12
        assert np.allclose(cat.vector.amps, explicit_cat(params), atol=1e-12)


def test_norm_matches_closed_forms(rng):
    for _ in range(40):
        n = int(rng.integers(1, 101))
        theta = float(rng.uniform(0.0, math.pi))
        params = ProtocolParams(spin_from_atoms(n), BlochAngles(theta, 0.2),
                                float(rng.uniform(-1.0, 1.0)), float(rng.uniform(0.0, math.pi / 2)))
        cat = build_cat(params)
        assert abs(cat.norm_sq - normalization_closed_form(params)) < 1e-10
        assert cat.norm_sq > 0


def test_equatorial_success_probability(rng):
    for _ in range(40):
        n = int(rng.integers(1, 101))
        omega, gamma = float(rng.uniform(-1.0, 1.0)), float(rng.uniform(0.0, math.pi / 2))
        cat = build_cat(ProtocolParams.equatorial(n, omega, gamma))
        assert abs(cat.success_prob - success_probability(n, omega, gamma)) < 1e-10
        assert cat.success_prob == cat.norm_sq


def test_success_probability_values():
    assert success_probability(10, 0.4, math.pi / 4) == pytest.approx(0.5, abs=1e-15)
    assert success_probability(100, OMEGA, 0.0) == pytest.approx(0.5 * (1 - math.cos(OMEGA)**100), rel=1e-14)
    assert success_probability(100, OMEGA, 0.0) == pytest.approx(0.02408, abs=1e-5)
    assert success_probability(3, 0.0, math.pi / 2) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(InvalidParameter):
        success_probability(0, OMEGA, 0.1)


def test_success_probability_stays_in_unit_interval():
    for n in (1, 2, 5, 10, 50, 100):
        for omega in np.linspace(-math.pi + 1e-9, math.pi, 37):
            for gamma in np.linspace(0, math.pi / 2, 19):
                assert 0.0 <= success_probability(n, omega, gamma) <= 1.0


def test_unbiased_angle_gives_single_component():
    params = ProtocolParams.equatorial(10, OMEGA, math.pi / 4)
    cat = build_cat(params)
    minus = coherent_state(params.spin, BlochAngles(math.pi / 2, -OMEGA))
    assert abs(inner_product(minus, cat.vector)) == pytest.approx(1.0, abs=1e-12)


def test_no_evolution_returns_initial_state():
    params = ProtocolParams.equatorial(10, 0.0, 0.4)
    cat = build_cat(params)
    initial = coherent_state(params.spin, params.prep)
    assert abs(inner_product(initial, cat.vector)) == pytest.approx(1.0, abs=1e-12)


def test_orthogonal_selection_without_evolution():
    with pytest.raises(ZeroPostselection):
        build_cat(ProtocolParams.equatorial(10, 0.0, 0.0))
    for n_atoms in (1, 2, 50, 100):
        with pytest.raises(ZeroPostselection):
            build_cat(ProtocolParams.equatorial(n_atoms, 0.0, 0.0))


def test_postselected_polarization():
    orthogonal = FieldState.postselected(0.0)
    assert orthogonal.c_plus == -orthogonal.c_minus
    assert orthogonal.c_plus + orthogonal.c_minus == 0.0
    for gamma in np.linspace(-math.pi, math.pi, 37):
        post = FieldState.postselected(float(gamma))
        assert post.c_plus == pytest.approx(math.sin(gamma - math.pi / 4), abs=1e-15)
        assert post.c_minus == pytest.approx(math.cos(gamma - math.pi / 4), abs=1e-15)


def test_post_selection_near_pre_selection_keeps_initial_state():
    params = ProtocolParams.equatorial(10, OMEGA, math.pi / 2)
    cat = build_cat(params)
    fidelity = abs(inner_product(coherent_state(params.spin, params.prep), cat.vector))**2
    assert fidelity > 0.995
    assert fidelity > 1 - params.spin.n_atoms * OMEGA**2


def test_general_field_uses_the_vector_norm():
    params = ProtocolParams.equatorial(8, 0.2, 0.5)
    field = FieldState(math.cos(0.3), 1j * math.sin(0.3))
    cat = postselect(evolve(params, field), params.gamma)
    assert abs(cat.vector.norm_sq() - 1.0) < 1e-12
    assert 0.0 < cat.norm_sq <= 1.0


def test_field_overlap():
    pre = FieldState.x_polarized()
    for gamma in (0.0, 0.3, math.pi / 4, math.pi / 2):
        assert field_overlap(pre, FieldState.postselected(gamma)) == pytest.approx(math.sin(gamma)**2, abs=1e-15)
