import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from functions.errors import (DegenerateBernoulli, InlineCheckFailed, InvalidParameter,
                              ZeroPostselection)
from services.protocol import (ZERO_POSTSELECTION_THRESHOLD, FieldState, ProtocolParams,
                               entangled_vector, evolve, success_probability)

logger = logging.getLogger(__name__)

QFI_STEP = 1e-5
PROBABILITY_STEP = 1e-6
BUDGET_SLACK = 1e-9


@dataclass(frozen=True)
class FisherReport:
    """Fisher information of one (N, omega, gamma) point"""
    i_joint: float
    i_postselected: float
    p: float
    f_post: float


class InformationBudget(NamedTuple):
    p_times_i: float
    f_post: float
    total: float
    n_atoms: int


def _check_atoms(n_atoms):
    if int(n_atoms) != n_atoms or n_atoms < 1:
        raise InvalidParameter(f"atom count must be a positive integer, got {n_atoms}")


def pure_state_qfi(psi, dpsi):
    """
    4 [<dpsi|dpsi>/<psi|psi> - |<psi|dpsi>|^2 / <psi|psi>^2]

    psi need not be normalized; the value is that of psi/|psi|.
    """
    psi = np.asarray(psi, dtype=complex)
    dpsi = np.asarray(dpsi, dtype=complex)
    norm_sq = float(np.vdot(psi, psi).real)
    cross = np.vdot(psi, dpsi)
    return 4.0 * (float(np.vdot(dpsi, dpsi).real) / norm_sq - abs(cross)**2 / norm_sq**2)


def numerical_qfi(builder, omega, step=QFI_STEP):
    """
    QFI with the derivative taken by central differences.

    Args:
        builder: omega -> state vector (any normalization)
        omega: evaluation point
        step: finite-difference step
    """
    dpsi = (np.asarray(builder(omega + step)) - np.asarray(builder(omega - step))) / (2.0 * step)
    return pure_state_qfi(builder(omega), dpsi)


def _branch_derivatives(state):
    """d/d(omega) of the two branches: -i m b+ and +i m b-"""
    m = state.branch_plus.spin.m_values()
    return -1j * m * state.branch_plus.amps, 1j * m * state.branch_minus.amps


def joint_qfi(params, field=None):
    """QFI of the joint atom-photon state with the exact omega-derivative"""
    if field is None:
        field = FieldState.x_polarized()
    state = evolve(params, field)
    d_plus, d_minus = _branch_derivatives(state)
    return pure_state_qfi(entangled_vector(state), np.concatenate([d_plus, d_minus]))


def cat_qfi(params, field=None):
    """QFI of the post-selected cat state with the exact omega-derivative"""
    if field is None:
        field = FieldState.x_polarized()
    state = evolve(params, field)
    post = FieldState.postselected(params.gamma)
    weight_plus, weight_minus = np.conj(post.c_plus), np.conj(post.c_minus)
    u = weight_plus * state.branch_plus.amps + weight_minus * state.branch_minus.amps
    d_plus, d_minus = _branch_derivatives(state)
    du = weight_plus * d_plus + weight_minus * d_minus
    if float(np.vdot(u, u).real) < ZERO_POSTSELECTION_THRESHOLD:
        raise ZeroPostselection(f"no cat state at gamma = {params.gamma}, omega = {params.omega}")
    return pure_state_qfi(u, du)


def qfi_joint(n_atoms):
    """I_at-f = N for the x-polarized photon and the equatorial preparation"""
    _check_atoms(n_atoms)
    return float(n_atoms)


def qfi_postselected(n_atoms, omega, gamma):
    """
    Closed-form QFI of the post-selected cat state:

        I = (N/2p) [1 + cos(2g) cos^(N-2)(w) (1 - N sin^2(w))
                     - (N/2p) cos^2(2g) cos^(2N-2)(w) sin^2(w)]

    Raises:
        ZeroPostselection: if p <= 1e-300
    """
    _check_atoms(n_atoms)
    p = success_probability(n_atoms, omega, gamma)
    if p <= ZERO_POSTSELECTION_THRESHOLD:
        raise ZeroPostselection(f"post-selection probability {p:.3e} at gamma = {gamma}, omega = {omega}")
    n = n_atoms
    cos_2g = math.cos(2.0 * gamma)
    cos_w, sin_sq = math.cos(omega), math.sin(omega)**2
    scale = 0.5 * n / p
    bracket = (1.0 + cos_2g * cos_w**(n - 2) * (1.0 - n * sin_sq)
               - scale * cos_2g**2 * cos_w**(2 * n - 2) * sin_sq)
    return scale * bracket


def _check_bernoulli(p, n_atoms, omega, gamma):
    if p <= 0.0 or p >= 1.0:
        raise DegenerateBernoulli(f"success probability {p} at N = {n_atoms}, omega = {omega}, gamma = {gamma}")


def classical_fisher_post(n_atoms, omega, gamma):
    """
    Classical Fisher information of the success/failure statistics:

        F_p = N^2 cos^2(2g) cos^(2N-2)(w) sin^2(w) / [1 - cos^2(2g) cos^(2N)(w)]

    Raises:
        DegenerateBernoulli: if p is exactly 0 or 1
    """
    _check_atoms(n_atoms)
    _check_bernoulli(success_probability(n_atoms, omega, gamma), n_atoms, omega, gamma)
    cos_2g_sq = math.cos(2.0 * gamma)**2
    cos_w = math.cos(omega)
    numerator = n_atoms**2 * cos_2g_sq * cos_w**(2 * n_atoms - 2) * math.sin(omega)**2
    return numerator / (1.0 - cos_2g_sq * cos_w**(2 * n_atoms))


def classical_fisher_numeric(n_atoms, omega, gamma, step=PROBABILITY_STEP):
    """F_p = (dp/dw)^2 / [p (1 - p)] with dp/dw by central differences"""
    _check_atoms(n_atoms)
    p = success_probability(n_atoms, omega, gamma)
    _check_bernoulli(p, n_atoms, omega, gamma)
    dp = (success_probability(n_atoms, omega + step, gamma)
          - success_probability(n_atoms, omega - step, gamma)) / (2.0 * step)
    return dp**2 / (p * (1.0 - p))


def information_budget(n_atoms, omega, gamma):
    """
    (p I, F_p, p I + F_p, N).

    Neither channel may exceed the joint QFI N; the sum is only reported.

    Raises:
        DegenerateBernoulli: if p is 0 or 1
        InlineCheckFailed: if p I or F_p exceeds N
    """
    p = success_probability(n_atoms, omega, gamma)
    _check_bernoulli(p, n_atoms, omega, gamma)
    p_times_i = p * qfi_postselected(n_atoms, omega, gamma)
    f_post = classical_fisher_post(n_atoms, omega, gamma)
    if p_times_i > n_atoms + BUDGET_SLACK:
        raise InlineCheckFailed(f"p I = {p_times_i} exceeds N = {n_atoms}")
    if f_post > n_atoms + BUDGET_SLACK:
        raise InlineCheckFailed(f"F_p = {f_post} exceeds N = {n_atoms}")
    return InformationBudget(p_times_i, f_post, p_times_i + f_post, n_atoms)


def fisher_report(n_atoms, omega, gamma):
    report = FisherReport(
        i_joint=qfi_joint(n_atoms),
        i_postselected=qfi_postselected(n_atoms, omega, gamma),
        p=success_probability(n_atoms, omega, gamma),
        f_post=classical_fisher_post(n_atoms, omega, gamma),
    )
    logger.debug(f"Fisher report N = {n_atoms}, omega = {omega:.6g}, gamma = {gamma:.6g}: {report}")
    return report


def oracle_deviation(n_atoms, omega, gamma):
    """
    Largest relative deviation between each closed form and its independent
    route: finite-difference QFI of the cat vector, finite-difference QFI of
    the joint state, and the finite-difference classical Fisher information.
    """
    params = ProtocolParams.equatorial(n_atoms, omega, gamma)

    def cat_vector(w):
        state = evolve(params.with_omega(w), FieldState.x_polarized())
        post = FieldState.postselected(gamma)
        return np.conj(post.c_plus) * state.branch_plus.amps + np.conj(post.c_minus) * state.branch_minus.amps

    def joint_vector(w):
        return entangled_vector(evolve(params.with_omega(w), FieldState.x_polarized()))

    pairs = [
        (qfi_postselected(n_atoms, omega, gamma), numerical_qfi(cat_vector, omega)),
        (qfi_joint(n_atoms), numerical_qfi(joint_vector, omega)),
    ]
    p = success_probability(n_atoms, omega, gamma)
    if 0.0 < p < 1.0:
        pairs.append((classical_fisher_post(n_atoms, omega, gamma),
                      classical_fisher_numeric(n_atoms, omega, gamma)))
    return max(_relative(a, b) for a, b in pairs)


def _relative(closed, oracle):
    scale = max(abs(closed), abs(oracle))
    # both values vanish, e.g. F_p at gamma = pi/4
    if scale < 1e-12:
        return abs(closed - oracle)
    return abs(closed - oracle) / scale
