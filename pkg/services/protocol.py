import logging
import math
from dataclasses import dataclass

import numpy as np

from functions.errors import InvalidParameter, ZeroPostselection
from services.spin_core import (BlochAngles, DickeVector, SpinJ, coherent_state,
                                rotate_phase, spin_from_atoms)

logger = logging.getLogger(__name__)

FIELD_NORM_TOLERANCE = 1e-12
# only the measure-zero point gamma = 0, omega = 0 is genuinely singular
ZERO_POSTSELECTION_THRESHOLD = 1e-300


@dataclass(frozen=True)
class FieldState:
    """Single-photon polarization c+ |1+, 0-> + c- |0+, 1->"""
    c_plus: complex
    c_minus: complex

    def __post_init__(self):
        norm_sq = abs(self.c_plus)**2 + abs(self.c_minus)**2
        if abs(norm_sq - 1.0) > FIELD_NORM_TOLERANCE:
            raise InvalidParameter(f"field amplitudes must satisfy |c+|^2 + |c-|^2 = 1, got {norm_sq}")

    @classmethod
    def x_polarized(cls):
        return cls(1.0 / math.sqrt(2.0), 1.0 / math.sqrt(2.0))

    @classmethod
    def postselected(cls, gamma):
        """
        Post-selected polarization sin(gamma - pi/4), cos(gamma - pi/4).

        Written as (sin g - cos g)/sqrt(2), (cos g + sin g)/sqrt(2) so the two
        amplitudes cancel exactly at gamma = 0.
        """
        sin_g, cos_g = math.sin(gamma), math.cos(gamma)
        return cls((sin_g - cos_g) / math.sqrt(2.0), (cos_g + sin_g) / math.sqrt(2.0))

    def as_array(self):
        return np.array([self.c_plus, self.c_minus], dtype=complex)


@dataclass(frozen=True)
class ProtocolParams:
    """
    Everything needed to build the heralded cat state.

    omega is the accumulated phase of the dispersive interaction, gamma the
    post-selection angle.
    """
    spin: SpinJ
    prep: BlochAngles
    omega: float
    gamma: float

    def __post_init__(self):
        if not -math.pi < self.omega <= math.pi:
            raise InvalidParameter(f"omega must lie in (-pi, pi], got {self.omega}")

    @classmethod
    def equatorial(cls, n_atoms, omega, gamma, phi=0.0):
        """Preparation on the equator, theta = pi/2"""
        return cls(spin_from_atoms(n_atoms), BlochAngles(math.pi / 2.0, phi), omega, gamma)

    def with_omega(self, omega):
        return ProtocolParams(self.spin, self.prep, omega, self.gamma)

    def with_gamma(self, gamma):
        return ProtocolParams(self.spin, self.prep, self.omega, gamma)


@dataclass(frozen=True)
class EntangledState:
    """Atomic branches attached to |1+, 0-> and |0+, 1-> after the interaction"""
    branch_plus: DickeVector
    branch_minus: DickeVector

    def norm_sq(self):
        return self.branch_plus.norm_sq() + self.branch_minus.norm_sq()


@dataclass(frozen=True)
class CatState:
    """Normalized post-selected atomic state with its normalization and success probability"""
    vector: DickeVector
    norm_sq: float
    success_prob: float


def evolve(params, field):
    """
    Endpoint of the dispersive evolution on |theta, phi>|field>.

    Each branch is the prepared coherent state rotated by +/-omega about z,
    which carries the e^(+/- i j omega) phases of the joint state.

    Args:
        params: ProtocolParams
        field: FieldState (pre-selected polarization)

    Returns:
        EntangledState
    """
    prepared = coherent_state(params.spin, params.prep)
    branch_plus = rotate_phase(prepared, params.omega).scaled(field.c_plus)
    branch_minus = rotate_phase(prepared, -params.omega).scaled(field.c_minus)
    return EntangledState(branch_plus, branch_minus)


def entangled_vector(state):
    """Joint atom-photon vector: branch_plus followed by branch_minus"""
    return np.concatenate([state.branch_plus.amps, state.branch_minus.amps])


def postselect(state, gamma):
    """
    Project the photon onto sin(gamma - pi/4)|1+,0-> + cos(gamma - pi/4)|0+,1->.

    Returns:
        CatState with the normalized atomic vector and norm_sq = ||u||^2

    Raises:
        ZeroPostselection: if ||u||^2 is (numerically) zero
    """
    post = FieldState.postselected(gamma)
    unnormalized = (state.branch_plus.scaled(np.conj(post.c_plus))
                    + state.branch_minus.scaled(np.conj(post.c_minus)))
    norm_sq = unnormalized.norm_sq()
    if norm_sq < ZERO_POSTSELECTION_THRESHOLD:
        raise ZeroPostselection(f"post-selection probability {norm_sq:.3e} at gamma = {gamma}")
    logger.debug(f"Post-selection at gamma = {gamma:.6g}: norm^2 = {norm_sq:.6e}")
    return CatState(unnormalized.scaled(1.0 / math.sqrt(norm_sq)), norm_sq, norm_sq)


def build_cat(params, field=None):
    """Evolve and post-select; x-polarized pre-selection unless a field is given"""
    if field is None:
        field = FieldState.x_polarized()
    return postselect(evolve(params, field), params.gamma)


def success_probability(n_atoms, omega, gamma):
    """p = [1 - cos(2 gamma) cos^N(omega)] / 2 for the equatorial preparation"""
    if n_atoms < 1:
        raise InvalidParameter(f"atom count must be >= 1, got {n_atoms}")
    return 0.5 * (1.0 - math.cos(2.0 * gamma) * math.cos(omega)**n_atoms)


def normalization_closed_form(params):
    """
    Closed-form normalization N^2 for x-polarized pre-selection and any theta:

        N^2 = 1/2 sum_m w_m [1 - cos(2 gamma) cos(2 m omega)],

    with w_m = |<j, m|theta, phi>|^2 the binomial weights.
    """
    weights = np.abs(coherent_state(params.spin, params.prep).amps)**2
    m = params.spin.m_values()
    return 0.5 * float(np.sum(weights) - math.cos(2.0 * params.gamma) * np.sum(weights * np.cos(2.0 * m * params.omega)))


def field_overlap(pre, post):
    """|<post|pre>|^2; sin^2(gamma) for the x-polarized pre-selection"""
    return abs(np.vdot(post.as_array(), pre.as_array()))**2
