import logging
import math
from dataclasses import dataclass

import numpy as np

from functions.errors import InvalidParameter, SpinMismatch
from functions.haversine import haversine
from services.specfun import log_binomial

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SpinJ:
    """Collective spin j = N/2 of N two-level atoms, stored as two_j = N"""
    two_j: int

    def __post_init__(self):
        if int(self.two_j) != self.two_j or self.two_j < 1:
            raise InvalidParameter(f"two_j must be a positive integer, got {self.two_j}")

    @property
    def j(self):
        return self.two_j / 2.0

    @property
    def n_atoms(self):
        return self.two_j

    @property
    def dim(self):
        return self.two_j + 1

    def m_values(self):
        """Projections m = -j, -j+1, ..., +j in amplitude order"""
        return np.arange(self.dim) - self.j


def spin_from_atoms(n_atoms):
    """SpinJ for an ensemble of n_atoms atoms"""
    if int(n_atoms) != n_atoms or n_atoms < 1:
        raise InvalidParameter(f"atom count must be a positive integer, got {n_atoms}")
    return SpinJ(int(n_atoms))


@dataclass(frozen=True)
class BlochAngles:
    """Polar angle theta in [0, pi] and azimuth phi (kept unreduced)"""
    theta: float
    phi: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi:
            raise InvalidParameter(f"theta must lie in [0, pi], got {self.theta}")


@dataclass(frozen=True, eq=False)
class DickeVector:
    """
    Amplitudes of a spin-j state on the Dicke basis |j, m>.

    amps[i] is the amplitude of m = -j + i. The array is copied and made
    read-only on construction.
    """
    spin: SpinJ
    amps: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amps, dtype=complex)
        if amps.shape != (self.spin.dim,):
            raise InvalidParameter(f"expected {self.spin.dim} amplitudes, got shape {amps.shape}")
        amps.setflags(write=False)
        object.__setattr__(self, 'amps', amps)

    def norm_sq(self):
        return float(np.vdot(self.amps, self.amps).real)

    def norm(self):
        return math.sqrt(self.norm_sq())

    def scaled(self, factor):
        return DickeVector(self.spin, factor * self.amps)

    def normalized(self):
        return self.scaled(1.0 / self.norm())

    def __add__(self, other):
        _check_same_spin(self, other)
        return DickeVector(self.spin, self.amps + other.amps)


def _check_same_spin(a, b):
    if a.spin != b.spin:
        raise SpinMismatch(f"spin j = {a.spin.j} vs j = {b.spin.j}")


def basis_state(spin, index):
    """Dicke basis vector |j, -j + index>"""
    amps = np.zeros(spin.dim, dtype=complex)
    amps[index] = 1.0
    return DickeVector(spin, amps)


def coherent_state(spin, angles):
    """
    Atomic coherent state |theta, phi> on the Dicke basis.

    amps[m] = C(2j, j+m)^(1/2) sin^(j+m)(theta/2) cos^(j-m)(theta/2) e^(-i(j+m)phi),
    built in log space so that large j does not underflow near the poles.

    Args:
        spin: SpinJ
        angles: BlochAngles

    Returns:
        DickeVector with unit norm
    """
    theta, phi = angles.theta, angles.phi
    # the poles are basis states; log(0) is avoided explicitly
    if theta == 0.0:
        return basis_state(spin, 0)
    if theta == math.pi:
        return basis_state(spin, spin.two_j)

    n = spin.two_j
    k = np.arange(n + 1)  # k = j + m
    log_binom = np.array([log_binomial(n, int(kk)) for kk in k])
    log_mod = (0.5 * log_binom
               + k * math.log(math.sin(theta / 2.0))
               + (n - k) * math.log(math.cos(theta / 2.0)))
    amps = np.exp(log_mod) * np.exp(-1j * k * phi)
    return DickeVector(spin, amps)


def inner_product(a, b):
    """<a|b> = sum_m conj(a_m) b_m"""
    _check_same_spin(a, b)
    return complex(np.vdot(a.amps, b.amps))


def overlap_law(spin, a, b):
    """
    |<theta, phi | theta', phi'>|^2 = (cos^2(Theta/2))^(2j), with Theta the
    angle between the two directions on the Bloch sphere.
    """
    sin_sq_half = haversine(a.theta, a.phi, b.theta, b.phi)
    return (1.0 - sin_sq_half)**spin.two_j


def rotate_phase(v, delta_phi):
    """
    Azimuthal rotation exp(-i delta_phi J_z): amps[m] -> amps[m] e^(-i m delta_phi).

    Takes |theta, phi> to e^(i j delta_phi) |theta, phi + delta_phi>.
    """
    return DickeVector(v.spin, v.amps * np.exp(-1j * v.spin.m_values() * delta_phi))


def cat_component_overlap(spin, omega):
    """|<pi/2, omega | pi/2, -omega>|^2 = cos^(4j)(omega)"""
    return math.cos(omega)**(2 * spin.two_j)


def overlap_ratio(spin_a, spin_b, omega):
    """Ratio of the cat-component overlaps of two ensemble sizes"""
    return cat_component_overlap(spin_a, omega) / cat_component_overlap(spin_b, omega)
