import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import signal

from functions.errors import (DivergentWeakValue, InlineCheckFailed, InvalidParameter,
                              NoPeak, ZeroPostselection)
from functions.golden_section import golden_section_max
from services.protocol import (ZERO_POSTSELECTION_THRESHOLD, FieldState, ProtocolParams,
                               build_cat, success_probability)
from services.specfun import log_binomial
from services.spin_core import BlochAngles, coherent_state

logger = logging.getLogger(__name__)

DEFAULT_WINDOW = (-math.pi / 2.0, math.pi / 2.0)
DEFAULT_N_COARSE = 20001
DEFAULT_N_PHI = 2001
REFINE_TOLERANCE = 1e-10
# local maxima lower than this fraction of the global maximum are rounding noise
RELATIVE_PEAK_FLOOR = 1e-12
# golden-section refinement locates a flat maximum only to about 1e-8
SHIFT_ABSOLUTE_FLOOR = 1e-6
WEAK_VALUE_TOLERANCE = 1e-12
OVERLAP_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class PhaseProfile:
    """P(phi) sampled over a window; P is not renormalized over phi"""
    phis: np.ndarray
    values: np.ndarray
    params: ProtocolParams


@dataclass(frozen=True)
class PeakReport:
    left_peak_phi: float
    scaled_shift: float
    n_peaks: int
    dip_at_zero: bool


@dataclass(frozen=True)
class WeakValueModel:
    """Weak value A and the first-order peak shift -A * omega it predicts"""
    A: float
    predicted_shift: float


class ShiftCheck(NamedTuple):
    true_shift: float
    predicted_shift: float
    relative_error: float


def _require_equatorial(params):
    if not math.isclose(params.prep.theta, math.pi / 2.0, abs_tol=1e-12):
        raise InvalidParameter(f"phase distribution needs an equatorial preparation, got theta = {params.prep.theta}")


def phase_density(params, phi):
    """
    P(phi) = |<pi/2, phi|cat>|^2 from the explicit cat vector.

    phi may be a scalar or an array.
    """
    cat = build_cat(params)
    # <pi/2, phi| has amplitudes r_k e^(i k phi), r_k those of <pi/2, 0|
    reference = coherent_state(params.spin, BlochAngles(math.pi / 2.0, 0.0)).amps.real
    k = np.arange(params.spin.dim)
    phi = np.asarray(phi, dtype=float)
    overlaps = np.exp(1j * np.multiply.outer(phi, k)) @ (reference * cat.vector.amps)
    density = np.abs(overlaps)**2
    if density.ndim == 0:
        return float(density)
    return density


def phase_density_closed_form(params, phis):
    """
    Real closed form for the equatorial preparation:

        P = [s cos^(2j)((x - omega)/2) + c cos^(2j)((x + omega)/2)]^2 / (2 N^2)

    with x = phi - phi0, s = sin(gamma - pi/4), c = cos(gamma - pi/4) and
    N^2 the post-selection probability.
    """
    _require_equatorial(params)
    norm_sq = success_probability(params.spin.n_atoms, params.omega, params.gamma)
    if norm_sq < ZERO_POSTSELECTION_THRESHOLD:
        raise ZeroPostselection(f"post-selection probability {norm_sq:.3e} at gamma = {params.gamma}")
    post = FieldState.postselected(params.gamma)
    s, c = post.c_plus, post.c_minus
    x = np.asarray(phis, dtype=float) - params.prep.phi
    n = params.spin.two_j
    amplitude = s * np.cos((x - params.omega) / 2.0)**n + c * np.cos((x + params.omega) / 2.0)**n
    return amplitude**2 / (2.0 * norm_sq)


def f_kernel(spin, phi):
    """f(phi) = sum_m C(2j, j+m) e^(i m phi); real because the weights are symmetric in m"""
    k = np.arange(spin.dim)
    m = k - spin.j
    weights = np.exp([log_binomial(spin.two_j, int(kk)) for kk in k])
    value = np.cos(np.multiply.outer(np.asarray(phi, dtype=float), m)) @ weights
    if np.ndim(value) == 0:
        return float(value)
    return value


def phase_profile(params, window=DEFAULT_WINDOW, n_phi=DEFAULT_N_PHI):
    phis = np.linspace(window[0], window[1], n_phi)
    return PhaseProfile(phis, phase_density_closed_form(params, phis), params)


def find_peaks(params, window=DEFAULT_WINDOW, n_coarse=DEFAULT_N_COARSE):
    """
    Locate the local maxima of P(phi) inside a window.

    Coarse scan on n_coarse nodes, then golden-section refinement of every
    candidate on the closed form to 1e-10 in phi.

    Args:
        params: ProtocolParams with omega != 0 and an equatorial preparation
        window: (lo, hi) search interval in radians
        n_coarse: number of scan nodes

    Returns:
        PeakReport; the left peak is the maximum with the most negative phi

    Raises:
        NoPeak: if the window holds no interior local maximum
    """
    if params.omega == 0.0:
        raise InvalidParameter("peak shift is undefined for omega = 0")
    if n_coarse < 3:
        raise InvalidParameter(f"n_coarse must be >= 3, got {n_coarse}")

    phis = np.linspace(window[0], window[1], n_coarse)
    values = phase_density_closed_form(params, phis)
    candidates, _ = signal.find_peaks(values, height=RELATIVE_PEAK_FLOOR * float(np.max(values)))
    if len(candidates) == 0:
        raise NoPeak(f"no local maximum of P in [{window[0]:.4g}, {window[1]:.4g}] "
                     f"at j = {params.spin.j}, gamma = {params.gamma:.6g}")

    def density(phi):
        return float(phase_density_closed_form(params, phi))

    peaks = sorted(golden_section_max(density, phis[i - 1], phis[i + 1], tol=REFINE_TOLERANCE)
                   for i in candidates)
    left = peaks[0]

    step = phis[1] - phis[0]
    phi0 = params.prep.phi
    centre, below, above = phase_density_closed_form(params, np.array([phi0, phi0 - step, phi0 + step]))
    dip = bool(centre < below and centre < above)

    report = PeakReport(left, abs(left - phi0) / abs(params.omega), len(peaks), dip)
    logger.debug(f"Peaks at j = {params.spin.j}, gamma = {params.gamma:.6g}: {len(peaks)} found, "
                 f"left at {left:.10f}, scaled shift {report.scaled_shift:.6f}")
    return report


def stokes_weak_value(pre, post):
    """
    -<pre|S|post> / <pre|post> with S = |1+,0-><1+,0-| - |0+,1-><0+,1-|.

    Raises:
        DivergentWeakValue: if pre and post are orthogonal
    """
    stokes = np.diag([1.0, -1.0])
    overlap = np.vdot(pre.as_array(), post.as_array())
    if abs(overlap) < OVERLAP_FLOOR:
        raise DivergentWeakValue(f"pre- and post-selected states are orthogonal (overlap {abs(overlap):.3e})")
    value = -np.vdot(pre.as_array(), stokes @ post.as_array()) / overlap
    return float(value.real) if abs(value.imag) < WEAK_VALUE_TOLERANCE else complex(value)


def weak_value(gamma, omega=0.0):
    """
    A = cot(gamma), checked against the Stokes-operator form for the
    x-polarized pre-selection.

    Raises:
        DivergentWeakValue: at gamma = 0 (orthogonal pre/post selection)
    """
    if abs(math.sin(gamma)) < OVERLAP_FLOOR:
        raise DivergentWeakValue(f"weak value diverges at gamma = {gamma}")
    a = math.cos(gamma) / math.sin(gamma)
    operator_value = stokes_weak_value(FieldState.x_polarized(), FieldState.postselected(gamma))
    if abs(a - operator_value) > WEAK_VALUE_TOLERANCE * max(1.0, abs(a)):
        raise InlineCheckFailed(f"cot(gamma) = {a} but Stokes weak value = {operator_value}")
    return WeakValueModel(a, -a * omega)


def linear_response_density(params, phis):
    """
    First-order weak-value picture of P: the single coherent-state profile
    displaced by -A * omega, weighted by (s + c)^2.
    """
    _require_equatorial(params)
    model = weak_value(params.gamma, params.omega)
    norm_sq = success_probability(params.spin.n_atoms, params.omega, params.gamma)
    post = FieldState.postselected(params.gamma)
    s, c = post.c_plus, post.c_minus
    x = np.asarray(phis, dtype=float) - params.prep.phi - model.predicted_shift
    return (s + c)**2 * np.cos(x / 2.0)**(2 * params.spin.two_j) / (2.0 * norm_sq)


def taylor_shift_check(params, n_coarse=DEFAULT_N_COARSE):
    """
    Compare the exact left-peak shift with the weak-value prediction -A * omega.

    relative_error is |true - predicted| / |true|, or the absolute difference
    when |true| is below 1e-6.
    """
    if params.omega == 0.0:
        raise InvalidParameter("shift check needs omega != 0")
    if not 0.0 < params.gamma <= math.pi / 2.0:
        raise InvalidParameter(f"shift check needs gamma in (0, pi/2], got {params.gamma}")
    report = find_peaks(params, n_coarse=n_coarse)
    true_shift = report.left_peak_phi - params.prep.phi
    predicted = weak_value(params.gamma, params.omega).predicted_shift
    difference = abs(true_shift - predicted)
    if abs(true_shift) < SHIFT_ABSOLUTE_FLOOR:
        error = difference
    else:
        error = difference / abs(true_shift)
    return ShiftCheck(true_shift, predicted, error)
