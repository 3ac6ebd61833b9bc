import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss

from functions.errors import GridTooCoarse, InvalidOrder, NotNormalized
from functions.half_integers import doubled
from services.specfun import ThreeJArgs, normalized_legendre, wigner_3j, wigner_3j_doubled
from services.spin_core import SpinJ

logger = logging.getLogger(__name__)

NORM_TOLERANCE = 1e-8
IMAGINARY_RESIDUE_TOLERANCE = 1e-10


def multipole_matrix_element(spin, K, Q, m1, m2):
    """
    <j, m1| T_KQ |j, m2> = (-1)^(j - m1) sqrt(2K + 1) (j K j; -m1 Q m2).

    m1 and m2 are the projection values themselves (integers or
    half-integers), not amplitude indices.
    """
    if not 0 <= K <= spin.two_j:
        raise InvalidOrder(f"degree K = {K} outside 0..{spin.two_j}")
    if abs(Q) > K:
        raise InvalidOrder(f"|Q| = {abs(Q)} exceeds K = {K}")
    two_m1, two_m2 = doubled(m1), doubled(m2)
    symbol = wigner_3j(ThreeJArgs(spin.two_j, 2 * K, spin.two_j, -two_m1, 2 * Q, two_m2))
    phase = -1.0 if ((spin.two_j - two_m1) // 2) % 2 else 1.0
    return phase * math.sqrt(2 * K + 1) * symbol


@lru_cache(maxsize=128)
def _multipole_block(two_j):
    """
    Elements <m + Q| T_KQ |m> for every (K, Q, m), as an array indexed
    [K, Q + two_j, i] with m = -j + i; zero where m + Q leaves the ladder.

    Negative orders follow from <-m - Q| T_K,-Q |-m> = (-1)^K <m + Q| T_KQ |m>.
    """
    dim = two_j + 1
    block = np.zeros((dim, 2 * two_j + 1, dim))
    for K in range(dim):
        sign_k = -1.0 if K % 2 else 1.0
        for Q in range(0, K + 1):
            for i in range(0, dim - Q):
                two_m = 2 * i - two_j
                symbol = wigner_3j_doubled(two_j, 2 * K, two_j, -(two_m + 2 * Q), 2 * Q, two_m)
                if symbol == 0.0:
                    continue
                # (-1)^(j - m - Q)
                phase = -1.0 if ((two_j - two_m) // 2 - Q) % 2 else 1.0
                element = phase * math.sqrt(2 * K + 1) * symbol
                block[K, Q + two_j, i] = element
                if Q > 0:
                    block[K, two_j - Q, two_j - i] = sign_k * element
    block.setflags(write=False)
    logger.debug(f"Built multipole element block for two_j = {two_j}")
    return block


@dataclass(frozen=True, eq=False)
class MultipoleDecomposition:
    """
    Multipole coefficients <T_KQ^dagger> of a pure spin-j state.

    coeffs is indexed [K, Q + two_j]; entries with |Q| > K are zero.
    """
    spin: SpinJ
    coeffs: np.ndarray

    def coeff(self, K, Q):
        if not 0 <= K <= self.spin.two_j or abs(Q) > K:
            raise InvalidOrder(f"no multipole (K, Q) = ({K}, {Q}) for j = {self.spin.j}")
        return complex(self.coeffs[K, Q + self.spin.two_j])

    def parseval_sum(self):
        """sum |coeff|^2 = tr(rho^2), 1 for a pure state"""
        return float(np.sum(np.abs(self.coeffs)**2))


def decompose(state):
    """
    State-multipole expansion of a normalized Dicke vector.

    coeff(K, Q) = sum_m conj(a_m) a_(m+Q) <m + Q| T_KQ |m>

    Args:
        state: DickeVector with unit norm

    Returns:
        MultipoleDecomposition

    Raises:
        NotNormalized: if the norm deviates from 1 by more than 1e-8
    """
    norm = state.norm()
    if abs(norm - 1.0) > NORM_TOLERANCE:
        raise NotNormalized(f"state norm {norm:.12f} differs from 1")

    two_j = state.spin.two_j
    block = _multipole_block(two_j)
    amps = state.amps
    coeffs = np.zeros((two_j + 1, 2 * two_j + 1), dtype=complex)
    for Q in range(-two_j, two_j + 1):
        lo, hi = max(0, -Q), min(two_j + 1, two_j + 1 - Q)
        products = np.zeros(two_j + 1, dtype=complex)
        products[lo:hi] = np.conj(amps[lo:hi]) * amps[lo + Q:hi + Q]
        coeffs[:, Q + two_j] = block[:, Q + two_j, :] @ products
    return MultipoleDecomposition(state.spin, coeffs)


def _legendre_by_order(two_j, alpha):
    """
    Normalized Legendre table re-indexed by signed order Q, with the
    (-1)^Q factor of Y_K,-Q = (-1)^Q conj(Y_KQ) folded into negative orders.
    """
    plm = normalized_legendre(two_j, alpha)
    orders = np.arange(-two_j, two_j + 1)
    table = plm[:, np.abs(orders)]
    signs = np.where((orders < 0) & (orders % 2 == 1), -1.0, 1.0)
    return table * signs.reshape((1, -1) + (1,) * (table.ndim - 2))


def _order_profiles(decomp, alpha):
    """F_Q(alpha) = sum_K coeff(K, Q) P_K|Q|(alpha), shape (2*two_j + 1,) + shape(alpha)"""
    table = _legendre_by_order(decomp.spin.two_j, alpha)
    return np.einsum('kq...,kq->q...', table, decomp.coeffs)


def _prefactor(spin):
    return math.sqrt((spin.two_j + 1) / (4.0 * math.pi))


def _real_part(values, where):
    residue = float(np.max(np.abs(np.imag(values)))) if np.size(values) else 0.0
    if residue > IMAGINARY_RESIDUE_TOLERANCE:
        logger.warning(f"Wigner function imaginary residue {residue:.3e} in {where}")
    return np.real(values)


def wigner_at(decomp, alpha, beta):
    """
    W(alpha, beta) = sqrt((2j + 1)/(4 pi)) sum_KQ coeff(K, Q) Y_KQ(alpha, beta).

    alpha and beta may be scalars or arrays of the same shape.
    """
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    two_j = decomp.spin.two_j
    profiles = _order_profiles(decomp, alpha)
    orders = np.arange(-two_j, two_j + 1).reshape((-1,) + (1,) * alpha.ndim)
    total = np.sum(profiles * np.exp(1j * orders * beta), axis=0) * _prefactor(decomp.spin)
    value = _real_part(total, "wigner_at")
    if np.ndim(value) == 0:
        return float(value)
    return value


@dataclass(frozen=True, eq=False)
class WignerField:
    """
    W sampled on a Gauss-Legendre (in cos alpha) x uniform beta grid.

    values[i, k] = W(alphas[i], betas[k]).
    """
    alphas: np.ndarray
    alpha_weights: np.ndarray
    betas: np.ndarray
    values: np.ndarray

    def cell_weights(self):
        """Quadrature weight of each node for the measure sin(alpha) d(alpha) d(beta)"""
        d_beta = 2.0 * math.pi / len(self.betas)
        return np.outer(self.alpha_weights, np.full(len(self.betas), d_beta))

    def integral(self):
        return float(np.sum(self.cell_weights() * self.values))

    @property
    def min_value(self):
        return float(np.min(self.values))

    def triples(self):
        """(alpha, beta, W) rows in alpha-major order"""
        a, b = np.meshgrid(self.alphas, self.betas, indexing='ij')
        return np.column_stack([a.ravel(), b.ravel(), self.values.ravel()])


def sample_grid(decomp, n_alpha, n_beta):
    """
    Sample W on a grid that integrates the degree-2j harmonic content exactly.

    Args:
        decomp: MultipoleDecomposition
        n_alpha: Gauss-Legendre nodes in cos(alpha), at least 2j + 2
        n_beta: uniform nodes in [0, 2 pi), at least 4j + 2

    Returns:
        WignerField

    Raises:
        GridTooCoarse: if either node count is below its minimum
    """
    two_j = decomp.spin.two_j
    if n_alpha < two_j + 2:
        raise GridTooCoarse(f"n_alpha = {n_alpha} < 2j + 2 = {two_j + 2}")
    if n_beta < 2 * two_j + 2:
        raise GridTooCoarse(f"n_beta = {n_beta} < 4j + 2 = {2 * two_j + 2}")

    nodes, weights = leggauss(n_alpha)
    # ascending alpha
    alphas = np.arccos(nodes[::-1])
    weights = weights[::-1]
    betas = 2.0 * math.pi * np.arange(n_beta) / n_beta

    profiles = _order_profiles(decomp, alphas)  # (n_orders, n_alpha)
    orders = np.arange(-two_j, two_j + 1)
    phases = np.exp(1j * np.outer(orders, betas))  # (n_orders, n_beta)
    values = _real_part(profiles.T @ phases * _prefactor(decomp.spin), "sample_grid")
    logger.debug(f"Sampled Wigner function on {n_alpha} x {n_beta} grid for j = {decomp.spin.j}")
    return WignerField(alphas, weights, betas, values)


def negativity_volume(field):
    """Quadrature of max(0, -W) over the sphere"""
    return float(np.sum(field.cell_weights() * np.maximum(0.0, -field.values)))


def wigner_function(state, n_alpha, n_beta):
    """decompose followed by sample_grid"""
    return sample_grid(decompose(state), n_alpha, n_beta)
