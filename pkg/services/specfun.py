import logging
import math
import threading
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from functions.errors import InvalidAngularMomentum, InvalidOrder
from functions.half_integers import doubled, same_character

logger = logging.getLogger(__name__)

# Default table cap covers 4*j_max + 8 for j_max = 50
DEFAULT_TABLE_CAP = 4 * 50 + 8

_table_lock = threading.Lock()
_log_factorials = gammaln(np.arange(DEFAULT_TABLE_CAP + 1) + 1.0)


def ensure_log_factorial_table(cap):
    """
    Grow the cached ln(n!) table so that it covers 0..cap.

    The table only ever grows; readers see either the old or the new array,
    both of which are valid on their own range.
    """
    global _log_factorials
    if cap < len(_log_factorials):
        return _log_factorials
    with _table_lock:
        if cap >= len(_log_factorials):
            new_cap = max(cap, 2 * len(_log_factorials))
            logger.debug(f"Extending log-factorial table to n = {new_cap}")
            _log_factorials = gammaln(np.arange(new_cap + 1) + 1.0)
    return _log_factorials


def log_factorial(n):
    """Natural log of n! for a non-negative integer n"""
    if n < 0:
        raise ValueError(f"log_factorial needs n >= 0, got {n}")
    table = ensure_log_factorial_table(n)
    return float(table[n])


def log_binomial(n, k):
    """ln C(n, k) for 0 <= k <= n"""
    table = ensure_log_factorial_table(n)
    return float(table[n] - table[k] - table[n - k])


def binomial(n, k):
    """
    Binomial coefficient C(n, k) through log-factorial differences.

    Returns 0 for k < 0 or k > n.
    """
    if k < 0 or k > n:
        return 0.0
    return math.exp(log_binomial(n, k))


@dataclass(frozen=True)
class ThreeJArgs:
    """
    Arguments of a Wigner 3j symbol (j1 j2 j3; m1 m2 m3) as doubled integers.

    Use ThreeJArgs.from_values to build one from (half-)integer values.
    """
    two_j1: int
    two_j2: int
    two_j3: int
    two_m1: int
    two_m2: int
    two_m3: int

    def __post_init__(self):
        pairs = ((self.two_j1, self.two_m1), (self.two_j2, self.two_m2), (self.two_j3, self.two_m3))
        for two_j, two_m in pairs:
            if two_j < 0:
                raise InvalidAngularMomentum(f"negative angular momentum j = {two_j / 2}")
            if abs(two_m) > two_j:
                raise InvalidAngularMomentum(f"|m| = {abs(two_m) / 2} exceeds j = {two_j / 2}")
            if not same_character(two_j, two_m):
                raise InvalidAngularMomentum(f"j = {two_j / 2} and m = {two_m / 2} mix integer and half-integer")

    @classmethod
    def from_values(cls, j1, j2, j3, m1, m2, m3):
        return cls(doubled(j1), doubled(j2), doubled(j3), doubled(m1), doubled(m2), doubled(m3))

    def selection_allowed(self):
        """Projection sum, triangle rule and integer j-sum"""
        return selection_allowed_doubled(self.two_j1, self.two_j2, self.two_j3,
                                         self.two_m1, self.two_m2, self.two_m3)


def selection_allowed_doubled(tj1, tj2, tj3, tm1, tm2, tm3):
    if tm1 + tm2 + tm3 != 0:
        return False
    if not abs(tj1 - tj2) <= tj3 <= tj1 + tj2:
        return False
    return (tj1 + tj2 + tj3) % 2 == 0


def wigner_3j(args):
    """
    Wigner 3j symbol by the Racah single-sum formula.

    The alternating sum is carried out in exact integer arithmetic and only
    the final square root is taken in floating point, so the result keeps
    full double precision up to the largest spins in use.

    Args:
        args: ThreeJArgs

    Returns:
        float: the symbol value, exactly 0.0 when a selection rule fails
    """
    if not args.selection_allowed():
        return 0.0
    return wigner_3j_doubled(args.two_j1, args.two_j2, args.two_j3,
                             args.two_m1, args.two_m2, args.two_m3)


@lru_cache(maxsize=None)
def _factorial(n):
    return math.factorial(n)


@lru_cache(maxsize=1 << 16)
def wigner_3j_doubled(tj1, tj2, tj3, tm1, tm2, tm3):
    """
    Racah sum written with binomials:

        (-1)^(j1 - j2 - m3) sqrt(prod (j +- m)! / ((J + 1)! a! b! c!))
            * sum_k (-1)^k C(a, k) C(b, j1 - m1 - k) C(c, j2 + m2 - k)

    with J = j1 + j2 + j3, a = J - 2 j3, b = J - 2 j2, c = J - 2 j1.
    """
    if not selection_allowed_doubled(tj1, tj2, tj3, tm1, tm2, tm3):
        return 0.0

    big_j = (tj1 + tj2 + tj3) // 2
    a, b, c = big_j - tj3, big_j - tj2, big_j - tj1
    p1 = (tj1 - tm1) // 2
    p2 = (tj2 + tm2) // 2
    k_min = max(0, p1 - b, p2 - c)
    k_max = min(a, p1, p2)
    if k_min > k_max:
        return 0.0

    term = math.comb(a, k_min) * math.comb(b, p1 - k_min) * math.comb(c, p2 - k_min)
    if k_min % 2:
        term = -term
    total = term
    for k in range(k_min, k_max):
        # term(k + 1) is an integer, so the division is exact
        term = -(term * (a - k) * (p1 - k) * (p2 - k)
                 // ((k + 1) * (b - p1 + k + 1) * (c - p2 + k + 1)))
        total += term
    if total == 0:
        return 0.0

    numerator = total * total
    for two_j, two_m in ((tj1, tm1), (tj2, tm2), (tj3, tm3)):
        numerator *= _factorial((two_j + two_m) // 2) * _factorial((two_j - two_m) // 2)
    denominator = _factorial(big_j + 1) * _factorial(a) * _factorial(b) * _factorial(c)

    # int / int true division rounds correctly however large the operands
    magnitude = math.sqrt(numerator / denominator)
    negative = ((tj1 - tj2 - tm3) // 2) % 2 == 1
    if total < 0:
        negative = not negative
    return -magnitude if negative else magnitude


@dataclass(frozen=True)
class SphericalIndex:
    """Degree K, order Q and polar/azimuthal angles (scalars or arrays)"""
    K: int
    Q: int
    alpha: object
    beta: object

    def __post_init__(self):
        if self.K < 0:
            raise InvalidOrder(f"negative degree K = {self.K}")
        if abs(self.Q) > self.K:
            raise InvalidOrder(f"|Q| = {abs(self.Q)} exceeds K = {self.K}")


def normalized_legendre(k_max, alpha):
    """
    Fully normalized associated Legendre functions with Condon-Shortley phase.

    Y_KQ(alpha, beta) = P[K, Q](alpha) * exp(i Q beta) for Q >= 0.
    Recurrence in increasing degree at fixed order, seeded at K = Q, which
    stays finite for K in the hundreds.

    Args:
        k_max: maximum degree
        alpha: polar angle(s) in radians

    Returns:
        numpy array of shape (k_max + 1, k_max + 1) + shape(alpha)
    """
    alpha = np.asarray(alpha, dtype=float)
    x = np.cos(alpha)
    u = np.sin(alpha)
    plm = np.zeros((k_max + 1, k_max + 1) + alpha.shape)

    plm[0, 0] = 1.0 / math.sqrt(4.0 * math.pi)
    for q in range(1, k_max + 1):
        plm[q, q] = -math.sqrt((2.0 * q + 1.0) / (2.0 * q)) * u * plm[q - 1, q - 1]

    for q in range(0, k_max):
        plm[q + 1, q] = math.sqrt(2.0 * q + 3.0) * x * plm[q, q]
        for k in range(q + 2, k_max + 1):
            a_kq = math.sqrt((4.0 * k * k - 1.0) / (k * k - q * q))
            b_kq = math.sqrt(((k - 1.0)**2 - q * q) / (4.0 * (k - 1.0)**2 - 1.0))
            plm[k, q] = a_kq * (x * plm[k - 1, q] - b_kq * plm[k - 2, q])

    return plm


def spherical_harmonic(idx):
    """
    Orthonormal spherical harmonic Y_KQ(alpha, beta) with the Condon-Shortley
    phase. alpha and beta may be numpy arrays of equal shape.
    """
    q = abs(idx.Q)
    plm = normalized_legendre(idx.K, idx.alpha)[idx.K, q]
    value = plm * np.exp(1j * q * np.asarray(idx.beta, dtype=float))
    if idx.Q < 0:
        value = (-1)**q * np.conj(value)
    if np.ndim(value) == 0:
        return complex(value)
    return value
