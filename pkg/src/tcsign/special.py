"""Scalar kernels shared by the rest of the package.

Log-factorials, binomials, the integer-order lower incomplete gamma
function, a log-magnitude/phase number type and the matrix permanent.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammainc, gammaln

# Conditioning radius meaning "accept every measurement outcome".
UNCONDITIONED = math.inf

PERMANENT_MAX_DIM = 12
_EXACT_BINOMIAL_MAX_N = 60
_TWO_PI = 2.0 * math.pi


class ConvergenceError(ArithmeticError):
    """A numerical procedure failed to reach its tolerance."""


def is_unconditioned(B) -> bool:
    """True if ``B`` is the unconditioned flag (infinite radius)."""
    return B is None or (isinstance(B, float) and math.isinf(B) and B > 0)


def log_factorial(n: int) -> float:
    if n < 0:
        raise ValueError(f"log_factorial needs n >= 0, got {n}")
    if n < 2:
        return 0.0
    return math.lgamma(n + 1)


def binomial(n: int, k: int):
    """Binomial coefficient, zero outside ``0 <= k <= n``.

    Exact integers for ``n <= 60``; a float beyond that.
    """
    if n < 0:
        raise ValueError(f"binomial needs n >= 0, got {n}")
    if k < 0 or k > n:
        return 0
    if n <= _EXACT_BINOMIAL_MAX_N:
        return math.comb(n, k)
    return math.exp(log_binomial(n, k))


def log_binomial(n: int, k: int) -> float:
    if k < 0 or k > n:
        return -math.inf
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def lower_incomplete_gamma_int(s: int, x) -> float:
    """gamma(s, x) = int_0^x t^(s-1) e^(-t) dt for integer s >= 1.

    ``x = UNCONDITIONED`` short-circuits to (s-1)! exactly.
    """
    if s < 1:
        raise ValueError(f"s must be a positive integer, got {s}")
    if is_unconditioned(x):
        return float(math.factorial(s - 1))
    if x < 0:
        raise ValueError(f"x must be nonnegative, got {x}")
    if s <= 170:
        return float(math.factorial(s - 1) * gammainc(s, x))
    return float(np.exp(log_lower_incomplete_gamma(s, x)))


def log_lower_incomplete_gamma(s, x):
    """Vectorized log gamma(s, x); ``x`` may be the unconditioned flag."""
    s = np.asarray(s, dtype=float)
    if is_unconditioned(x):
        return gammaln(s)
    with np.errstate(divide="ignore"):
        return gammaln(s) + np.log(gammainc(s, x))


def q_to_db(q: float) -> float:
    """Squeezing in dB of a two-mode squeezed state with parameter q."""
    if not 0.0 <= q < 1.0:
        raise ValueError(f"q must lie in [0, 1), got {q}")
    return 20.0 * math.atanh(q) * math.log10(math.e)


def db_to_q(db: float) -> float:
    if db < 0:
        raise ValueError(f"squeezing in dB must be nonnegative, got {db}")
    return math.tanh(db / (20.0 * math.log10(math.e)))


@dataclass(frozen=True)
class LogMagnitudePhase:
    """A complex number stored as (ln|z|, arg z).

    ``log_magnitude = -inf`` is the zero sentinel; its phase is 0.
    """

    log_magnitude: float
    phase: float = 0.0

    def __post_init__(self):
        if math.isnan(self.log_magnitude) or math.isnan(self.phase):
            raise ValueError("NaN in LogMagnitudePhase")
        if self.log_magnitude == -math.inf:
            object.__setattr__(self, "phase", 0.0)
        else:
            object.__setattr__(self, "phase", self.phase % _TWO_PI)

    @classmethod
    def zero(cls) -> "LogMagnitudePhase":
        return cls(-math.inf, 0.0)

    @classmethod
    def from_complex(cls, z: complex) -> "LogMagnitudePhase":
        if z == 0:
            return cls.zero()
        return cls(math.log(abs(z)), cmath.phase(complex(z)))

    @property
    def is_zero(self) -> bool:
        return self.log_magnitude == -math.inf

    def __mul__(self, other: "LogMagnitudePhase") -> "LogMagnitudePhase":
        if self.is_zero or other.is_zero:
            return LogMagnitudePhase.zero()
        return LogMagnitudePhase(self.log_magnitude + other.log_magnitude,
                                 self.phase + other.phase)

    def conjugate(self) -> "LogMagnitudePhase":
        return LogMagnitudePhase(self.log_magnitude, -self.phase)

    def to_complex(self) -> complex:
        if self.is_zero:
            return 0j
        return complex(math.exp(self.log_magnitude) * math.cos(self.phase),
                       math.exp(self.log_magnitude) * math.sin(self.phase))


def log_sum(log_mag, phase, axis=None):
    """Sum complex numbers given as arrays of (ln|z|, arg z).

    Returns the result in the same representation.  Zeros are ``-inf``.
    """
    log_mag = np.asarray(log_mag, dtype=float)
    phase = np.asarray(phase, dtype=float)
    if log_mag.size == 0:
        return -np.inf, 0.0
    m = np.max(log_mag, axis=axis, keepdims=True)
    m_safe = np.where(np.isfinite(m), m, 0.0)
    s = np.sum(np.exp(log_mag - m_safe) * np.exp(1j * phase), axis=axis, keepdims=True)
    with np.errstate(divide="ignore"):
        out_mag = m_safe + np.log(np.abs(s))
    out_mag = np.where(np.isfinite(m), out_mag, -np.inf)
    out_phase = np.angle(s)
    if axis is None:
        return float(out_mag.reshape(())), float(out_phase.reshape(()))
    return np.squeeze(out_mag, axis=axis), np.squeeze(out_phase, axis=axis)


def permanent(m) -> complex:
    """Permanent of a square matrix by Glynn's formula in Gray-code order.

    Cost is O(2^(n-1) n).  Dimension is capped at 12.
    """
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"permanent needs a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if n > PERMANENT_MAX_DIM:
        raise ValueError(f"permanent dimension {n} exceeds limit {PERMANENT_MAX_DIM}")
    if n == 0:
        return 1.0 + 0j
    if not (np.all(np.any(a != 0, axis=1)) and np.all(np.any(a != 0, axis=0))):
        return 0j
    # Glynn: perm = 2^(1-n) sum_delta (prod delta) prod_j sum_i delta_i a_ij,
    # delta_0 fixed to +1, remaining signs walked in Gray-code order.
    row_sums = a.sum(axis=0)
    total = np.prod(row_sums)
    sign = 1.0
    delta = np.ones(n)
    gray_prev = 0
    for k in range(1, 2 ** (n - 1)):
        gray = k ^ (k >> 1)
        flipped = (gray ^ gray_prev).bit_length()  # row index 1..n-1
        gray_prev = gray
        delta[flipped] = -delta[flipped]
        row_sums = row_sums + 2.0 * delta[flipped] * a[flipped]
        sign = -sign
        total += sign * np.prod(row_sums)
    return complex(total / 2 ** (n - 1))
