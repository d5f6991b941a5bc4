"""Continuous-variable teleportation of Fock-superposition states.

A two-mode squeezed resource with parameter ``q`` and a corrective
displacement with gain ``g`` act on the input through the transfer operator

    T_g(beta) = D((g - q) beta) T_q(beta),

where ``beta`` is the Bell-measurement outcome.  Conditioning keeps only
outcomes with ``|beta| <= B``; ``B = UNCONDITIONED`` keeps all of them.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammainc, gammaln

from . import _radial
from ._optimize import golden_section_max
from .special import UNCONDITIONED, binomial, is_unconditioned


@dataclass(frozen=True)
class TeleportParams:
    q: float
    g: float
    B: float = UNCONDITIONED

    def __post_init__(self):
        check_params(self.q, self.g, self.B)


def check_params(q, g=0.0, B=UNCONDITIONED):
    if not 0.0 <= q < 1.0:
        raise ValueError(f"squeezing parameter q must lie in [0, 1), got {q}")
    if g < 0:
        raise ValueError(f"gain g must be nonnegative, got {g}")
    if not is_unconditioned(B) and not B >= 0:
        raise ValueError(f"conditioning radius must be >= 0 or unconditioned, got {B}")


def input_state(coeffs) -> np.ndarray:
    """Validate a normalized Fock-coefficient vector c_0..c_N."""
    c = np.atleast_1d(np.asarray(coeffs, dtype=complex))
    norm = float(np.sum(np.abs(c) ** 2))
    if abs(norm - 1.0) > 1e-12:
        raise ValueError(f"input state is not normalized: sum |c_n|^2 = {norm!r}")
    return c


def fock(n: int) -> np.ndarray:
    c = np.zeros(n + 1, dtype=complex)
    c[n] = 1
    return c


def transfer_matrix_element(k: int, l: int, q: float, beta: complex) -> complex:
    """<k| T_q(beta) |l>; zero for k > l."""
    if k > l:
        return 0j
    s = 1 - q * q
    return (math.sqrt(s / math.pi) * math.exp(-s * abs(beta) ** 2 / 2) * binomial(l, k)
            * math.sqrt(math.exp(gammaln(k + 1) - gammaln(l + 1))) * q ** k
            * (s * complex(beta).conjugate()) ** (l - k))


def displacement_matrix_element(k: int, r: int, gamma: complex) -> complex:
    """<k| D(gamma) |r>, evaluated with log-scaled terms."""
    gamma = complex(gamma)
    x = abs(gamma)
    series = _radial.displacement_series(k, r, 1.0)
    return complex(series(x)) * cmath.exp(1j * (k - r) * cmath.phase(gamma))


def amplitude_series(k: int, n: int, q: float, g: float) -> _radial.RadialSeries:
    """<k| T_g(beta) |n> as a radial series in |beta|."""
    parts = [_radial.multiply(_radial.displacement_series(k, r, g - q),
                              _radial.transfer_series(r, n, q)) for r in range(n + 1)]
    parts = [p for p in parts if p.powers.size]
    if not parts:
        return _radial.RadialSeries.empty(k - n, (g - q) ** 2 + 1 - q * q)
    return _radial.combine(parts)


def _amplitudes(nmax: int, q: float, g: float):
    return {(k, n): amplitude_series(k, n, q, g)
            for k in range(nmax + 1) for n in range(nmax + 1)}


def success_probability(state, q: float, B=UNCONDITIONED) -> float:
    """Probability that the outcome satisfies |beta| <= B.

    P(B) = sum_n |c_n|^2 sum_r C(n,r) q^(2r) (1-q^2)^(n-r)
           gamma(n-r+1, (1-q^2) B^2) / (n-r)!.
    """
    c = input_state(state)
    check_params(q, 0.0, B)
    if is_unconditioned(B):
        return 1.0
    s = 1 - q * q
    X = s * B * B
    total = 0.0
    for n, cn in enumerate(c):
        w = abs(cn) ** 2
        if w == 0:
            continue
        r = np.arange(n + 1)
        pmf = np.array([binomial(n, int(i)) for i in r], dtype=float) * q ** (2 * r) * s ** (n - r)
        total += w * float(np.sum(pmf * gammainc(n - r + 1, X)))
    return min(max(total, 0.0), 1.0)


def fidelity_integral(state, q: float, g: float, B=UNCONDITIONED) -> complex:
    c = input_state(state)
    check_params(q, g, B)
    N = len(c) - 1
    amp = _amplitudes(N, q, g)
    total = 0j
    for (k, n), x in amp.items():
        for (l, m), y in amp.items():
            if k - n != l - m:
                continue
            w = c[k].conjugate() * c[n] * c[l] * c[m].conjugate()
            if w != 0:
                total += w * _radial.inner(x, y, B)
    return total


def average_fidelity(state, q: float, g: float, B=UNCONDITIONED):
    """(raw, conditional) teleportation fidelity.

    raw integrates |<psi| T_g(beta) |psi>|^2 over |beta| <= B;
    conditional divides by the success probability P(B).
    """
    raw = fidelity_integral(state, q, g, B).real
    if is_unconditioned(B):
        return raw, raw
    p = success_probability(state, q, B)
    return raw, (raw / p if p > 0 else math.nan)


def quality(state, q: float, g: float, B=UNCONDITIONED) -> float:
    """Q = P(B) F(B), the raw fidelity integral."""
    return average_fidelity(state, q, g, B)[0]


def optimize_gain(state, q: float, B=UNCONDITIONED, g_max: float = 1.2, tol: float = 1e-6):
    """Gain maximizing the conditional fidelity on [q/2, g_max]."""
    return golden_section_max(lambda g: average_fidelity(state, q, g, B)[1],
                              0.5 * q, g_max, tol)


def dual_rail_blocks(q: float, g: float, B=UNCONDITIONED):
    amp = _amplitudes(1, q, g)
    I = lambda x, y: _radial.inner(amp[x], amp[y], B)
    return {
        "a0": I((0, 0), (0, 0)).real,
        "a1": I((1, 1), (1, 1)).real,
        "x": I((0, 0), (1, 1)),
        "b01": I((0, 1), (0, 1)).real,
        "b10": I((1, 0), (1, 0)).real,
    }


def dual_rail_fidelity(c0: complex, c1: complex, q: float, g: float, B=UNCONDITIONED) -> float:
    """Fidelity of c0|0bar> + c1|1bar> sent through two parallel channels.

    No postselection on the photon number; the two outcome integrals
    factorize into single-channel blocks.
    """
    if abs(abs(c0) ** 2 + abs(c1) ** 2 - 1) > 1e-12:
        raise ValueError("dual-rail amplitudes are not normalized")
    check_params(q, g, B)
    b = dual_rail_blocks(q, g, B)
    p0, p1 = abs(c0) ** 2, abs(c1) ** 2
    return ((p0 * p0 + p1 * p1) * b["a0"] * b["a1"]
            + 2 * p0 * p1 * (abs(b["x"]) ** 2 + b["b01"] * b["b10"]))


def optimize_dual_rail_gain(c0, c1, q, g_max=1.2, tol=1e-6):
    return golden_section_max(lambda g: dual_rail_fidelity(c0, c1, q, g), 0.5 * q, g_max, tol)
