"""Closed-form integrals of Fock-basis amplitudes over the outcome plane.

Every amplitude needed by the CV modules has the form

    f(rho, phi) = exp(i m phi) exp(-a rho^2 / 2) sum_j c_j rho^(p_j)

with ``beta = rho e^(i phi)``.  Products and sums of such series stay in the
family, and the disc integral of ``f g*`` reduces to lower incomplete gamma
functions.  Coefficients are kept as (ln|c|, arg c) so that terms with
factorials near 100! neither overflow nor underflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .special import is_unconditioned, log_lower_incomplete_gamma


@dataclass(frozen=True)
class RadialSeries:
    m: int
    a: float
    powers: np.ndarray
    logc: np.ndarray
    phase: np.ndarray

    @classmethod
    def empty(cls, m: int, a: float) -> "RadialSeries":
        return cls(m, a, np.zeros(0, dtype=np.int64), np.zeros(0), np.zeros(0))

    def scaled(self, log_factor: float, phase: float = 0.0) -> "RadialSeries":
        return RadialSeries(self.m, self.a, self.powers, self.logc + log_factor,
                            self.phase + phase)

    def collapse(self) -> "RadialSeries":
        """Merge terms with equal powers (sums done in log space)."""
        if self.powers.size == 0:
            return self
        order = np.argsort(self.powers, kind="stable")
        p, lc, ph = self.powers[order], self.logc[order], self.phase[order]
        starts = np.flatnonzero(np.r_[True, p[1:] != p[:-1]])
        mx = np.maximum.reduceat(lc, starts)
        mx_safe = np.where(np.isfinite(mx), mx, 0.0)
        rep = np.repeat(mx_safe, np.diff(np.r_[starts, p.size]))
        s = np.add.reduceat(np.exp(lc - rep) * np.exp(1j * ph), starts)
        with np.errstate(divide="ignore"):
            logc = mx_safe + np.log(np.abs(s))
        keep = np.isfinite(logc) & np.isfinite(mx)
        return RadialSeries(self.m, self.a, p[starts][keep], logc[keep], np.angle(s)[keep])

    def __call__(self, rho, phi=0.0):
        rho = np.asarray(rho, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            lr = np.log(rho)[..., None]
            terms = np.exp(self.logc + self.powers * lr - 0.5 * self.a * rho[..., None] ** 2) \
                * np.exp(1j * self.phase)
        # rho = 0 with power 0 gives 0 * -inf; fix by direct evaluation
        if np.any(rho == 0):
            zero = rho == 0
            c0 = np.sum(np.exp(self.logc + 1j * self.phase)[self.powers == 0])
            out = np.sum(np.where(zero[..., None], 0, terms), axis=-1)
            out = np.where(zero, c0, out)
        else:
            out = terms.sum(axis=-1)
        return out * np.exp(1j * self.m * np.asarray(phi))


def combine(series) -> RadialSeries:
    """Sum of series sharing angular index and envelope."""
    series = list(series)
    m, a = series[0].m, series[0].a
    for s in series:
        if s.m != m or not math.isclose(s.a, a, rel_tol=1e-14, abs_tol=1e-300):
            raise ValueError("cannot add radial series with different m or envelope")
    return RadialSeries(m, a, np.concatenate([s.powers for s in series]),
                        np.concatenate([s.logc for s in series]),
                        np.concatenate([s.phase for s in series])).collapse()


def multiply(x: RadialSeries, y: RadialSeries) -> RadialSeries:
    return RadialSeries(x.m + y.m, x.a + y.a,
                        (x.powers[:, None] + y.powers[None, :]).ravel(),
                        (x.logc[:, None] + y.logc[None, :]).ravel(),
                        (x.phase[:, None] + y.phase[None, :]).ravel()).collapse()


def displacement_series(k: int, r: int, c: float) -> RadialSeries:
    """<k| D(c beta) |r> as a radial series, c real (may be negative or zero).

    Uses D_{k,r}(gamma) = sqrt(r!/k!) e^{-|gamma|^2/2}
    sum_t C(k,t) gamma^(k-t) (-gamma*)^(r-t) / (r-t)!.
    """
    t = np.arange(min(k, r) + 1)
    powers = k + r - 2 * t
    if c == 0.0:
        t = t[powers == 0]
        powers = powers[powers == 0]
        logabs_c = 0.0
    else:
        logabs_c = math.log(abs(c))
    logc = (0.5 * (gammaln(r + 1) - gammaln(k + 1)) + gammaln(k + 1) - gammaln(t + 1)
            - gammaln(k - t + 1) - gammaln(r - t + 1) + powers * logabs_c)
    sign_odd = ((r - t) % 2 == 1) ^ ((c < 0) & (powers % 2 == 1))
    return RadialSeries(k - r, c * c, powers.astype(np.int64), logc.astype(float),
                        np.where(sign_odd, math.pi, 0.0))


def transfer_series(r: int, n: int, q: float) -> RadialSeries:
    """<r| T_q(beta) |n> for the ideal-resource transfer operator.

    sqrt((1-q^2)/pi) e^{-(1-q^2)|beta|^2/2} C(n,r) sqrt(r!/n!) q^r
    [(1-q^2) beta*]^(n-r); zero when r > n.
    """
    s = 1.0 - q * q
    if r > n:
        return RadialSeries.empty(r - n, s)
    with np.errstate(divide="ignore"):
        logq = math.log(q) if q > 0 else -math.inf
    logc = (0.5 * math.log(s / math.pi) + gammaln(n + 1) - gammaln(r + 1) - gammaln(n - r + 1)
            + 0.5 * (gammaln(r + 1) - gammaln(n + 1)) + (r * logq if r else 0.0)
            + (n - r) * math.log(s))
    if not np.isfinite(logc):
        return RadialSeries.empty(r - n, s)
    return RadialSeries(r - n, s, np.array([n - r], dtype=np.int64), np.array([logc]),
                        np.array([0.0]))


def inner(x: RadialSeries, y: RadialSeries, radius) -> complex:
    """Integral of x(beta) conj(y(beta)) over |beta| <= radius."""
    if x.m != y.m or x.powers.size == 0 or y.powers.size == 0:
        return 0j
    a = 0.5 * (x.a + y.a)
    if a <= 0:
        raise ValueError(f"Gaussian envelope exponent {a} is not positive")
    P = 0.5 * (x.powers[:, None] + y.powers[None, :])  # rho^(2P+1) e^{-a rho^2}
    if np.any(P != np.round(P)):
        raise ValueError("radial powers of mismatched parity")
    arg = math.inf if is_unconditioned(radius) else a * radius * radius
    lg = log_lower_incomplete_gamma(P + 1, arg)
    logt = x.logc[:, None] + y.logc[None, :] + lg - (P + 1) * math.log(a) + math.log(math.pi)
    ph = x.phase[:, None] - y.phase[None, :]
    if not np.any(np.isfinite(logt)):
        return 0j
    mx = np.max(logt[np.isfinite(logt)])
    with np.errstate(invalid="ignore"):
        s = np.sum(np.where(np.isfinite(logt), np.exp(logt - mx), 0.0) * np.exp(1j * ph))
    return complex(math.exp(mx) * s)


def conjugate(x: RadialSeries) -> RadialSeries:
    """Series of conj(f) for real rho."""
    return RadialSeries(-x.m, x.a, x.powers, x.logc, -x.phase)
