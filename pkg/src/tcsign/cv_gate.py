"""Continuous-variable teleportation of the NSS_d gate.

The offline resource is a two-mode squeezed state truncated at d + t
photons with NSS_d applied to one half,

    N sum_{r <= d+t} q^r abar_r |r, r>,   abar_r = alpha_r / alpha_0,

and the correction is the self-Kerr-conjugated displacement
C(g beta) = U_SK D(g beta) U_SK^dag.  Relative to the ideal output
U_SK|psi>, each outcome beta acts as

    K(beta) = (N / sqrt(pi)) D(g beta) W D(-beta),
    W = diag(q^r conj(U_SK(r)) abar_r).
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from . import _radial
from ._optimize import golden_section_max
from .cv_teleport import check_params, input_state
from .nssd import normalized_alphas, u_sk
from .special import UNCONDITIONED, is_unconditioned, log_binomial, q_to_db

DEFAULT_T = 2
CSIGN_KEYS = {
    "F0000": (0, 0, 0, 0),
    "F2222": (2, 2, 2, 2),
    "F0022": (0, 0, 2, 2),
    "F2200": (2, 2, 0, 0),
    "F0202": (0, 2, 0, 2),
}


def ideal_alphas(n_max: int) -> np.ndarray:
    """Exact self-Kerr coefficients U_SK(n) for n = 0..n_max."""
    return u_sk(np.arange(n_max + 1)).astype(complex)


@dataclass(frozen=True)
class GateTeleportParams:
    d: int
    q: float
    g: float
    t: int = DEFAULT_T
    B: float = UNCONDITIONED
    alphas: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        check_params(self.q, self.g, self.B)
        if self.d < 1 or self.t < 0:
            raise ValueError(f"need d >= 1 and t >= 0, got d = {self.d}, t = {self.t}")
        a = self.alphas
        if a is None:
            a = normalized_alphas(self.d, self.d + self.t) if self.d >= 2 else \
                ideal_alphas(self.d + self.t)
        a = np.asarray(a, dtype=complex)
        if a.shape != (self.d + self.t + 1,):
            raise ValueError(f"need {self.d + self.t + 1} coefficients, got {a.shape}")
        err = np.max(np.abs(np.abs(a[:self.d + 1]) - 1))
        if err > 1e-9:
            raise ValueError(f"|abar_n| must equal 1 for n <= d (deviation {err:.3g})")
        object.__setattr__(self, "alphas", a)

    def with_(self, **kw) -> "GateTeleportParams":
        fields = dict(d=self.d, q=self.q, g=self.g, t=self.t, B=self.B, alphas=self.alphas)
        fields.update(kw)
        return GateTeleportParams(**fields)

    @property
    def weights(self) -> np.ndarray:
        r = np.arange(self.d + self.t + 1)
        return self.q ** r * u_sk(r) * self.alphas

    @property
    def norm(self) -> float:
        return resource_normalization(self.d, self.t, self.q, self.alphas)


def resource_normalization(d: int, t: int, q: float, alphas) -> float:
    """N_{d,t} with 1/N^2 = (1-q^(2(d+1)))/(1-q^2) + q^(2d) sum_{n=1}^t q^(2n)|abar_{d+n}|^2."""
    alphas = np.asarray(alphas)
    q2 = q * q
    head = (1 - q2 ** (d + 1)) / (1 - q2) if q2 != 1 else d + 1
    tail = q2 ** d * sum(q2 ** n * abs(alphas[d + n]) ** 2 for n in range(1, t + 1))
    return 1.0 / math.sqrt(head + tail)


def f_deformed_displacement_matrix(gamma: complex, n_trunc: int) -> np.ndarray:
    """C_{k,r} = U_SK(k) D_{k,r}(gamma) conj(U_SK(r)), k, r < n_trunc."""
    from .cv_teleport import displacement_matrix_element
    n = np.arange(n_trunc)
    D = np.array([[displacement_matrix_element(k, r, gamma) for r in n] for k in n])
    s = u_sk(n)
    return s[:, None] * D * s[None, :]


@functools.lru_cache(maxsize=256)
def _gate_terms(k: int, n: int, R: int):
    """Index arrays for sum_r w_r D_{k,r}(g rho) D_{n,r}(rho) (static part)."""
    rs, ts, tps = [], [], []
    for r in range(R + 1):
        for t in range(min(k, r) + 1):
            for tp in range(min(n, r) + 1):
                rs.append(r)
                ts.append(t)
                tps.append(tp)
    r, t, tp = (np.array(x, dtype=np.int64) for x in (rs, ts, tps))
    base = (gammaln(r + 1) - 0.5 * gammaln(k + 1) - 0.5 * gammaln(n + 1)
            + np.array([log_binomial(k, int(i)) for i in t])
            + np.array([log_binomial(n, int(i)) for i in tp])
            - gammaln(r - t + 1) - gammaln(r - tp + 1))
    g_power = k + r - 2 * t
    powers = g_power + n + r - 2 * tp
    sign = np.where((t + tp) % 2 == 1, math.pi, 0.0)
    return r, g_power, powers, base, sign


def amplitude_series(k: int, n: int, params: GateTeleportParams) -> _radial.RadialSeries:
    """<k| K(beta) |n> as a radial series in |beta|."""
    R = params.d + params.t
    r, g_power, powers, base, sign = _gate_terms(k, n, R)
    w = params.weights
    with np.errstate(divide="ignore"):
        logw = np.log(np.abs(w))
        logg = math.log(params.g) if params.g > 0 else -math.inf
    gl = np.where(g_power == 0, 0.0, g_power * logg)
    logc = (math.log(params.norm) - 0.5 * math.log(math.pi)) + logw[r] + base + gl
    keep = np.isfinite(logc)
    s = _radial.RadialSeries(k - n, params.g ** 2 + 1.0, powers[keep], logc[keep],
                             (sign + np.angle(w)[r])[keep])
    return s.collapse()


def _amplitudes(params, nmax=2):
    return {(k, n): amplitude_series(k, n, params)
            for k in range(nmax + 1) for n in range(nmax + 1)}


def block_integral(key, params: GateTeleportParams, _amp=None) -> complex:
    """F_{n,m,k,l} = integral of <k|K|n> conj(<l|K|m>) over |beta| <= B."""
    n, m, k, l = key
    if l != k - n + m:
        raise ValueError(f"block key needs l = k - n + m, got {key}")
    if min(key) < 0:
        raise ValueError(f"negative Fock index in {key}")
    amp = _amp if _amp is not None else {}
    x = amp.get((k, n)) or amplitude_series(k, n, params)
    y = amp.get((l, m)) or amplitude_series(l, m, params)
    return _radial.inner(x, y, params.B)


def gate_success_probability(params: GateTeleportParams, state) -> float:
    """Probability of an outcome with |beta| <= B (independent of g)."""
    c = input_state(state)
    if len(c) > 3:
        raise ValueError("gate inputs carry at most two photons")
    if is_unconditioned(params.B):
        return 1.0
    w2 = np.abs(params.weights) ** 2 * params.norm ** 2 / math.pi
    total = 0.0
    for n, cn in enumerate(c):
        if cn == 0:
            continue
        acc = 0.0
        for r, wr in enumerate(w2):
            s = _radial.displacement_series(n, r, 1.0)
            acc += wr * _radial.inner(s, s, params.B).real
        total += abs(cn) ** 2 * acc
    return min(max(total, 0.0), 1.0)


def gate_fidelity(params: GateTeleportParams, state):
    """(raw, conditional) fidelity of the teleported gate with U_SK|psi>."""
    c = input_state(state)
    if len(c) > 3:
        raise ValueError("gate inputs carry at most two photons")
    N = len(c) - 1
    amp = _amplitudes(params, N)
    raw = 0j
    for n in range(N + 1):
        for m in range(N + 1):
            for k in range(N + 1):
                l = k - n + m
                if not 0 <= l <= N:
                    continue
                w = c[n] * np.conj(c[m]) * np.conj(c[k]) * c[l]
                if w != 0:
                    raw += w * block_integral((n, m, k, l), params, amp)
    raw = raw.real
    if is_unconditioned(params.B):
        return raw, raw
    p = gate_success_probability(params, c)
    return raw, (raw / p if p > 0 else math.nan)


def csign_blocks(params: GateTeleportParams) -> dict:
    amp = {kn: amplitude_series(*kn, params) for kn in ((0, 0), (2, 2), (2, 0), (0, 2))}
    return {name: block_integral(key, params, amp) for name, key in CSIGN_KEYS.items()}


def csign_worst_case_fidelity(params: GateTeleportParams) -> float:
    """Worst-case CSIGN fidelity from two NSS gate teleportations.

    1/2 [F0000 F2222 + F0022 F2200 + |F0202|^2], divided by the joint
    success probability P(|0>) P(|2>) when B is finite.
    """
    b = csign_blocks(params)
    f = 0.5 * (b["F0000"].real * b["F2222"].real + b["F0022"].real * b["F2200"].real
               + abs(b["F0202"]) ** 2)
    if is_unconditioned(params.B):
        return f
    p = gate_success_probability(params, [1]) * gate_success_probability(params, [0, 0, 1])
    return f / p if p > 0 else math.nan


def optimize_gain(params: GateTeleportParams, objective=csign_worst_case_fidelity,
                  g_range=None, tol=1e-6):
    """(g_opt, value) maximizing ``objective`` over the gain at fixed q."""
    lo, hi = g_range or (0.5 * params.q, 1.2)
    return golden_section_max(lambda g: objective(params.with_(g=g)), lo, hi, tol)


@dataclass
class CsignCurve:
    d: int
    t: int
    q: np.ndarray
    g_opt: np.ndarray
    f_worst: np.ndarray
    q_best: float
    g_best: float
    f_best: float

    @property
    def db_best(self) -> float:
        return q_to_db(self.q_best)

    def rows(self):
        for q, g, f in zip(self.q, self.g_opt, self.f_worst):
            yield self.d, self.t, q, q_to_db(q), g, f


def default_q_grid(n: int = 400) -> np.ndarray:
    return np.linspace(0.5, 0.999, n)


def optimize_csign(d: int, t: int = DEFAULT_T, q_grid=None, B=UNCONDITIONED, alphas=None,
                   tol: float = 1e-6, refine: bool = True) -> CsignCurve:
    """Worst-case CSIGN fidelity curve over q (gain optimized per q).

    The maximum over the grid is refined by golden section on the bracket
    formed by its grid neighbours.
    """
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    q_grid = default_q_grid() if q_grid is None else np.asarray(q_grid, dtype=float)
    base = GateTeleportParams(d=d, q=float(q_grid[0]), g=1.0, t=t, B=B, alphas=alphas)

    def best_at(q):
        return optimize_gain(base.with_(q=float(q)), tol=tol)

    g_opt = np.empty(len(q_grid))
    f = np.empty(len(q_grid))
    for i, q in enumerate(q_grid):
        g_opt[i], f[i] = best_at(q)
    i = int(np.argmax(f))
    q_best, g_best, f_best = float(q_grid[i]), float(g_opt[i]), float(f[i])
    if refine and len(q_grid) > 2:
        lo = q_grid[max(i - 1, 0)]
        hi = q_grid[min(i + 1, len(q_grid) - 1)]
        qr, fr = golden_section_max(lambda q: best_at(q)[1], lo, hi, tol=1e-5)
        if fr > f_best:
            q_best, f_best = qr, fr
            g_best = best_at(qr)[0]
    return CsignCurve(d, t, np.asarray(q_grid), g_opt, f, q_best, g_best, f_best)


def cv_cost(d: int, p_target: float, p_d: float) -> int:
    """Single-photon sources for CSIGN success p_target: ceil(2d ln(1-sqrt p)/ln(1-p_d))."""
    if not 0 <= p_target < 1:
        raise ValueError(f"target probability must lie in [0, 1), got {p_target}")
    if not 0 < p_d <= 1:
        raise ValueError(f"gate success probability must lie in (0, 1], got {p_d}")
    if p_target == 0:
        return 0
    if p_d == 1:
        return 2 * d
    return math.ceil(2 * d * math.log(1 - math.sqrt(p_target)) / math.log(1 - p_d))


def inverse_square_pd(d: int) -> float:
    return 1.0 / (d * d)


def format_count(n: int) -> str:
    """Table-style rendering: 94, 2.4k, 121k, 1.3M."""
    for unit, scale in (("M", 10 ** 6), ("k", 10 ** 3)):
        if n >= scale:
            v = n / scale
            return f"{v:.0f}{unit}" if round(v, 1) >= 100 else f"{v:.1f}{unit}"
    return str(n)


TABLE_D = (2, 5, 10, 20, 50, 100)
TABLE_P = (0.1, 0.5, 0.75, 0.9, 0.99, 0.999)


def cost_table(ds=TABLE_D, ps=TABLE_P, pd_model=inverse_square_pd):
    """Rows (d, p_target, n_CV) of the cost table."""
    return [(d, p, cv_cost(d, p, pd_model(d))) for d in ds for p in ps]
