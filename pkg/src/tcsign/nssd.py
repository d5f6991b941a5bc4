"""Synthesis of the generalized nonlinear sign gate NSS_d.

NSS_d reproduces the self-Kerr phases exp(i pi n(n-1)/2) on Fock states
n = 0..d (up to the amplitude alpha0) with a single signal mode and d-1
ancilla photons.  The interferometer is parameterized by a d x d
contraction ``vmat`` built from the roots ``lambdas`` of a polynomial and a
free tuning parameter ``x``; unitary dilation turns it into optics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fock import HeraldedGateSetup, dilate_contraction, heralded_gate_coefficients
from .special import ConvergenceError, binomial

NORM_TOL = 1e-10


def u_sk(m):
    """Self-Kerr phase exp(i pi m(m-1)/2), which is exactly +1 or -1."""
    if np.ndim(m):
        m = np.asarray(m, dtype=np.int64)
        return np.where((m * (m - 1) // 2) % 2 == 0, 1.0, -1.0)
    return 1.0 if (int(m) * (int(m) - 1) // 2) % 2 == 0 else -1.0


def v11_of(d: int) -> float:
    """Signal self-transmission (-1)^(d+1) tan(pi/(4d))."""
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    return (-1) ** (d + 1) * math.tan(math.pi / (4 * d))


def beta_coefficients(d: int, alpha0: complex = 1.0) -> np.ndarray:
    """beta_k = alpha0 sum_l C(k,l) v11^l U_SK(k+l), k = 0..d-1."""
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    v = v11_of(d)
    return np.array([alpha0 * sum(binomial(k, l) * v ** l * u_sk(k + l) for l in range(k + 1))
                     for k in range(d)], dtype=complex)


def alphas_from_betas(v11: float, betas, n_max: int) -> np.ndarray:
    """alpha_n = sum_{k<d} C(n,k) v11^(n-k) beta_k for n = 0..n_max."""
    betas = np.asarray(betas, dtype=complex)
    d = len(betas)
    return np.array([sum(binomial(n, k) * v11 ** (n - k) * betas[k]
                         for k in range(min(n, d - 1) + 1)) for n in range(n_max + 1)])


def normalized_alphas(d: int, n_max: int) -> np.ndarray:
    """Analytic alpha_n / alpha0 for n = 0..n_max (no matrix realization)."""
    return alphas_from_betas(v11_of(d), beta_coefficients(d, 1.0), n_max)


def nssd_double_sum(d: int, n: int, alpha0: complex = 1.0) -> complex:
    """Fock action of NSS_d on |n> written as a double sum over k and l."""
    v = v11_of(d)
    return alpha0 * sum(binomial(n, k) * v ** (n - k) * binomial(k, l) * v ** l * u_sk(k + l)
                        for k in range(min(n, d - 1) + 1) for l in range(k + 1))


def _sort_roots(roots) -> np.ndarray:
    roots = np.asarray(roots, dtype=complex)
    mag = np.round(np.abs(roots), 12)
    ang = np.round(np.mod(np.angle(roots), 2 * np.pi), 12)
    order = np.lexsort((ang, -mag))
    return roots[order]


def elementary_symmetric(values) -> np.ndarray:
    """e_0..e_m of the given values."""
    e = np.zeros(len(values) + 1, dtype=complex)
    e[0] = 1
    for z in values:
        e[1:] = e[1:] + z * e[:-1]
    return e


def solve_lambdas(d: int, alpha0: complex = 1.0) -> np.ndarray:
    """Roots lambda_1..lambda_{d-1} with alpha0 k! e_k(lambda) = beta_k.

    Sorted by decreasing magnitude, ties by ascending phase in [0, 2 pi).
    """
    betas = beta_coefficients(d, alpha0)
    e = np.array([betas[k] / (math.factorial(k) * alpha0) for k in range(d)])
    m = d - 1
    # monic polynomial z^m - e1 z^(m-1) + e2 z^(m-2) - ...
    coeffs = np.array([(-1) ** k * e[k] for k in range(1, d)])
    companion = np.zeros((m, m), dtype=complex)
    companion[0, :] = -coeffs
    if m > 1:
        companion[1:, :-1] = np.eye(m - 1)
    roots = np.linalg.eigvals(companion)
    if not np.all(np.isfinite(roots)):
        raise ConvergenceError("companion-matrix eigenvalues did not converge")
    roots = _sort_roots(roots)
    back = elementary_symmetric(roots)
    resid = max(abs(alpha0 * math.factorial(k) * back[k] - betas[k]) for k in range(d))
    if resid > 1e-8 * max(1.0, abs(alpha0)) * max(1.0, float(np.max(np.abs(betas / alpha0)))):
        raise ConvergenceError(f"root residual {resid:.3g} too large for d = {d}")
    return roots


def assemble_vmat(d: int, alpha0: float, x: float, lambdas) -> np.ndarray:
    """Contraction matrix of the NSS_d family (0-based indices).

    ``lambdas`` come sorted by decreasing magnitude.  Column 0 holds them in
    reverse, so the largest root lands in the bottom slot where it is scaled
    by alpha0 / x^(d-1).  With the largest root unscaled the matrix has a
    column of norm above one and can never be a contraction for d >= 3.
    """
    if x <= 0:
        raise ValueError(f"x must be positive, got {x}")
    lambdas = np.asarray(lambdas, dtype=complex)[::-1]
    v = np.zeros((d, d), dtype=complex)
    v[0, 0] = v11_of(d)
    v[0, 1:] = x
    v[1:d - 1, 0] = lambdas[:d - 2]
    v[d - 1, 0] = alpha0 * lambdas[d - 2] / x ** (d - 1)
    for k in range(1, d - 1):
        v[k, k] = x
    v[d - 1, d - 1] = alpha0 / x ** (d - 2)
    return v


@dataclass
class NssdSpec:
    d: int
    alpha0: float
    v11: float
    betas: np.ndarray
    lambdas: np.ndarray
    x: float
    vmat: np.ndarray = field(repr=False)

    @property
    def p_d(self) -> float:
        return abs(self.alpha0) ** 2

    def check(self) -> None:
        """Raise if any structural invariant is violated."""
        if abs(self.betas[0] - self.alpha0) > 1e-15:
            raise ValueError("beta_0 differs from alpha0")
        if abs(self.v11 - v11_of(self.d)) > 1e-12:
            raise ValueError("v11 is inconsistent with d")
        e = elementary_symmetric(self.lambdas)
        for k in range(self.d):
            if abs(self.alpha0 * math.factorial(k) * e[k] - self.betas[k]) > 1e-9:
                raise ValueError(f"beta_{k} inconsistent with lambdas")
        norm = float(np.linalg.norm(self.vmat, 2))
        if norm > 1 + NORM_TOL:
            raise ValueError(f"vmat spectral norm {norm} exceeds 1")

    def alpha_coefficients(self, n_max: int) -> np.ndarray:
        return alphas_from_betas(self.v11, self.betas, n_max)

    def setup(self) -> HeraldedGateSetup:
        """Optical realization: dilated vmat with ancillas |1>^(d-1) |0>^d."""
        u = dilate_contraction(self.vmat)
        anc = (1,) * (self.d - 1) + (0,) * self.d
        return HeraldedGateSetup(u, anc, anc)

    def to_record(self) -> str:
        """Plain-text export, one ``key: value`` per line."""
        def c(z):
            z = complex(z)
            return f"{z.real:.17g}{z.imag:+.17g}j"
        lines = [
            f"d: {self.d}",
            f"alpha0: {self.alpha0:.17g}",
            f"p_d: {self.p_d:.17g}",
            f"v11: {self.v11:.17g}",
            f"x: {self.x:.17g}",
            "lambdas: " + " ".join(c(z) for z in self.lambdas),
            "betas: " + " ".join(c(z) for z in self.betas),
            "vmat: " + " ".join(c(z) for z in self.vmat.ravel()),
        ]
        return "\n".join(lines) + "\n"


def alpha_coefficients(spec: NssdSpec, n_max: int) -> np.ndarray:
    return spec.alpha_coefficients(n_max)


def synthesize(d: int, alpha0: float, x: float) -> NssdSpec:
    lambdas = solve_lambdas(d, 1.0)  # roots do not depend on alpha0
    return NssdSpec(d=d, alpha0=alpha0, v11=v11_of(d), betas=beta_coefficients(d, alpha0),
                    lambdas=lambdas, x=x, vmat=assemble_vmat(d, alpha0, x, lambdas))


def _best_x(d, alpha0, lambdas, xs):
    norms = np.array([np.linalg.norm(assemble_vmat(d, alpha0, x, lambdas), 2) for x in xs])
    i = int(np.argmin(norms))
    return xs[i], norms[i], i


def min_norm_over_x(d: int, alpha0: float, lambdas, x_range=(1e-3, 1.0), n_points=200):
    """Log scan of x plus one local refinement; returns (x, norm)."""
    xs = np.geomspace(*x_range, n_points)
    x, nrm, i = _best_x(d, alpha0, lambdas, xs)
    lo, hi = xs[max(i - 1, 0)], xs[min(i + 1, n_points - 1)]
    x2, nrm2, _ = _best_x(d, alpha0, lambdas, np.geomspace(lo, hi, n_points))
    return (x2, nrm2) if nrm2 < nrm else (x, nrm)


def max_success_probability(d: int, x_range=(1e-3, 1.0), n_points=200, tol=1e-6,
                            alpha_min=1e-8):
    """Largest p_d = alpha0^2 for which some x gives ||vmat||_2 <= 1.

    Bisection on alpha0 (feasibility is monotone in alpha0 at fixed x since
    alpha0 scales only the last row) with an inner scan over x.
    """
    if not 2 <= d <= 7:
        raise ValueError(f"synthesis supports 2 <= d <= 7, got {d}")
    lambdas = solve_lambdas(d, 1.0)

    def feasible(a):
        x, nrm = min_norm_over_x(d, a, lambdas, x_range, n_points)
        return nrm <= 1.0, x

    ok, x_lo = feasible(alpha_min)
    if not ok:
        raise ConvergenceError(f"no feasible x found for d = {d} even at alpha0 = {alpha_min}")
    lo, hi = alpha_min, 1.0
    ok_hi, x_hi = feasible(hi)
    if ok_hi:
        lo, x_lo = hi, x_hi
    else:
        while (hi - lo) > tol * lo:
            mid = math.sqrt(lo * hi) if hi / lo > 4 else 0.5 * (lo + hi)
            ok, x = feasible(mid)
            if ok:
                lo, x_lo = mid, x
            else:
                hi = mid
    spec = synthesize(d, lo, x_lo)
    spec.check()
    return spec.p_d, spec


def check_self_kerr(spec: NssdSpec, tol: float = 1e-9) -> float:
    """Max deviation of alpha_n/alpha0 from U_SK(n) over n <= d."""
    a = spec.alpha_coefficients(spec.d) / spec.alpha0
    err = max(abs(a[n] - u_sk(n)) for n in range(spec.d + 1))
    if err > tol:
        raise ValueError(f"self-Kerr mismatch {err:.3g}")
    return err


def heralded_alphas(spec: NssdSpec, n_max: int) -> np.ndarray:
    """Alpha_n from permanents of the dilated interferometer."""
    return heralded_gate_coefficients(spec.setup(), n_max)
