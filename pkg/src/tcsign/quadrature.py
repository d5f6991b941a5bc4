"""Brute-force outcome-plane quadrature used to check the closed forms.

Operators are built as truncated Fock-space matrices (displacements from a
matrix exponential) and integrated over the disc |beta| <= B with a polar
Gauss-Legendre rule (200 radial x 128 angular nodes by default).
"""

from __future__ import annotations

import functools
import math

import numpy as np
from scipy.linalg import expm

from .special import is_unconditioned

N_RADIAL = 200
N_ANGULAR = 128
DEFAULT_LEVELS = 60


def annihilation(levels: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, levels)), 1).astype(complex)


def displacement_matrix(alpha: complex, levels: int = DEFAULT_LEVELS) -> np.ndarray:
    """Truncated D(alpha) = exp(alpha a^dag - alpha* a) by matrix exponential."""
    a = annihilation(levels)
    return expm(alpha * a.conj().T - np.conj(alpha) * a)


@functools.lru_cache(maxsize=8)
def _generator_eig(levels: int):
    a = annihilation(levels)
    h = 1j * (a.conj().T - a)  # Hermitian; D(x) = exp(-i x h) for real x
    return np.linalg.eigh(h)


def real_displacement(x: float, levels: int) -> np.ndarray:
    """Truncated D(x) for real x via one cached eigendecomposition."""
    w, v = _generator_eig(levels)
    return (v * np.exp(-1j * x * w)[None, :]) @ v.conj().T


def polar_nodes(radius: float, n_r: int = N_RADIAL, n_phi: int = N_ANGULAR):
    """Radial Gauss-Legendre nodes on [0, radius] and uniform angles."""
    x, w = np.polynomial.legendre.leggauss(n_r)
    rho = 0.5 * radius * (x + 1)
    w_rho = 0.5 * radius * w * rho  # includes the Jacobian rho
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    return rho, w_rho, phi, 2 * np.pi / n_phi


def _radius(B, decay=None):
    if is_unconditioned(B):
        raise ValueError("quadrature needs a finite conditioning radius")
    return float(B)


def levels_for(B, g=1.0, extra=0):
    """Fock truncation adequate for displacements up to max(g, 1) * B."""
    x = max(g, 1.0) * float(B)
    return max(40, int(x * x + 8 * x + 20) + extra)


def integrate_operator(op_at_radius, radius, integrand, n_r=N_RADIAL, n_phi=N_ANGULAR):
    """Integrate integrand(K(beta)) over the disc of the given radius.

    ``op_at_radius(rho)`` returns the operator at real positive beta.  At
    angle phi the operator is R K R^dag with R = diag(e^{i n phi}) (rotation
    covariance of displacements).  ``integrand(K, R)`` receives the radial
    operator and the (n_phi, levels) array of rotation phases and must
    return the integrand summed over the angles (scalar or array).
    """
    rho, w_rho, phi, w_phi = polar_nodes(radius, n_r, n_phi)
    total = 0.0
    for r, wr in zip(rho, w_rho):
        K = op_at_radius(r)
        R = np.exp(1j * np.outer(phi, np.arange(K.shape[0])))
        total = total + wr * w_phi * integrand(K, R)
    return total


def _states(states, levels):
    states = np.atleast_2d(np.asarray(states, dtype=complex))
    out = np.zeros((states.shape[0], levels), dtype=complex)
    out[:, :states.shape[1]] = states
    return out


def _norm_sq(psi):
    # sum_k |(R K R^dag psi)_k|^2 = |K R^dag psi|^2
    def f(K, R):
        v = (R.conj()[:, None, :] * psi[None]) @ K.T
        return np.sum(np.abs(v) ** 2, axis=(0, 2))
    return f


def _overlap_sq(psi):
    # |psi^dag R K R^dag psi|^2
    def f(K, R):
        left = R[:, None, :] * psi.conj()[None]
        right = R.conj()[:, None, :] * psi[None]
        amp = np.sum(left * (right @ K.T), axis=-1)
        return np.sum(np.abs(amp) ** 2, axis=0)
    return f


def state_transfer(q, g, levels=DEFAULT_LEVELS):
    """Returns rho -> sqrt((1-q^2)/pi) D(g rho) q^n D(-rho)."""
    qn = q ** np.arange(levels)
    pref = math.sqrt((1 - q * q) / math.pi)

    def op(rho):
        return pref * (real_displacement(g * rho, levels) * qn[None, :]) @ \
            real_displacement(-rho, levels)
    return op


def success_probability(states, q, B, levels=None, **kw):
    """P(B) for one state or a stack of states (one per row)."""
    levels = levels or levels_for(B, q)
    psi = _states(states, levels)
    out = integrate_operator(state_transfer(q, q, levels), _radius(B), _norm_sq(psi), **kw)
    return out if np.ndim(states) > 1 else float(out[0])


def fidelity_integral(states, q, g, B, levels=None, **kw):
    levels = levels or levels_for(B, g)
    psi = _states(states, levels)
    out = integrate_operator(state_transfer(q, g, levels), _radius(B), _overlap_sq(psi), **kw)
    return out if np.ndim(states) > 1 else float(out[0])


def gate_transfer(weights, norm, g, levels=DEFAULT_LEVELS):
    """rho -> (N/sqrt(pi)) D(g rho) W D(-rho) with W = diag(weights)."""
    W = np.zeros(levels, dtype=complex)
    W[:len(weights)] = weights
    pref = norm / math.sqrt(math.pi)

    def op(rho):
        return pref * (real_displacement(g * rho, levels) * W[None, :]) @ \
            real_displacement(-rho, levels)
    return op


def gate_success_probability(states, weights, norm, B, levels=None, **kw):
    levels = levels or levels_for(B, 1.0, len(weights))
    psi = _states(states, levels)
    out = integrate_operator(gate_transfer(weights, norm, 0.0, levels), _radius(B),
                             _norm_sq(psi), **kw)
    return out if np.ndim(states) > 1 else float(out[0])


def gate_fidelity_integral(states, weights, norm, g, B, levels=None, **kw):
    levels = levels or levels_for(B, g, len(weights))
    psi = _states(states, levels)
    out = integrate_operator(gate_transfer(weights, norm, g, levels), _radius(B),
                             _overlap_sq(psi), **kw)
    return out if np.ndim(states) > 1 else float(out[0])


def gate_block(key, weights, norm, g, B, levels=None, **kw):
    """Integral of <k|K|n> conj(<l|K|m>) over the disc, key = (n, m, k, l)."""
    n, m, k, l = key
    levels = levels or levels_for(B, g, len(weights))

    def f(K, R):
        Kk = R[:, k] * K[k, n] * R[:, n].conj()
        Kl = R[:, l] * K[l, m] * R[:, m].conj()
        return np.sum(Kk * Kl.conj())
    return complex(integrate_operator(gate_transfer(weights, norm, g, levels), _radius(B), f, **kw))
