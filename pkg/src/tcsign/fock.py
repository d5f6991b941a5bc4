"""Multimode Fock-state amplitudes through linear interferometers.

Mode convention: a unitary ``U`` maps creation operators as
``a_i^dag -> sum_j U[i, j] a_j^dag``.  Composition of two stages applied in
order ``U1`` then ``U2`` is therefore ``U1 @ U2``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .special import PERMANENT_MAX_DIM, permanent

UNITARITY_TOL = 1e-10


class ContractionError(ValueError):
    """Raised when a matrix to be dilated has spectral norm above one."""

    def __init__(self, norm: float):
        super().__init__(f"matrix is not a contraction: spectral norm {norm:.12g} > 1")
        self.norm = norm


def _occ(x) -> tuple[int, ...]:
    t = tuple(int(c) for c in x)
    if any(c < 0 for c in t):
        raise ValueError(f"occupations must be nonnegative, got {t}")
    return t


def check_unitary(u, tol: float = UNITARITY_TOL) -> float:
    """Return ``max|U^dag U - I|``; raise if it exceeds ``tol``."""
    u = np.asarray(u, dtype=complex)
    err = float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))
    if err > tol:
        raise ValueError(f"matrix is not unitary: max|U^dag U - I| = {err:.3g}")
    return err


def output_amplitude(unitary, in_occ, out_occ) -> complex:
    """<out_occ| U |in_occ> for Fock inputs and outputs."""
    u = np.asarray(unitary, dtype=complex)
    in_occ, out_occ = _occ(in_occ), _occ(out_occ)
    if len(in_occ) != u.shape[0] or len(out_occ) != u.shape[0]:
        raise ValueError("occupation length does not match the number of modes")
    n = sum(in_occ)
    if n != sum(out_occ):
        raise ValueError(f"photon number mismatch: {n} in, {sum(out_occ)} out")
    if n > PERMANENT_MAX_DIM:
        raise ValueError(f"{n} photons exceed the permanent limit {PERMANENT_MAX_DIM}")
    rows = [i for i, c in enumerate(in_occ) for _ in range(c)]
    cols = [j for j, c in enumerate(out_occ) for _ in range(c)]
    norm = math.prod(math.factorial(c) for c in in_occ + out_occ)
    return permanent(u[np.ix_(rows, cols)]) / math.sqrt(norm)


def occupations(n_photons: int, n_modes: int):
    """All occupation tuples with ``n_photons`` spread over ``n_modes``."""
    for bars in itertools.combinations(range(n_photons + n_modes - 1), n_modes - 1):
        prev, occ = -1, []
        for b in bars:
            occ.append(b - prev - 1)
            prev = b
        occ.append(n_photons + n_modes - 2 - prev)
        yield tuple(occ)


@dataclass(frozen=True)
class HeraldedGateSetup:
    """Single-mode heralded gate: signal in mode 0, ancillas in modes 1.."""

    unitary: np.ndarray
    ancilla_in: tuple[int, ...]
    herald_out: tuple[int, ...]
    signal_mode: int = 0

    def __post_init__(self):
        u = np.asarray(self.unitary, dtype=complex)
        object.__setattr__(self, "unitary", u)
        object.__setattr__(self, "ancilla_in", _occ(self.ancilla_in))
        object.__setattr__(self, "herald_out", _occ(self.herald_out))
        if self.signal_mode != 0:
            raise ValueError("the signal mode must be mode 0")
        check_unitary(u)
        if len(self.ancilla_in) != u.shape[0] - 1 or len(self.herald_out) != u.shape[0] - 1:
            raise ValueError("ancilla and herald patterns must cover modes 1..m-1")
        if sum(self.ancilla_in) != sum(self.herald_out):
            raise ValueError("ancilla and herald photon totals differ")


def heralded_gate_coefficients(setup: HeraldedGateSetup, n_max: int) -> np.ndarray:
    """Conditional amplitudes alpha_n = <n, herald| U |n, ancilla>, n = 0..n_max."""
    if n_max + sum(setup.ancilla_in) > PERMANENT_MAX_DIM:
        raise ValueError(
            f"n_max = {n_max} plus {sum(setup.ancilla_in)} ancilla photons "
            f"exceeds the permanent limit {PERMANENT_MAX_DIM}")
    return np.array([
        output_amplitude(setup.unitary, (n, *setup.ancilla_in), (n, *setup.herald_out))
        for n in range(n_max + 1)])


def klm_nss_unitary() -> np.ndarray:
    """Three-mode interferometer of the KLM nonlinear sign-shift gate."""
    s2 = math.sqrt(2.0)
    return np.array([
        [1 - s2, -2 ** -0.25, math.sqrt(3 / s2 - 2)],
        [-2 ** -0.25, 0.5, 1 / s2 - 0.5],
        [math.sqrt(3 / s2 - 2), 1 / s2 - 0.5, s2 - 0.5],
    ], dtype=complex)


def klm_nss_setup() -> HeraldedGateSetup:
    """NSS gate: ancilla |1> in mode 1, |0> in mode 2, herald (1, 0)."""
    return HeraldedGateSetup(klm_nss_unitary(), (1, 0), (1, 0))


def klm_nss_alpha(n: int) -> float:
    """Closed-form conditional amplitude of the KLM NSS gate on |n>."""
    return 0.5 * (1 - math.sqrt(2)) ** n * (1 - (2 + math.sqrt(2)) * n)


def dilate_contraction(v) -> np.ndarray:
    """Embed a contraction ``v`` as the upper-left block of a unitary.

    Defect construction from the SVD ``v = W S V^dag``:
    ``[[v, W C W^dag], [V C V^dag, -v^dag]]`` with ``C = sqrt(1 - S^2)``.
    Each of the last ``d`` columns is rephased so its first nonzero entry
    is real positive.
    """
    v = np.asarray(v, dtype=complex)
    if v.ndim != 2 or v.shape[0] != v.shape[1]:
        raise ValueError(f"dilation needs a square matrix, got shape {v.shape}")
    d = v.shape[0]
    w, s, vh = np.linalg.svd(v)
    if s[0] > 1 + 1e-10:
        raise ContractionError(float(s[0]))
    c = np.sqrt(np.clip(1.0 - s * s, 0.0, None))
    vv = vh.conj().T
    u = np.block([[v, (w * c) @ w.conj().T],
                  [(vv * c) @ vh, -v.conj().T]])
    for j in range(d, 2 * d):
        col = u[:, j]
        nz = np.flatnonzero(np.abs(col) > 1e-12)
        if nz.size:
            z = col[nz[0]]
            u[:, j] = col * (abs(z) / z)
    return u


def beam_splitter(n_modes: int, i: int, j: int) -> np.ndarray:
    """Balanced beam splitter between modes i and j: [[1, 1], [1, -1]]/sqrt 2."""
    u = np.eye(n_modes, dtype=complex)
    r = 1 / math.sqrt(2)
    u[i, i], u[i, j], u[j, i], u[j, j] = r, r, r, -r
    return u


def embed(n_modes: int, block, modes) -> np.ndarray:
    """Place ``block`` acting on ``modes`` into an n-mode identity."""
    u = np.eye(n_modes, dtype=complex)
    u[np.ix_(modes, modes)] = block
    return u


# Dual-rail layout: qubit A uses modes (0, 1), qubit B modes (2, 3).
# |1bar> puts the photon in the first mode of the pair, |0bar> in the second.
# The NSS ancillas for the two signal modes 0 and 2 sit in modes 4,5 and 6,7.
CSIGN_MODES = 8
_DUAL_RAIL = {0: (0, 1), 1: (1, 0)}


def csign_unitary() -> np.ndarray:
    """8-mode interferometer: beam splitter, two NSS gates, beam splitter."""
    nss = klm_nss_unitary()
    bs = beam_splitter(CSIGN_MODES, 0, 2)
    gates = embed(CSIGN_MODES, nss, [0, 4, 5]) @ embed(CSIGN_MODES, nss, [2, 6, 7])
    return bs @ gates @ bs


def csign_logical_matrix() -> np.ndarray:
    """Heralded 4x4 map on the dual-rail basis |00>, |01>, |10>, |11>.

    Ancillas start as (1, 0) per NSS gate and are heralded on (1, 0).
    """
    u = csign_unitary()
    anc = (1, 0, 1, 0)
    basis = [(a, b) for a in (0, 1) for b in (0, 1)]
    out = np.zeros((4, 4), dtype=complex)
    for c, (a, b) in enumerate(basis):
        occ_in = _DUAL_RAIL[a] + _DUAL_RAIL[b] + anc
        for r, (x, y) in enumerate(basis):
            occ_out = _DUAL_RAIL[x] + _DUAL_RAIL[y] + anc
            out[r, c] = output_amplitude(u, occ_in, occ_out)
    return out
