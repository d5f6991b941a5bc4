"""Continuous-variable teleportation of Fock states and of a CSIGN gate."""

import numpy as np

from tcsign import cv_gate, cv_teleport as cv
from tcsign.special import q_to_db

q = 0.9
print(f"squeezing q={q} is {q_to_db(q):.1f} dB")

# With the gain set to q the channel is pure loss: |n> survives with q^(2n).
for n in range(3):
    print(f"|{n}>  F(g=q) = {cv.average_fidelity(cv.fock(n), q, q)[0]:.4f}")

# Conditioning on small homodyne outcomes trades rate for fidelity.
psi = cv.fock(2)
for B in (0.5, 1.0, 2.0, np.inf):
    p = cv.success_probability(psi, q, B)
    raw, cond = cv.average_fidelity(psi, q, q, B)
    print(f"B={B:4}  P={p:.3f}  F={cond:.4f}  Q={p * cond:.4f}")

# Best gain for the two-photon state lies between q and 1.
print("g_opt(|2>) =", round(cv.optimize_gain(psi, q)[0], 4))

# Gate teleportation: a resource built from the NSS_d gate carries the
# self-Kerr phase, so the receiver applies an f-deformed displacement.
for d in (2, 10):
    params = cv_gate.GateTeleportParams(d=d, q=q, g=1.0)
    g, f = cv_gate.optimize_gain(params)
    print(f"d={d:3d}  worst-case CSIGN fidelity {f:.4f} at g={g:.4f}")

# Source counts needed for a target success probability with p_d = 1/d^2.
for d, p, n in cv_gate.cost_table(ds=(2, 10), ps=(0.5, 0.99)):
    print(f"d={d} p={p}: {cv_gate.format_count(n)} sources")
