"""Heralded sign-shift gates from linear optics, step by step."""

import numpy as np

from tcsign import fock, nssd

# The three-mode interferometer acts on the signal mode plus two ancillas
# (one photon in, one photon detected).  Its heralded action on |n> is a
# scalar alpha_n per Fock level.
setup = fock.klm_nss_setup()
alpha = fock.heralded_gate_coefficients(setup, 6)
print("alpha_n:", np.round(alpha.real, 6))
print("success probability |alpha_0|^2 =", abs(alpha[0]) ** 2)

# Only the first three levels carry the sign pattern (1, 1, -1) after
# normalization; higher levels do not follow the self-Kerr phase.
print("normalized:", np.round((alpha / alpha[0]).real, 6))

# Two such gates between beam splitters give the controlled sign.
m = fock.csign_logical_matrix()
print("logical CSIGN block:\n", np.round(m.real, 6))

# Generalized gates fix the phase up to level d.  The success probability
# drops by roughly a decade per extra level.
for d in (2, 3, 4):
    p_d, spec = nssd.max_success_probability(d)
    err = np.max(np.abs(nssd.heralded_alphas(spec, d + 1) - spec.alpha_coefficients(d + 1)))
    print(f"d={d}  p_d={p_d:.3e}  interferometer modes={2 * d}  dilation error={err:.1e}")
