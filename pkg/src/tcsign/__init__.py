"""Simulation of teleportation-assisted optical CSIGN gates.

Discrete-variable route: permanents of linear interferometers and
Monte-Carlo accounting of single-photon sources.  Continuous-variable
route: closed-form teleportation fidelities with Fock-superposition inputs
and the generalized nonlinear sign gate NSS_d.
"""

__version__ = "0.1.0"
