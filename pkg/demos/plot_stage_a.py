"""
Optomechanical swapping stage
=============================

Atoms 1 and 4 start entangled with atoms 2 and 3, which sit in an
optomechanical cavity.  After an interaction time t the cavity photon, the
phonon and atoms 2, 3 are measured.  Three outcomes leave atoms 1 and 4
entangled: two unbalanced pairs and one Bell pair heralded by a photon and a
phonon.

This walks the amplitudes, entropy and heralding probabilities over lambda1 t
for a few mechanical frequencies.
"""

import numpy as np

from omrepeater import ModelParams, linear_entropy_two_term, stage_a_coefficients

###############################################################################
# The eleven amplitudes at one point.  A1 never moves and A2 - A3 stays 1/2.

params = ModelParams.simplified(omega_m=0.5, g=2.0)
sol = stage_a_coefficients(params, 1.0)
for k in range(1, 12):
    print(f"A{k:<2d} = {sol.coef(k):+.6f}")
print("A2 - A3 =", sol.coef(2) - sol.coef(3))

###############################################################################
# Entropy of the unbalanced pair and the two heralding probabilities.
# Raising omega_M stretches the time axis: every rate here is a square of a
# coupling divided by omega_M.

times = np.linspace(0, 10, 11)
for omega in (0.5, 1.0, 1.5):
    p = ModelParams.simplified(omega_m=omega, g=2.0)
    print(f"\nomega_M / lambda1 = {omega}")
    print("  lambda1 t    E14      P14_1    P14_2")
    for t in times:
        a = stage_a_coefficients(p, t).a
        e = linear_entropy_two_term(a[1], a[9])
        print(f"  {t:8.2f}  {e:7.4f}  {abs(a[1])**2 + abs(a[9])**2:7.4f}  {2 * abs(a[3])**2:7.4f}")
