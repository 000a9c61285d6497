"""
Optical-cavity swapping stage
=============================

Atoms 4 and 5 meet in an ordinary optical cavity after both optomechanical
stages succeeded.  The cavity field is only virtually excited, so the pair
just exchanges an excitation at rate lambda1^2 / omega_M.  Measuring atoms 4
and 5 in (L1, L3) or (L3, L1) leaves atoms 1 and 8 entangled.

Four products of stage-A pairs feed this stage (cases 1..4).
"""

import numpy as np

from omrepeater import ModelParams, run_full_protocol, stage_a_coefficients, stage_b_coefficients
from omrepeater.metrics import PairStateSummary

params = ModelParams.simplified(omega_m=0.5, g=2.0)
t = 1.0
sa = stage_a_coefficients(params, t)

###############################################################################
# Case 1 has a closed form: E = sin^2(theta) / 2 with
# theta = 2 lambda1^2 (tau - t) / omega_M, and its P does not depend on tau.

print(" lambda1(tau-t)  case  E18      P18")
for dt in np.linspace(0, 2, 5):
    for case in (1, 2, 3, 4):
        b = stage_b_coefficients(sa, params, case, t + dt).b
        s = PairStateSummary.from_amplitudes(b[1], b[4])
        print(f"  {dt:12.2f}  {case:4d}  {s.E:7.4f}  {s.P:7.4f}")

###############################################################################
# The primed outcome mirrors the unprimed one: case 3 matches case 4 primed.

tree = run_full_protocol(params, t, t + 0.7)
print("\nE3 =", tree.E(3), " E4' =", tree.E(4, primed=True))
print("P3 =", tree.P(3), " P4' =", tree.P(4, primed=True))
