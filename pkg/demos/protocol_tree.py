"""
Full repeater tree
==================

Every measurement branch of the protocol with its conditional and cumulative
probability, followed by the invariant report.  The same table comes out of
``omrepeater protocol --check``.
"""

from omrepeater import ModelParams, check_invariants, run_full_protocol
from omrepeater.protocol import Stage

tree = run_full_protocol(ModelParams.simplified(0.5, 2.0), t=1.0, tau=2.0)

for stage in Stage:
    print(f"\n{stage.value}")
    for b in tree.stage_branches(stage):
        e = "" if b.pair_summary is None else f"E={b.pair_summary.E:.4f}"
        case = "" if b.case_id is None else f"case {b.case_id} "
        print(f"  {case}{b.outcome_label.label():40s} {b.classification.value:14s}"
              f" p={b.conditional_probability:.6f} cum={b.cumulative_probability:.6f} {e}")

print()
for line in check_invariants(tree).lines():
    print(line)
