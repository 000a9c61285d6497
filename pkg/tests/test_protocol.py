import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from omrepeater.dynamics import StageASolution
from omrepeater.hilbert import AtomLevel
from omrepeater.measurement import ProjectorSpec
from omrepeater.metrics import PairStateSummary
from omrepeater.models import ModelParams
from omrepeater.protocol import (
    SYMMETRY_IDENTITIES,
    Classification,
    Stage,
    check_invariants,
    run_full_protocol,
    run_stage_a,
    verify_symmetries,
)

from conftest import FIG_T

L1, L3 = AtomLevel.L1, AtomLevel.L3


@pytest.fixture(scope="module")
def tree():
    return run_full_protocol(ModelParams.simplified(0.5, 2.0), FIG_T, FIG_T + 1.0)


def test_stage_a_at_time_zero():
    recs = run_stage_a(ModelParams.simplified(), 0.0)
    by_atoms = {
        (r.outcome_label.atom_outcomes[1], r.outcome_label.atom_outcomes[2]): r for r in recs
    }
    assert set(by_atoms) == {(L3, L3), (L3, L1), (L1, L1), (L1, L3)}
    for r in recs:
        assert r.conditional_probability == pytest.approx(0.25, abs=1e-15)
        assert r.outcome_label.mode_outcomes == {"a1": 0, "b1": 0}
    # A1 and A5 carry a product of the outer atoms; psi1, psi2 are products at t = 0
    assert by_atoms[(L3, L1)].name == "psi1"
    assert by_atoms[(L1, L3)].name == "psi2"
    assert by_atoms[(L3, L1)].pair_summary.E == 0


def test_stage_a_names_and_classes(tree):
    recs = tree.stage_branches(Stage.A_LEFT)
    names = {r.name: r for r in recs if r.name}
    assert set(names) == {"psi1", "psi2", "psi3"}
    assert names["psi3"].classification is Classification.HERALDED_BELL
    assert names["psi3"].pair_summary.E == pytest.approx(0.5, abs=1e-14)
    assert names["psi1"].classification is Classification.SUCCESS
    p = tree.stage_a.p_pair
    assert names["psi1"].conditional_probability == pytest.approx(p, abs=1e-15)
    assert names["psi2"].conditional_probability == pytest.approx(p, abs=1e-15)


def test_node_sums(tree):
    for total in tree.node_sums().values():
        assert total == pytest.approx(1.0, abs=1e-12)


def test_cumulative_probabilities(tree):
    p = tree.stage_a.p_pair
    for rec in tree.stage_branches(Stage.B):
        assert rec.cumulative_probability == pytest.approx(p * p * rec.conditional_probability, abs=1e-15)
    success = [r for r in tree.stage_branches(Stage.B) if r.classification is Classification.SUCCESS]
    assert {r.name for r in success} == {"psi", "psi'"}
    assert len(success) == 8


def test_invariants_pass(tree):
    report = check_invariants(tree)
    assert report.passed, report.lines()
    assert all(line.startswith("PASS") for line in report.lines())


def test_product_at_tau_equal_t():
    tree = run_full_protocol(ModelParams.simplified(1.0, 1.5), 2.0, 2.0)
    for summary in tree.final_results.values():
        assert summary.E == pytest.approx(0.0, abs=1e-15)


@settings(max_examples=20, deadline=None)
@given(omega=st.floats(0.2, 2.0), g=st.floats(0.1, 3.0), t=st.floats(0.1, 5.0), dtau=st.floats(0.0, 10.0))
def test_case_one_closed_form(omega, g, t, dtau):
    p = ModelParams.simplified(omega, g)
    tree = run_full_protocol(p, t, t + dtau)
    a = tree.stage_a.a
    theta = 2 * p.lambda1**2 * dtau / p.omega_m
    expected_p = abs(a[1]) ** 2 * abs(a[9]) ** 2 / tree.stage_a.p_pair**2
    assert tree.P(1) == pytest.approx(expected_p, rel=1e-10, abs=1e-15)
    if expected_p > 1e-12:
        assert tree.E(1) == pytest.approx(0.5 * np.sin(theta) ** 2, abs=1e-9)
    assert verify_symmetries(tree).passed


def test_negative_control_perturbed_stage_a(tree):
    a = tree.stage_a.a.copy()
    a[9] += 1e-3
    broken = dataclasses.replace(tree, stage_a=StageASolution(tree.t, a, tree.params))
    report = check_invariants(broken)
    assert not report.passed
    assert "A2 = A9, A3 = A10, A4 = A11" in report.failures


def test_negative_control_perturbed_pair(tree):
    finals = dict(tree.final_results)
    s = finals[(3, False)]
    finals[(3, False)] = PairStateSummary.from_amplitudes(s.c1 * (1 + 1e-3), s.c2)
    report = verify_symmetries(dataclasses.replace(tree, final_results=finals))
    assert set(report.failures) == {"E3 = E4'", "P3 = P4'"}


def test_symmetry_table_covers_every_final_result(tree):
    keys = {k for pair in SYMMETRY_IDENTITIES for k in pair}
    assert keys == set(tree.final_results)


def test_rejects_tau_before_t():
    with pytest.raises(ValueError):
        run_full_protocol(ModelParams.simplified(), 2.0, 1.0)
    with pytest.raises(ValueError):
        run_stage_a(ModelParams.simplified(), -1.0)


def test_right_stage_mirrors_left(tree):
    left = tree.stage_branches(Stage.A_LEFT)
    right = tree.stage_branches(Stage.A_RIGHT)
    assert [r.outcome_label for r in left] == [r.outcome_label for r in right]
    assert ProjectorSpec({"a1": 1, "b1": 1}, {1: L3, 2: L3}) in {r.outcome_label for r in left}
