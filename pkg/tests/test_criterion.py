import json

import numpy as np
import pytest

from carpetlab.criterion import (CARPET, FAILS, HOLDS, HOLDS_STRUCTURAL, HYPOTHESIS_MET,
                                 INCONCLUSIVE, NOT_CARPET, UNKNOWN, check_condition_d,
                                 check_hypotheses, check_structural, default_trap_config,
                                 evaluate_criterion)
from carpetlab.dynamics import ATTR_CYCLE, INF_BASIN, PARABOLIC, TrapConfig
from carpetlab.families import (build_family, family_ex_a, family_ex_b, family_ex_c,
                                family_ex_d, family_F, family_G, family_mcmullen,
                                family_parabolic)

LAMBDA4 = 0.31661928989645827
C0 = 1j * np.sqrt(2)


def test_structural_F():
    cond_b, cond_c = check_structural(family_F(0.5, 1, 2))
    assert cond_b.status == HOLDS_STRUCTURAL
    assert cond_c.status == HOLDS         # d1 = 3 >= dinf + 1 = 3


def test_structural_ex_c_fails_c_only():
    cond_b, cond_c = check_structural(family_ex_c())
    assert cond_b.status == HOLDS_STRUCTURAL
    assert cond_c.status == FAILS
    assert cond_c.evidence["group_degrees"] == [2, 1]


def test_structural_ex_b_fails_b():
    cond_b, cond_c = check_structural(family_ex_b())
    assert cond_b.status == FAILS
    assert cond_c.status == HOLDS


def test_structural_mcmullen_colocated():
    cond_b, cond_c = check_structural(family_mcmullen(1e-2, 3, 3))
    assert cond_b.status == HOLDS_STRUCTURAL
    assert cond_c.status == HOLDS         # all six simple zeros share a component
    assert cond_c.evidence["group_degrees"] == [6]


def test_structural_invariant_under_parameter_change():
    a = check_structural(family_G(C0))
    b = check_structural(family_G(2.0 + 1.5j))
    assert [c.status for c in a] == [c.status for c in b]


def test_condition_d_G_holds():
    spec = family_G(C0)
    f = build_family(spec)
    cond = check_condition_d(f, TrapConfig(max_iter=2000), INF_BASIN)
    assert cond.status == HOLDS
    assert len(cond.evidence["first_entries"]) >= 5


def test_condition_d_ex_d_fails_with_cycle_witness():
    f = build_family(family_ex_d(LAMBDA4))
    cond = check_condition_d(f, TrapConfig(max_iter=4000), INF_BASIN)
    assert cond.status == FAILS
    assert cond.evidence["witness"]["classification"] == ATTR_CYCLE


def test_condition_d_parabolic_holds():
    spec = family_parabolic(18.0)
    f = build_family(spec)
    cond = check_condition_d(f, default_trap_config(spec), PARABOLIC)
    assert cond.status == HOLDS


def test_hypotheses_G_met():
    spec = family_G(C0)
    cond = check_hypotheses(spec)
    assert cond.status == HYPOTHESIS_MET
    assert cond.evidence["k"] >= 1


def test_hypotheses_ex_a_fails():
    cond = check_hypotheses(family_ex_a())
    assert cond.status == FAILS
    assert cond.evidence["k"] <= 1


def test_hypotheses_parabolic_met():
    cond = check_hypotheses(family_parabolic(18.0))
    assert cond.status == HYPOTHESIS_MET
    assert cond.evidence["k"] >= 1


def test_counterexample_matrix():
    """Each counterexample violates exactly its named condition."""
    from carpetlab.solve import lambda4
    reports = {
        "a": evaluate_criterion(family_ex_a()),
        "b": evaluate_criterion(family_ex_b()),
        "c": evaluate_criterion(family_ex_c()),
        "d": evaluate_criterion(family_ex_d(lambda4())),
    }
    for which, report in reports.items():
        conds = {"a": report.cond_a, "b": report.cond_b,
                 "c": report.cond_c, "d": report.cond_d}
        assert conds[which].status == FAILS, f"ex-{which}: condition {which} must fail"
        for other, cond in conds.items():
            if other != which:
                assert cond.status != FAILS, \
                    f"ex-{which}: condition {other} unexpectedly FAILS: {cond.reason}"
        assert report.verdict == NOT_CARPET


def test_positive_verdict_G():
    report = evaluate_criterion(family_G(C0))
    assert report.verdict == CARPET
    assert report.cond_a.status == HYPOTHESIS_MET


def test_positive_verdict_parabolic():
    report = evaluate_criterion(family_parabolic(18.0))
    assert report.verdict == CARPET
    assert report.cond_a.route == "parabolic-pole-component"


def test_report_json_roundtrip():
    report = evaluate_criterion(family_ex_c())
    doc = json.loads(report.to_json())
    assert doc["verdict"] == NOT_CARPET
    assert doc["conditions"]["c"]["status"] == FAILS
    assert doc["family"] == "ex-c"
    assert "evidence" in doc


def test_verdict_monotone_in_mask_resolution():
    lo = evaluate_criterion(family_G(C0), mask_res=(256, 256))
    hi = evaluate_criterion(family_G(C0), mask_res=(512, 512))
    assert lo.verdict == hi.verdict == CARPET
