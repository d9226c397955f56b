import os
import sys
import numpy as np
import pytest
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

import lattice_expr as le
import projectivity as pj
from free_norm import SearchBudget
from lattice_errors import DimensionError, ParameterError


def test_single_generator_family():
    fam = pj.build_alpha(1, 1.0)
    assert le.evaluate_scalar(fam.f(1), [-3.0]) == 3.0
    with pytest.raises(ParameterError):
        fam.f(2)


def test_coordinate_evaluations():
    fam = pj.build_alpha(3, 1.0)
    assert le.evaluate_rows(fam.f(2), np.eye(3)[1]) == 1.0
    assert le.evaluate_rows(fam.f(2), np.eye(3)[0]) == 0.0
    assert pj.beta_eval(fam.f(2), 3).tolist() == [0.0, 1.0, 0.0]


def test_beta_eval():
    assert pj.beta_eval(le.delta([0.0, 1.0, 0.0]), 3).tolist() == [0.0, 1.0, 0.0]
    assert pj.beta_eval(le.add(le.modulus(le.gen(0)), le.modulus(le.gen(1))), 2).tolist() == [1.0, 1.0]
    with pytest.raises(DimensionError):
        pj.beta_eval(le.gen(3), 3)


def test_beta_after_alpha_is_identity():
    fam = pj.build_alpha(8, 0.5)
    assert np.array_equal(np.array([pj.beta_eval(f, 8) for f in fam.exprs]), np.eye(8))


def test_tail_weight_cancels_at_the_diagonal():
    fam = pj.build_alpha(2, 1.0)
    assert le.evaluate_rows(fam.f(1), np.array([1.0, 1.0])) == 0.0


def test_pairwise_disjoint():
    fam = pj.build_alpha(12, 1.0)
    assert pj.alpha_disjointness_violations(fam, 10_000, 7) == 0
    assert pj.alpha_disjointness(fam, 2000, 7, threads=3)
    with pytest.raises(ParameterError):
        pj.alpha_disjointness(pj.build_alpha(1, 1.0), 10, 7)


def test_a_non_disjoint_family_is_detected():
    fam = pj.build_alpha(3, 1.0)
    broken = pj.AlphaFamily(3, 1.0, (le.modulus(le.gen(0)), le.modulus(le.gen(1)), fam.f(3)))
    assert pj.alpha_disjointness_violations(broken, 100, 7) > 0


def test_norm_sandwich():
    fam = pj.build_alpha(3, 1.0)
    first = pj.alpha_norm_sandwich(fam, [1.0, 0.0, 0.0])
    assert tuple(first) == (True, True)
    assert first.bracket.lower == pytest.approx(1.0, abs=1e-9)
    assert first.bracket.upper == pytest.approx(1.0, abs=1e-9)

    pair = pj.alpha_norm_sandwich(fam, [1.0, 1.0, 0.0])
    assert pair.target == pytest.approx(2.0)
    assert pair.lower_ok and pair.upper_ok

    zero = pj.alpha_norm_sandwich(fam, [0.0, 0.0, 0.0])
    assert zero.target == 0.0
    assert zero.bracket.upper == 0.0


def test_norm_sandwich_for_p_below_one():
    fam = pj.build_alpha(4, 0.5)
    check = pj.alpha_norm_sandwich(fam, [1.0, -2.0, 0.5, 0.0])
    assert check.lower_ok and check.upper_ok
    assert abs(check.gap) <= 1e-9 * check.target


def test_norm_sandwich_budget_and_shape():
    fam = pj.build_alpha(3, 1.0)
    with pytest.raises(ParameterError):
        pj.alpha_norm_sandwich(fam, [1.0, 0.0, 0.0], budget=SearchBudget(n_max=2))
    with pytest.raises(DimensionError):
        pj.alpha_combination(fam, [1.0, 0.0])


def test_f_n_upper_certificates():
    assert pj.f_n_upper_certificates(pj.build_alpha(5, 0.5)) == pytest.approx([1.0] * 5)


@pytest.mark.parametrize("p", [0.5, 1.0])
def test_ball_family(p):
    summary = pj.ball_family_trials(p, 300, 7)
    assert summary['outside_ball'] == 0
    assert summary['violations'] == 0
    assert summary['chain_violations'] == 0
    assert summary['witness'] is None
    assert pj.ball_family_check(p, 50, 8)


def test_ball_family_is_thread_independent():
    assert pj.ball_family_trials(1.0, 100, 3, threads=1) == pj.ball_family_trials(1.0, 100, 3, threads=4)


@pytest.mark.parametrize("p", [0.5, 1.0])
def test_disjoint_pairs_never_share_a_small_ball(p):
    assert pj.disjoint_pairs_outside_balls(p, 2000, 7) == 0


def test_projectivity_report():
    report = pj.projectivity_report(4, 1.0, 500, 7, sandwich_vectors=3)
    for key in ('beta_alpha_identity', 'pairwise_disjoint', 'norm_upper_one', 'norm_sandwich', 'ball_family'):
        assert report[key] is True
    assert report['passed']
    assert report['disjointness_violations'] == 0
    assert len(report['sandwich_gaps']) == 3


def test_projectivity_report_skips_ball_verdict_below_half():
    report = pj.projectivity_report(3, 0.25, 50, 7, sandwich_vectors=1)
    assert report['ball_family'] is None
    assert report['ball_family_summary']['trials'] == 50


def test_projectivity_report_validation():
    with pytest.raises(ParameterError):
        pj.projectivity_report(3, 1.5, 10, 7)
    with pytest.raises(ParameterError):
        pj.projectivity_report(0, 1.0, 10, 7)
