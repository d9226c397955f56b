import os
import sys
import pytest
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

import acceptance_suite
import stable_constants as sc
from acceptance_suite import CRITERIA, self_test


def test_criteria_names_are_unique():
    names = [name for name, _ in CRITERIA]
    assert len(names) == len(set(names)) == 12


def test_filter_selects_hilbert_criteria_only():
    table = self_test('hilbert')
    assert list(table['criterion']) == ['hilbert-minima', 'hilbert-lemma', 'hilbert-weak-l1']
    assert table['passed'].all()
    assert list(table.columns) == ['criterion', 'passed', 'detail', 'seconds']


def test_filter_without_match_is_empty():
    assert self_test('no-such-criterion').empty


@pytest.mark.parametrize("name", ['apq-limit', 'apq-uniform-scan', 'free-norm-exact-closure',
                                  'convexity-constants', 'property-suites'])
def test_fast_criteria_pass(name):
    table = self_test(name)
    assert len(table) == 1
    assert table['passed'].iloc[0], table['detail'].iloc[0]


def test_corrupted_gamma_coefficients_fail_only_the_stable_criteria(monkeypatch):
    monkeypatch.setattr(sc, 'LANCZOS_COEFFICIENTS', sc.LANCZOS_COEFFICIENTS * 1.1)
    assert not self_test('apq-uniform-scan')['passed'].iloc[0]
    assert not acceptance_suite.check_apq_cauchy()[0]
    assert self_test('convexity-constants')['passed'].iloc[0]


def test_domain_errors_count_as_failures(monkeypatch):
    def broken():
        return sc.a_pq(1.0, 1.0)

    monkeypatch.setattr(acceptance_suite, 'CRITERIA', (('broken', broken),))
    table = self_test()
    assert not table['passed'].iloc[0]
    assert table['detail'].iloc[0].startswith('DivergenceError')
