import os
import sys
import numpy as np
import pytest
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

import hilbert_counterexample as hc
from lattice_errors import ParameterError, ResolutionError, SingularityError
from seeding import derive_rng


def test_hilbert_indicator_closed_form():
    assert hc.hilbert_indicator(0.0, 1.0, 2.0) == pytest.approx(np.log(2.0))
    assert hc.hilbert_indicator(0.0, 1.0, 0.5) == 0.0
    assert hc.hilbert_indicator(0.0, 1.0, -1.0) == pytest.approx(-np.log(2.0))
    with pytest.raises(SingularityError):
        hc.hilbert_indicator(0.0, 1.0, 1.0)
    with pytest.raises(ParameterError):
        hc.hilbert_indicator(1.0, 0.0, 0.5)


@pytest.mark.parametrize("x", [-0.7, 0.3, 0.9, 1.8])
@pytest.mark.parametrize("method", ['cauchy', 'excision'])
def test_principal_value_quadrature_matches_closed_form(x, method):
    numeric = hc.hilbert_indicator_quadrature(0.0, 1.0, x, method=method)
    assert numeric == pytest.approx(hc.hilbert_indicator(0.0, 1.0, x), abs=1e-6)


def test_quadrature_matches_closed_form_on_random_intervals():
    rng = derive_rng(11, 'hilbert-random-intervals')
    for _ in range(100):
        a = rng.uniform(-5.0, 5.0)
        b = a + rng.uniform(0.1, 5.0)
        x = rng.uniform(a - 3.0, b + 3.0)
        while min(abs(x - a), abs(x - b)) < 0.05:
            x = rng.uniform(a - 3.0, b + 3.0)
        exact = hc.hilbert_indicator(a, b, x)
        assert hc.hilbert_indicator_quadrature(a, b, x) == pytest.approx(exact, abs=1e-6)


def test_unknown_quadrature_method():
    with pytest.raises(ValueError, match="Unknown quadrature method"):
        hc.hilbert_indicator_quadrature(0.0, 1.0, 0.5, method='trapezoid')


def test_f_n_values():
    assert hc.F_n(1, 0.5) == pytest.approx(0.0, abs=1e-15)
    assert hc.F_n(2, 0.25) == pytest.approx(np.log(3.0), abs=1e-12)
    assert hc.F_n(3, 0.2) == pytest.approx(hc.F_n(3, 0.8), abs=1e-12)
    values = hc.F_n(4, np.array([0.1, 0.3]))
    assert values.shape == (2,)


def test_f_n_minimum_cell_value():
    for n in (1, 2, 5, 16):
        assert hc.F_n(n, 1.0 / (2 * n)) == pytest.approx(np.log(2 * n - 1), abs=1e-12)


def test_f_n_singular_at_nodes():
    with pytest.raises(SingularityError) as info:
        hc.F_n(4, 0.25)
    assert info.value.point == 0.25
    with pytest.raises(SingularityError):
        hc.f_n_piecewise(4, 1.0)
    with pytest.raises(ParameterError):
        hc.F_n(0, 0.5)


def test_piecewise_form_agrees_with_sum():
    rng = np.random.default_rng(1)
    for n in (1, 2, 3, 8, 13):
        for x in rng.uniform(0.0, 1.0, 50):
            assert hc.f_n_piecewise(n, x) == pytest.approx(hc.F_n(n, x), rel=1e-9, abs=1e-9)


@pytest.mark.parametrize("n", [1, 2, 8, 64])
def test_lemma_checks_pass(n):
    report = hc.f_n_lemma_check(n, seed=7)
    assert report.symmetry and report.unimodal and report.minima_ordered
    assert report.passed
    assert report.to_dict()['details']['failed_cell'] is None


def test_weak_l1_of_constant():
    assert hc.weak_l1_norm(hc.GridFunction(0.0, 1.0, np.full(100, 3.0))) == pytest.approx(3.0)


def test_weak_l1_of_reciprocal_depends_on_cell_representative():
    m = 1000
    cells = np.arange(1, m + 1)
    # right-endpoint values 1/(j/m): t * mu{f > t} = 1 at every step
    right = hc.GridFunction(0.0, 1.0, m / cells)
    assert hc.weak_l1_norm(right) == pytest.approx(1.0, rel=1e-12)
    # midpoint values 1/((j - 1/2)/m): the first cell alone gives 2
    mid = hc.GridFunction(0.0, 1.0, 1.0 / hc.midpoints(0.0, 1.0, m))
    assert hc.weak_l1_norm(mid) == pytest.approx(2.0, rel=1e-12)


def test_weak_lp_scaling_and_errors():
    f = hc.GridFunction(0.0, 2.0, np.array([4.0, 1.0]))
    assert hc.weak_lp_norm(f, 1.0) == pytest.approx(4.0)
    assert hc.weak_lp_norm(f.scaled(2.0), 0.5) == pytest.approx(2.0 * hc.weak_lp_norm(f, 0.5))
    with pytest.raises(TypeError):
        hc.weak_l1_norm(np.ones(3))
    with pytest.raises(ParameterError):
        hc.weak_lp_norm(f, 0.0)
    with pytest.raises(ParameterError):
        hc.GridFunction(1.0, 0.0, np.ones(2))


def test_f_n_grid_avoids_nodes():
    grid = hc.f_n_grid(64, 10000)
    assert grid.n_cells == 10048
    assert np.all(np.isfinite(grid.values))
    assert hc.f_n_grid(1, 101).n_cells == 101


def test_weak_l1_lower_bound_grows():
    assert hc.weak_l1_norm(hc.f_n_grid(8, 10000)) >= np.log(15.0) - 0.01
    values = [hc.weak_l1_norm(hc.f_n_grid(n, 10001)) for n in (2, 4, 8, 16)]
    assert all(b > a for a, b in zip(values, values[1:]))


def test_refined_minimum():
    assert hc.refined_minimum(1, cells=101) == pytest.approx(0.0, abs=1e-9)
    assert hc.refined_minimum(64) == pytest.approx(np.log(127.0), abs=1e-3)


def test_divergence_table():
    table = hc.divergence_table([1, 4], cells=1001)
    assert list(table.columns) == ['n', 'grid_min', 'log_2n_minus_1', 'weak_l1_lb', 'cells_used']
    assert table['grid_min'].iloc[0] == pytest.approx(0.0, abs=1e-9)
    assert table['grid_min'].iloc[1] == pytest.approx(np.log(7.0), abs=1e-3)
    with pytest.raises(ResolutionError):
        hc.divergence_table([64], cells=1000)
    with pytest.raises(ParameterError):
        hc.divergence_table([])


def test_divergence_table_is_thread_independent():
    a = hc.divergence_table([2, 8], cells=20001, threads=1)
    b = hc.divergence_table([2, 8], cells=20001, threads=3)
    assert a.equals(b)
