import os
import sys
import numpy as np
import pytest
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

import lattice_expr as le
import quasi_lattice as ql
from lattice_errors import DimensionError, ParameterError
from seeding import derive_rng


def test_quasi_norms():
    L = ql.CoordinateLattice.weighted_lr(0.5, 2)
    assert ql.quasi_norm(L, [1.0, 1.0]) == pytest.approx(4.0)
    assert ql.quasi_norm(L, [0.0, 0.0]) == 0.0
    grid = ql.CoordinateLattice.lp_grid(1.0, 4)
    assert ql.quasi_norm(grid, [1.0, 1.0, 1.0, 1.0]) == pytest.approx(1.0)
    sup = ql.CoordinateLattice.weighted_lr(float('inf'), 3)
    assert ql.quasi_norm(sup, [1.0, -5.0, 2.0]) == 5.0
    with pytest.raises(DimensionError):
        ql.quasi_norm(L, [1.0, 2.0, 3.0])


def test_quasi_norm_modulus():
    assert ql.quasi_norm_modulus(ql.CoordinateLattice.weighted_lr(0.5, 2)) == 2.0
    assert ql.quasi_norm_modulus(ql.CoordinateLattice.weighted_lr(2.0, 2)) == 1.0


@pytest.mark.parametrize("r", [0.25, 0.5, 0.75])
def test_quasi_norm_inequalities_below_one(r):
    L = ql.CoordinateLattice.weighted_lr(r, 5, weights=(0.5, 1.0, 2.0, 1.0, 0.25))
    delta = ql.quasi_norm_modulus(L)
    assert delta == pytest.approx(2.0 ** (1.0 / r - 1.0))
    rng = derive_rng(5, 'quasi-norm-inequalities', int(100 * r))
    x, y = rng.standard_normal((2, 5000, 5))
    nx, ny, nxy = ql._norms(L, x), ql._norms(L, y), ql._norms(L, x + y)
    assert np.all(nxy ** r <= (nx ** r + ny ** r) * (1 + 1e-12))
    assert np.all(nxy <= delta * (nx + ny) * (1 + 1e-12))
    # equal disjoint halves attain the modulus
    u, v = np.array([1.0, 0, 0, 0, 0]), np.array([0, 0, 0, 0, 2.0 ** (1.0 / r)])
    assert ql.quasi_norm(L, u + v) == pytest.approx(delta * (ql.quasi_norm(L, u) + ql.quasi_norm(L, v)))


def test_invalid_lattices():
    with pytest.raises(ParameterError):
        ql.CoordinateLattice.weighted_lr(0.0, 2)
    with pytest.raises(ParameterError):
        ql.CoordinateLattice.weighted_lr(1.0, 2, weights=(1.0, -1.0))
    with pytest.raises(DimensionError):
        ql.CoordinateLattice.weighted_lr(1.0, 2, weights=(1.0,))
    with pytest.raises(ParameterError):
        ql.CoordinateLattice.lp_grid(1.0, 0)


def test_describe():
    assert ql.CoordinateLattice.lp_grid(0.5, 8).describe() == 'lpgrid:0.5:8'


def test_basis_tuple_ratio_on_l_half():
    L = ql.CoordinateLattice.weighted_lr(0.5, 4)
    assert ql.convexity_ratio(L, np.eye(4), 1.0) == pytest.approx(4.0, abs=1e-9)
    assert ql.convexity_ratio(L, np.eye(4), 0.5) == pytest.approx(1.0, abs=1e-9)


def test_convexity_ratio_errors_and_zero_tuple():
    L = ql.CoordinateLattice.weighted_lr(1.0, 3)
    assert ql.convexity_ratio(L, np.zeros((2, 3)), 1.0) == 0.0
    with pytest.raises(DimensionError):
        ql.convexity_ratio(L, np.zeros((2, 2)), 1.0)
    with pytest.raises(ParameterError):
        ql.convexity_ratio(L, np.eye(3), 0.0)


@pytest.mark.parametrize("p", [0.25, 0.5, 1.0])
def test_lp_grid_is_p_convex_with_constant_one(p):
    report = ql.p_convexity_lower_bound(ql.CoordinateLattice.lp_grid(p, 8), p, 300, 7)
    assert report.bound == pytest.approx(1.0, abs=1e-9)
    assert report.witness.shape[1] == 8
    assert report.witness_exponent == p


def test_l1_grid_scan_is_flat():
    reports = ql.convexity_monotonicity_scan(ql.CoordinateLattice.lp_grid(1.0, 8), [0.25, 0.5, 1.0], 300, 7)
    assert [r.bound for r in reports] == pytest.approx([1.0, 1.0, 1.0], abs=1e-9)


def test_scan_is_monotone_and_witnesses_are_valid():
    L = ql.CoordinateLattice.weighted_lr(0.5, 4)
    reports = ql.convexity_monotonicity_scan(L, [0.25, 0.5, 0.75, 1.0], 200, 3)
    bounds = [r.bound for r in reports]
    assert all(b >= a for a, b in zip(bounds, bounds[1:]))
    for r in reports:
        assert ql.convexity_ratio(L, r.witness, r.witness_exponent) == pytest.approx(r.bound, rel=1e-12)
        assert r.witness_exponent <= r.exponent
    with pytest.raises(ParameterError, match="ascending"):
        ql.convexity_monotonicity_scan(L, [1.0, 0.5], 10, 3)


def test_lower_bound_is_reproducible_across_threads():
    L = ql.CoordinateLattice.weighted_lr(0.5, 3)
    a = ql.p_convexity_lower_bound(L, 1.0, 200, 9, threads=1)
    b = ql.p_convexity_lower_bound(L, 1.0, 200, 9, threads=4)
    assert a.bound == b.bound
    assert np.array_equal(a.witness, b.witness)


def test_krivine_psum_matches_convexity_numerator():
    L = ql.CoordinateLattice.weighted_lr(0.5, 3)
    rng = np.random.default_rng(2)
    xs = rng.standard_normal((3, 3))
    f = le.power_sum([le.gen(0), le.gen(1), le.gen(2)], 0.5)
    numerator = ql.quasi_norm(L, le.evaluate_lattice(f, dict(enumerate(xs))))
    denominator = np.sum(np.sqrt(ql._norms(L, xs))) ** 2
    assert ql.convexity_ratio(L, xs, 0.5) == pytest.approx(numerator / denominator, rel=1e-12)


def test_l_convexity_violation():
    L = ql.CoordinateLattice.weighted_lr(1.0, 4, weights=(0.25,) * 4)
    u = np.ones(4)
    # averages of disjoint pieces of u: each piece has norm 1/4
    pieces = np.eye(4)
    assert not ql.l_convexity_violation(L, u, pieces, 0.3)
    assert not ql.l_convexity_violation(L, u, np.tile(u, (2, 1)), 0.5)
    with pytest.raises(ParameterError):
        ql.l_convexity_violation(L, 2 * u, pieces, 0.3)
    with pytest.raises(ParameterError):
        ql.l_convexity_violation(L, u, 2 * pieces, 0.3)
    with pytest.raises(ParameterError):
        ql.l_convexity_violation(L, u, pieces, 1.5)


def test_l_convexity_detects_small_pieces_in_l_half():
    # cell indicators of the l_1/2 grid have norm 1/16 while their average is u / 4
    L = ql.CoordinateLattice.lp_grid(0.5, 4)
    u = np.ones(4)
    assert ql.quasi_norm(L, u) == pytest.approx(1.0)
    assert ql.l_convexity_violation(L, u, np.eye(4), 0.8)
    assert not ql.l_convexity_violation(L, u, np.eye(4), 0.7)


def test_l_convexity_search_finds_nothing_on_l1():
    L = ql.CoordinateLattice.lp_grid(1.0, 8)
    assert ql.l_convexity_search(L, 0.1, 200, 7) == 0
    assert ql.l_convexity_search(L, 0.5, 100_000, 7) == 0


def test_convexification():
    L = ql.CoordinateLattice.weighted_lr(1.0, 2)
    x, y = np.array([1.0, 0.0]), np.array([1.0, 4.0])
    assert ql.convexify_oplus(L, x, y, 0.5).tolist() == pytest.approx([np.sqrt(2.0), 4.0])
    assert ql.convexify_norm(L, x, 0.5) == pytest.approx(1.0)
    with pytest.raises(ParameterError):
        ql.convexify_oplus(L, -x, y, 0.5)
    with pytest.raises(ParameterError):
        ql.convexify_oplus(L, x, y, 2.0)
    # exponents s > 1 are accepted by the general operation
    assert ql.convexification_oplus(L, x, y, 2.0).tolist() == pytest.approx([4.0, 4.0])


def test_convexification_of_l_half_is_not_normed():
    # X^(1/2) of l_1/2 is l_1/4: the triangle inequality fails for the disjoint pair e_1, e_2
    L = ql.CoordinateLattice.weighted_lr(0.5, 2)
    e1, e2 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    s = 0.5
    total = ql.convexification_norm(L, ql.convexification_oplus(L, e1, e2, s), s)
    assert total > ql.convexification_norm(L, e1, s) + ql.convexification_norm(L, e2, s)


def test_disjointness_criterion():
    L = ql.CoordinateLattice.weighted_lr(0.5, 3)
    x, y = np.array([1.0, 0.0, 2.0]), np.array([0.0, 3.0, 0.0])
    assert ql.disjointness_criterion(L, x, y)
    assert ql.quasi_norm(L, x - y) >= ql.quasi_norm(L, x)
    assert not ql.disjointness_criterion(L, x, x)
    with pytest.raises(ParameterError):
        ql.disjointness_criterion(L, -x, y)
